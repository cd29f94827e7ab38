#include "tdt/features.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <unordered_map>

#include "json.hpp"
#include "tdt/dowker.hpp"
#include "tdt/error.hpp"

namespace tdt {
namespace {

void require_aligned(const Relation& r, const FeatureRelation& s) {
  if (r.inputs() != s.inputs()) {
    throw ValidationError("feature relation inputs do not match the relation's inputs");
  }
}

// Inconsistent input lists for every program subset of each swept size.
struct IncTable {
  std::size_t max_r = 0;
  // by_level[r] holds inc(X) for all X with |X| = m - r.
  std::vector<std::vector<std::vector<std::size_t>>> by_level;
};

IncTable build_inc_table(const Relation& r, std::optional<std::size_t> max_r) {
  require_diagram_capacity(r.program_count(), "b_sets");
  const std::size_t m = r.program_count();
  IncTable t;
  t.max_r = std::min(max_r.value_or(m - 1), m - 1);
  t.by_level.resize(t.max_r + 1);
  for (std::uint64_t x = 1; x < (std::uint64_t{1} << m); ++x) {
    const std::size_t size = Subset(x).size();
    const std::size_t level = m - size;
    if (level > t.max_r) continue;
    t.by_level[level].push_back(inconsistent_inputs(r, Subset(x)));
  }
  return t;
}

bool column_satisfies(const FeatureRelation& s, std::size_t feature,
                      const std::vector<std::size_t>& inc, bool strict) {
  for (std::size_t k : inc) {
    if (!s.has(k, feature)) return false;
  }
  if (strict) {
    std::size_t next = 0;
    for (std::size_t k = 0; k < s.input_count(); ++k) {
      if (next < inc.size() && inc[next] == k) {
        ++next;
        continue;
      }
      if (s.has(k, feature)) return false;
    }
  }
  return true;
}

std::optional<std::size_t> stratum_of(const FeatureRelation& s, std::size_t feature,
                                      const IncTable& t, bool strict) {
  for (std::size_t level = 0; level <= t.max_r; ++level) {
    const bool all = std::all_of(t.by_level[level].begin(), t.by_level[level].end(),
                                 [&](const auto& inc) {
                                   return column_satisfies(s, feature, inc, strict);
                                 });
    if (all) return level;
  }
  return std::nullopt;
}

FeatureAttribution attribute(const FeatureRelation& s, const IncTable& t, bool strict) {
  FeatureAttribution a;
  a.max_r = t.max_r;
  a.strict = strict;
  a.b_sets.resize(t.max_r + 1);
  a.stratum.assign(s.feature_count(), std::nullopt);
  std::vector<std::size_t> memberships(s.feature_count(), 0);
  for (std::size_t level = 0; level <= t.max_r; ++level) {
    for (std::size_t f = 0; f < s.feature_count(); ++f) {
      const bool all = std::all_of(t.by_level[level].begin(), t.by_level[level].end(),
                                   [&](const auto& inc) {
                                     return column_satisfies(s, f, inc, strict);
                                   });
      if (!all) continue;
      a.b_sets[level].push_back(f);
      ++memberships[f];
      if (!a.stratum[f]) a.stratum[f] = level;
    }
  }
  a.raw_sets_partition = std::all_of(memberships.begin(), memberships.end(),
                                     [](std::size_t c) { return c == 1; });
  return a;
}

std::size_t stratum_label(const std::optional<std::size_t>& stratum, std::size_t max_r) {
  return stratum ? *stratum : max_r + 1;
}

}  // namespace

std::vector<bool> relation_product(const FeatureRelation& s,
                                   std::span<const std::size_t> inconsistent,
                                   bool strict) {
  std::vector<std::size_t> inc(inconsistent.begin(), inconsistent.end());
  std::sort(inc.begin(), inc.end());
  for (std::size_t k : inc) {
    if (k >= s.input_count()) throw ArgumentError("inconsistent input index out of range");
  }
  std::vector<bool> out(s.feature_count());
  for (std::size_t f = 0; f < s.feature_count(); ++f) {
    out[f] = column_satisfies(s, f, inc, strict);
  }
  return out;
}

std::vector<bool> relation_product(const Relation& r, const FeatureRelation& s,
                                   Subset programs, bool strict) {
  require_aligned(r, s);
  if (programs.empty()) throw ArgumentError("relation_product: empty program set");
  return relation_product(s, inconsistent_inputs(r, programs), strict);
}

FeatureAttribution b_sets(const Relation& r, const FeatureRelation& s,
                          std::optional<std::size_t> max_r, bool strict) {
  require_aligned(r, s);
  return attribute(s, build_inc_table(r, max_r), strict);
}

Partition::Partition(std::vector<std::size_t> ground, std::vector<std::size_t> labels)
    : ground_(std::move(ground)) {
  std::unordered_map<std::size_t, std::size_t> renumber;
  labels_.reserve(labels.size());
  for (std::size_t l : labels) {
    auto [it, fresh] = renumber.emplace(l, renumber.size());
    labels_.push_back(it->second);
  }
  block_count_ = renumber.size();
}

Partition Partition::from_blocks(const std::vector<std::vector<std::size_t>>& blocks) {
  std::map<std::size_t, std::size_t> owner;
  std::size_t id = 0;
  for (const auto& block : blocks) {
    if (block.empty()) continue;
    for (std::size_t e : block) {
      if (!owner.emplace(e, id).second) {
        throw ValidationError("partition blocks overlap at element " + std::to_string(e));
      }
    }
    ++id;
  }
  std::vector<std::size_t> ground, labels;
  for (const auto& [e, b] : owner) {
    ground.push_back(e);
    labels.push_back(b);
  }
  return Partition(std::move(ground), std::move(labels));
}

Partition Partition::from_labels(std::span<const std::size_t> labels) {
  std::vector<std::size_t> ground(labels.size());
  for (std::size_t i = 0; i < ground.size(); ++i) ground[i] = i;
  return Partition(std::move(ground), {labels.begin(), labels.end()});
}

double entropy(const Partition& p) {
  const double n = static_cast<double>(p.ground().size());
  std::vector<std::size_t> sizes(p.block_count(), 0);
  for (std::size_t l : p.labels()) ++sizes[l];
  double h = 0.0;
  for (std::size_t c : sizes) {
    if (c == 0) continue;
    const double q = static_cast<double>(c) / n;
    h -= q * std::log2(q);
  }
  return h;
}

double variation_of_information(const Partition& p, const Partition& q) {
  if (p.ground().empty()) throw ValidationError("partitions over an empty ground set");
  if (p.ground() != q.ground()) throw ValidationError("partitions have different ground sets");
  const double n = static_cast<double>(p.ground().size());
  std::vector<std::size_t> ps(p.block_count(), 0), qs(q.block_count(), 0);
  std::map<std::pair<std::size_t, std::size_t>, std::size_t> joint;
  for (std::size_t i = 0; i < p.labels().size(); ++i) {
    ++ps[p.labels()[i]];
    ++qs[q.labels()[i]];
    ++joint[{p.labels()[i], q.labels()[i]}];
  }
  // VI = sum over cells of -r_ij (log r_ij/p_i + log r_ij/q_j). Terms are
  // summed in sorted order so swapping p and q gives the identical double.
  std::vector<double> terms;
  terms.reserve(joint.size());
  for (const auto& [cell, count] : joint) {
    const double rij = static_cast<double>(count) / n;
    const double pi = static_cast<double>(ps[cell.first]) / n;
    const double qj = static_cast<double>(qs[cell.second]) / n;
    terms.push_back(-rij * (std::log2(rij / pi) + std::log2(rij / qj)));
  }
  std::sort(terms.begin(), terms.end());
  double vi = 0.0;
  for (double t : terms) vi += t;
  return std::max(0.0, vi);
}

Partition stratification_partition(const FeatureAttribution& a) {
  std::vector<std::size_t> labels;
  labels.reserve(a.stratum.size());
  for (const auto& s : a.stratum) labels.push_back(stratum_label(s, a.max_r));
  return Partition::from_labels(labels);
}

std::vector<PruningRound> greedy_feature_pruning(const Relation& r,
                                                 const FeatureRelation& s,
                                                 std::size_t rounds,
                                                 std::optional<std::size_t> max_r,
                                                 bool strict) {
  require_aligned(r, s);
  if (rounds > s.feature_count()) {
    throw ArgumentError("greedy_feature_pruning: rounds exceeds the feature count");
  }
  std::vector<PruningRound> out;
  if (rounds == 0) return out;
  const IncTable table = build_inc_table(r, max_r);
  std::vector<std::size_t> labels;
  for (std::size_t f = 0; f < s.feature_count(); ++f) {
    labels.push_back(stratum_label(stratum_of(s, f, table, strict), table.max_r));
  }
  // A feature's stratum depends only on its own column, and every cleared
  // column is the all-absent column, so clearing f relabels only f and always
  // to the same stratum.
  const FeatureRelation absent(s.inputs(), {"absent"},
                               std::vector<std::uint8_t>(s.input_count(), 0));
  const std::size_t cleared_label =
      stratum_label(stratum_of(absent, 0, table, strict), table.max_r);
  std::vector<bool> removed(s.feature_count(), false);
  for (std::size_t round = 0; round < rounds; ++round) {
    const Partition before = Partition::from_labels(labels);
    std::optional<PruningRound> best;
    for (std::size_t f = 0; f < s.feature_count(); ++f) {
      if (removed[f]) continue;
      std::vector<std::size_t> candidate = labels;
      candidate[f] = cleared_label;
      const double vi =
          variation_of_information(before, Partition::from_labels(candidate));
      if (!best || vi < best->vi - 1e-12) best = PruningRound{f, vi};
    }
    removed[best->feature] = true;
    labels[best->feature] = cleared_label;
    out.push_back(*best);
  }
  return out;
}

std::string attribution_to_json(const FeatureRelation& s, const FeatureAttribution& a,
                                const std::vector<PruningRound>& pruning) {
  using nlohmann::json;
  json doc;
  doc["max_r"] = a.max_r;
  doc["strict"] = a.strict;
  doc["raw_sets_partition"] = a.raw_sets_partition;
  json sets = json::object();
  for (std::size_t level = 0; level < a.b_sets.size(); ++level) {
    json names = json::array();
    for (std::size_t f : a.b_sets[level]) names.push_back(s.features()[f]);
    sets[std::to_string(level)] = std::move(names);
  }
  doc["b_sets"] = std::move(sets);
  json strat = json::object();
  for (std::size_t f = 0; f < a.stratum.size(); ++f) {
    strat[s.features()[f]] = a.stratum[f] ? json(*a.stratum[f]) : json(nullptr);
  }
  doc["stratification"] = std::move(strat);
  json rounds = json::array();
  for (const auto& p : pruning) {
    rounds.push_back({{"feature", s.features()[p.feature]}, {"vi", p.vi}});
  }
  doc["pruning"] = std::move(rounds);
  return doc.dump(2) + "\n";
}

}  // namespace tdt
