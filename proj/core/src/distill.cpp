#include "tdt/distill.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <thread>

#include "json.hpp"
#include "tdt/diagram.hpp"
#include "tdt/dowker.hpp"
#include "tdt/error.hpp"

namespace tdt {
namespace {

using nlohmann::json;

json names_json(const std::vector<std::string>& programs, Subset s) {
  json out = json::array();
  for (std::size_t j : s.members()) out.push_back(programs.at(j));
  return out;
}

// Inputs grouped by exact accept-set, in first-occurrence order.
struct AcceptGroups {
  std::vector<Subset> sets;
  std::vector<std::uint64_t> counts;
  std::vector<std::size_t> group_of_input;
};

AcceptGroups group_inputs(const Relation& r) {
  AcceptGroups g;
  std::map<std::uint64_t, std::size_t> index;
  for (Subset column : r.column_sets()) {
    auto [it, fresh] = index.emplace(column.bits(), g.sets.size());
    if (fresh) {
      g.sets.push_back(column);
      g.counts.push_back(0);
    }
    ++g.counts[it->second];
    g.group_of_input.push_back(it->second);
  }
  return g;
}

// Adds one to group_score[g] for every group inconsistent under each swept
// subset in [first, last).
void sweep_subsets(const AcceptGroups& groups, const std::vector<Subset>& subsets,
                   std::size_t first, std::size_t last,
                   std::vector<std::uint64_t>& group_score) {
  for (std::size_t i = first; i < last; ++i) {
    const Subset s = subsets[i];
    std::vector<std::uint64_t> weights(std::size_t{1} << s.size(), 0);
    for (std::size_t g = 0; g < groups.sets.size(); ++g) {
      weights[compress_bits(groups.sets[g].bits(), s.bits())] += groups.counts[g];
    }
    const auto flags = inconsistent_region_flags(WeightedDiagram(s.size(), std::move(weights)));
    for (std::size_t g = 0; g < groups.sets.size(); ++g) {
      if (flags[compress_bits(groups.sets[g].bits(), s.bits())]) ++group_score[g];
    }
  }
}

}  // namespace

ScreenResult singleton_screen(const Relation& r) {
  if (r.input_count() == 0) throw PreconditionError("singleton_screen: empty corpus");
  if (r.program_count() > Subset::kMaxElements) {
    throw CapacityError("singleton_screen: more than 64 programs");
  }
  Subset kept;
  std::vector<ScreenedProgram> removed;
  std::string diagnostics;
  for (std::size_t j = 0; j < r.program_count(); ++j) {
    const std::size_t accepts = r.accept_count(j);
    const std::size_t rejects = r.input_count() - accepts;
    diagnostics += " " + r.programs()[j] + "(" + std::to_string(accepts) + "/" +
                   std::to_string(rejects) + ")";
    if (accepts >= rejects) {
      kept = kept.with(j);
    } else {
      removed.push_back({j, r.programs()[j], accepts, rejects});
    }
  }
  if (kept.empty()) {
    throw EmptyResultError(
        "singleton screen removed every program; accepts/rejects:" + diagnostics);
  }
  return {restrict_programs(r, kept), kept, std::move(removed)};
}

DistillTrace distill(const Relation& r) {
  require_diagram_capacity(r.program_count(), "distill");
  ScreenResult screen = singleton_screen(r);
  DistillTrace trace;
  trace.programs = r.programs();
  trace.initial_removals = std::move(screen.removed);
  const WeightedDiagram full = build_diagram(r);
  Subset kept = screen.kept;
  while (true) {
    const WeightedDiagram local = coarsen_diagram(full, kept);
    const auto deficient = deficient_regions(local);
    if (deficient.empty()) break;
    Subset region = deficient.front();
    std::uint64_t region_deficiency = 0;
    bool first = true;
    for (Subset d : deficient) {
      const std::uint64_t def = max_facet_weight(local, d) - local.weight(d);
      const bool better = first || d.size() > region.size() ||
                          (d.size() == region.size() && def > region_deficiency);
      if (better) {
        region = d;
        region_deficiency = def;
        first = false;
      }
    }
    // Heaviest facet, ties by ascending bits.
    Subset face = region.without(region.members().front());
    for (std::size_t j : region.members()) {
      const Subset f = region.without(j);
      if (local.weight(f) > local.weight(face) ||
          (local.weight(f) == local.weight(face) && f.bits() < face.bits())) {
        face = f;
      }
    }
    const Subset removed_local = region - face;
    const std::size_t removed =
        Subset(expand_bits(removed_local.bits(), kept.bits())).members().front();
    trace.steps.push_back({Subset(expand_bits(region.bits(), kept.bits())),
                           Subset(expand_bits(face.bits(), kept.bits())), removed});
    kept = kept.without(removed);
  }
  trace.final_programs = kept;
  return trace;
}

std::string trace_to_json(const DistillTrace& trace) {
  json doc;
  json screened = json::array();
  for (const auto& s : trace.initial_removals) {
    screened.push_back({{"program", s.name}, {"accepts", s.accepts}, {"rejects", s.rejects}});
  }
  json steps = json::array();
  for (const auto& step : trace.steps) {
    steps.push_back({{"region", names_json(trace.programs, step.region)},
                     {"face", names_json(trace.programs, step.face)},
                     {"removed", trace.programs.at(step.removed)}});
  }
  doc["screened"] = std::move(screened);
  doc["steps"] = std::move(steps);
  doc["final"] = names_json(trace.programs, trace.final_programs);
  return doc.dump(2) + "\n";
}

ScoreVector inconsistency_scores(const Relation& r, std::size_t min_subset_size,
                                 ScoreMode mode, std::size_t workers) {
  require_diagram_capacity(r.program_count(), "inconsistency_scores");
  const std::size_t m = r.program_count();
  const AcceptGroups groups = group_inputs(r);
  std::vector<std::uint64_t> group_score(groups.sets.size(), 0);
  ScoreVector out;
  out.mode = mode;
  out.min_subset_size = min_subset_size;

  if (mode == ScoreMode::subsets) {
    for (std::uint64_t x = 1; x < (std::uint64_t{1} << m); ++x) {
      if (Subset(x).size() >= min_subset_size) out.swept.emplace_back(x);
    }
    std::sort(out.swept.begin(), out.swept.end(), BySizeThenBits{});
    out.sweep_size = out.swept.size();
    workers = std::clamp<std::size_t>(workers, 1, std::max<std::size_t>(1, out.swept.size()));
    if (workers == 1) {
      sweep_subsets(groups, out.swept, 0, out.swept.size(), group_score);
    } else {
      std::vector<std::vector<std::uint64_t>> partial(
          workers, std::vector<std::uint64_t>(groups.sets.size(), 0));
      {
        std::vector<std::jthread> pool;
        const std::size_t chunk = (out.swept.size() + workers - 1) / workers;
        for (std::size_t w = 0; w < workers; ++w) {
          const std::size_t first = std::min(out.swept.size(), w * chunk);
          const std::size_t last = std::min(out.swept.size(), first + chunk);
          pool.emplace_back([&, w, first, last] {
            sweep_subsets(groups, out.swept, first, last, partial[w]);
          });
        }
      }
      for (const auto& p : partial) {
        for (std::size_t g = 0; g < p.size(); ++g) group_score[g] += p[g];
      }
    }
  } else {
    const WeightedDiagram d = build_diagram(r);
    std::set<Subset, BySizeThenBits> taus;
    const std::uint64_t all = Subset::full(m).bits();
    for (std::uint64_t tau = 1; tau <= all; ++tau) {
      if (Subset(tau).size() < min_subset_size) continue;
      // Proper nonempty subsets sigma of tau.
      for (std::uint64_t sigma = (tau - 1) & tau; sigma != 0; sigma = (sigma - 1) & tau) {
        ++out.sweep_size;
        taus.insert(Subset(tau));
        if (d.weights()[sigma] <= d.weights()[tau]) continue;
        const Subset extra(tau & ~sigma);
        for (std::size_t g = 0; g < groups.sets.size(); ++g) {
          if (Subset(sigma).is_subset_of(groups.sets[g]) &&
              !extra.is_subset_of(groups.sets[g])) {
            ++group_score[g];
          }
        }
      }
    }
    out.swept.assign(taus.begin(), taus.end());
  }

  out.scores.reserve(r.input_count());
  for (std::size_t g : groups.group_of_input) out.scores.push_back(group_score[g]);
  return out;
}

std::vector<std::pair<std::uint64_t, std::size_t>> score_histogram(
    const ScoreVector& scores) {
  std::vector<std::pair<std::uint64_t, std::size_t>> bins;
  if (scores.scores.empty()) return bins;
  const std::uint64_t top = *std::max_element(scores.scores.begin(), scores.scores.end());
  for (std::uint64_t s = 0; s <= top; ++s) bins.emplace_back(s, 0);
  for (std::uint64_t s : scores.scores) ++bins[s].second;
  return bins;
}

std::string scores_to_csv(const Relation& r, const ScoreVector& scores) {
  std::string out = "input,score\n";
  for (std::size_t k = 0; k < scores.scores.size(); ++k) {
    out += r.inputs().at(k) + "," + std::to_string(scores.scores[k]) + "\n";
  }
  return out;
}

std::string histogram_to_csv(const ScoreVector& scores) {
  std::string out = "score,count\n";
  for (const auto& [score, count] : score_histogram(scores)) {
    out += std::to_string(score) + "," + std::to_string(count) + "\n";
  }
  return out;
}

Selection select_inputs(const Relation& r, std::uint64_t threshold) {
  const WeightedDiagram d = build_diagram(r);
  if (!is_consistent(d)) {
    throw PreconditionError(
        "select_inputs: diagram is inconsistent; run distill and restrict the "
        "relation to the surviving programs first");
  }
  Selection out;
  out.threshold = threshold;
  const auto& columns = r.column_sets();
  for (std::size_t k = 0; k < columns.size(); ++k) {
    if (d.weight(columns[k]) >= threshold) out.kept.push_back(k);
  }
  std::set<std::uint64_t> candidates{0, threshold};
  for (std::uint64_t w : d.weights()) {
    if (w > 0) candidates.insert(w);
  }
  for (std::uint64_t t : candidates) {
    ThresholdReport row;
    row.threshold = t;
    for (Subset column : columns) {
      if (d.weight(column) < t) ++row.excluded;
    }
    std::vector<Subset> generators;
    for (std::size_t x = 1; x < d.region_count(); ++x) {
      if (d.weights()[x] > 0 && d.weights()[x] >= t) generators.emplace_back(x);
    }
    row.components =
        connected_components(DowkerComplex(r.programs(), std::move(generators))).count;
    out.candidates.push_back(row);
  }
  return out;
}

std::string selection_to_json(const Relation& r, const Selection& s) {
  json doc;
  doc["threshold"] = s.threshold;
  doc["total"] = r.input_count();
  doc["kept_count"] = s.kept.size();
  json kept = json::array();
  for (std::size_t k : s.kept) kept.push_back(r.inputs().at(k));
  doc["kept"] = std::move(kept);
  json rows = json::array();
  for (const auto& row : s.candidates) {
    rows.push_back({{"threshold", row.threshold},
                    {"excluded", row.excluded},
                    {"components", row.components}});
  }
  doc["candidates"] = std::move(rows);
  return doc.dump(2) + "\n";
}

}  // namespace tdt
