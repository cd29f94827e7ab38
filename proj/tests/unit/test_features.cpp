#include <cmath>
#include <map>
#include <random>

#include "doctest.h"
#include "json.hpp"
#include "oracle.hpp"
#include "tdt/error.hpp"
#include "tdt/features.hpp"

using namespace tdt;

namespace {

Relation load(const char* name) { return load_relation(oracle::fixture(name), RelationFormat::json); }

FeatureRelation features_for(const Relation& r, const std::vector<std::vector<std::size_t>>& marks,
                             const std::vector<std::string>& names) {
  std::vector<std::uint8_t> cells(r.input_count() * names.size(), 0);
  for (std::size_t l = 0; l < marks.size(); ++l) {
    for (std::size_t k : marks[l]) cells[k * names.size() + l] = 1;
  }
  return FeatureRelation(r.inputs(), names, cells);
}

FeatureRelation random_features(std::mt19937_64& rng, const Relation& r, std::size_t p) {
  std::bernoulli_distribution bit(0.5);
  std::vector<std::uint8_t> cells(r.input_count() * p);
  for (auto& c : cells) c = bit(rng) ? 1 : 0;
  return FeatureRelation(r.inputs(), oracle::names(p, "x"), cells);
}

// B_r by enumeration of every X with |X| = m - r.
std::vector<std::vector<std::size_t>> brute_b_sets(const Relation& r, const FeatureRelation& s,
                                                   std::size_t max_r, bool strict) {
  const std::size_t m = r.program_count();
  std::vector<std::vector<std::size_t>> out(max_r + 1);
  for (std::size_t level = 0; level <= max_r; ++level) {
    for (std::size_t l = 0; l < s.feature_count(); ++l) {
      bool all = true;
      for (oracle::Mask x = 1; x < (oracle::Mask{1} << m); ++x) {
        if (static_cast<std::size_t>(oracle::popcount(x)) != m - level) continue;
        const auto inc = oracle::inconsistent_inputs(r, x);
        std::vector<bool> in(r.input_count(), false);
        for (std::size_t k : inc) in[k] = true;
        for (std::size_t k = 0; k < r.input_count(); ++k) {
          if (in[k] && !s.has(k, l)) all = false;
          if (strict && !in[k] && s.has(k, l)) all = false;
        }
      }
      if (all) out[level].push_back(l);
    }
  }
  return out;
}

double entropy_of(const std::vector<std::size_t>& labels) {
  std::map<std::size_t, double> counts;
  for (std::size_t l : labels) counts[l] += 1;
  double h = 0;
  for (const auto& [_, c] : counts) h -= c / labels.size() * std::log2(c / labels.size());
  return h;
}

// H(P) + H(Q) - 2 I(P;Q), with I = H(P) + H(Q) - H(P,Q).
double vi_oracle(const std::vector<std::size_t>& p, const std::vector<std::size_t>& q) {
  std::vector<std::size_t> joint;
  for (std::size_t i = 0; i < p.size(); ++i) joint.push_back(p[i] * 1000 + q[i]);
  const double hp = entropy_of(p), hq = entropy_of(q), hj = entropy_of(joint);
  return hp + hq - 2 * (hp + hq - hj);
}

}  // namespace

TEST_CASE("relation product on the toy relation") {
  const Relation r = load("toy.json");
  const FeatureRelation s =
      features_for(r, {{9, 12, 16, 17, 18, 19}, {9}, {}}, {"x", "y", "none"});
  const auto rs = relation_product(r, s, Subset::full(4), false);
  CHECK(rs == std::vector<bool>{true, false, false});
  const auto strict = relation_product(r, s, Subset::full(4), true);
  CHECK(strict == std::vector<bool>{true, false, false});
  // no inconsistent inputs under a single program: empty conjunction
  CHECK(relation_product(r, s, parse_subset(r, "A"), false) == std::vector<bool>{true, true, true});
  CHECK_THROWS_AS(relation_product(r, s, Subset{}, false), ArgumentError);
}

TEST_CASE("strict product with every input inconsistent") {
  const Relation r = load("toy.json");
  const FeatureRelation s = features_for(r, {{0, 1}, {}}, {"some", "none"});
  std::vector<std::size_t> all(r.input_count());
  for (std::size_t k = 0; k < all.size(); ++k) all[k] = k;
  CHECK(relation_product(s, all, true) == std::vector<bool>{false, false});
  const FeatureRelation full = features_for(r, {all}, {"every"});
  CHECK(relation_product(full, all, true) == std::vector<bool>{true});
}

TEST_CASE("mismatched inputs are rejected") {
  const Relation r = load("toy.json");
  const FeatureRelation other({"q"}, {"x"}, {1});
  CHECK_THROWS_AS(relation_product(r, other, Subset::full(4), false), ValidationError);
  CHECK_THROWS_AS(b_sets(r, other), ValidationError);
}

TEST_CASE("b sets against enumeration") {
  std::mt19937_64 rng(29);
  std::size_t overlapping = 0;
  for (int round = 0; round < 150; ++round) {
    const std::size_t m = 1 + round % 4;
    const Relation r = oracle::random_relation(rng, m, 4 + round % 10);
    const FeatureRelation s = random_features(rng, r, 5);
    const bool strict = round % 2 == 1;
    const FeatureAttribution a = b_sets(r, s, std::nullopt, strict);
    CHECK(a.max_r == m - 1);
    const auto expect = brute_b_sets(r, s, m - 1, strict);
    CHECK(a.b_sets == expect);
    std::vector<std::size_t> memberships(s.feature_count(), 0);
    for (std::size_t level = 0; level < expect.size(); ++level) {
      for (std::size_t l : expect[level]) {
        if (memberships[l]++ == 0) CHECK(a.stratum[l] == level);
      }
    }
    for (std::size_t l = 0; l < s.feature_count(); ++l) {
      if (memberships[l] == 0) CHECK_FALSE(a.stratum[l].has_value());
    }
    const bool partition = std::all_of(memberships.begin(), memberships.end(),
                                       [](std::size_t c) { return c == 1; });
    CHECK(a.raw_sets_partition == partition);
    overlapping += partition ? 0 : 1;
    // strict implies non-strict
    for (oracle::Mask x = 1; x < (oracle::Mask{1} << m); ++x) {
      const auto loose = relation_product(r, s, Subset(x), false);
      const auto tight = relation_product(r, s, Subset(x), true);
      for (std::size_t l = 0; l < loose.size(); ++l) CHECK((!tight[l] || loose[l]));
    }
  }
  MESSAGE("raw B_r sets failed to partition the features in " << overlapping << " of 150 instances");
}

TEST_CASE("b sets: truncated range and consistent relations") {
  const std::vector<std::string> rows{"1111", "1111"};
  const Relation ones = Relation::from_rows({"A", "B"}, oracle::names(4, "f"), rows);
  const FeatureRelation s = features_for(ones, {{0}, {}}, {"a", "b"});
  const FeatureAttribution a = b_sets(ones, s, 0);
  CHECK(a.max_r == 0);
  CHECK(a.b_sets == std::vector<std::vector<std::size_t>>{{0, 1}});
  CHECK(b_sets(ones, s, 9).max_r == 1);
}

TEST_CASE("variation of information") {
  const Partition p = Partition::from_blocks({{1, 2}, {3, 4}});
  const Partition q = Partition::from_blocks({{1, 3}, {2, 4}});
  CHECK(variation_of_information(p, q) == doctest::Approx(2.0));
  CHECK(variation_of_information(p, p) == 0.0);
  const Partition one = Partition::from_blocks({{1, 2, 3, 4}});
  const Partition singles = Partition::from_blocks({{1}, {2}, {3}, {4}});
  CHECK(variation_of_information(one, singles) == doctest::Approx(2.0));
  CHECK(entropy(singles) == doctest::Approx(2.0));
  CHECK(entropy(one) == 0.0);
  CHECK_THROWS_AS(Partition::from_blocks({{1, 2}, {2, 3}}), ValidationError);
  CHECK_THROWS_AS(variation_of_information(p, Partition::from_blocks({{1, 2, 5}})), ValidationError);
  CHECK_THROWS_AS(variation_of_information(Partition::from_blocks({}), Partition::from_blocks({})),
                  ValidationError);
}

TEST_CASE("variation of information is a metric") {
  std::mt19937_64 rng(31);
  for (int round = 0; round < 300; ++round) {
    const std::size_t n = 1 + round % 12;
    std::uniform_int_distribution<std::size_t> label(0, 1 + round % 4);
    std::vector<std::size_t> a(n), b(n), c(n);
    for (std::size_t i = 0; i < n; ++i) {
      a[i] = label(rng);
      b[i] = label(rng);
      c[i] = label(rng);
    }
    const Partition pa = Partition::from_labels(a), pb = Partition::from_labels(b),
                    pc = Partition::from_labels(c);
    const double ab = variation_of_information(pa, pb);
    CHECK(ab == doctest::Approx(vi_oracle(a, b)));
    CHECK(ab == variation_of_information(pb, pa));
    CHECK(variation_of_information(pa, pa) == 0.0);
    CHECK(ab <= variation_of_information(pa, pc) + variation_of_information(pc, pb) + 1e-9);
    if (pa.labels() != pb.labels()) CHECK(ab > 0.0);
  }
}

TEST_CASE("greedy pruning") {
  const Relation r = load("three.json");
  // six features over the 14 inputs. All but f3 cover the inputs that are
  // inconsistent under the full program set; f3 is absent everywhere.
  const FeatureRelation s = features_for(
      r, {{4, 9, 11}, {4, 9, 11, 0}, {0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12, 13}, {}, {4, 9, 11, 13}, {1, 2, 4, 9, 11}},
      {"f0", "f1", "f2", "f3", "f4", "f5"});
  for (std::size_t l : {0, 1, 2, 4, 5}) CHECK(b_sets(r, s).stratum[l] == 0u);
  CHECK(greedy_feature_pruning(r, s, 0).empty());
  CHECK_THROWS_AS(greedy_feature_pruning(r, s, 7), ArgumentError);

  const auto rounds = greedy_feature_pruning(r, s, 6);
  REQUIRE(rounds.size() == 6);
  CHECK(rounds[0].feature == 3);
  CHECK(rounds[0].vi == 0.0);

  // exhaustive replay: every round re-evaluates each candidate from scratch
  FeatureRelation current = s;
  std::vector<bool> gone(6, false);
  for (const auto& round : rounds) {
    const Partition before = stratification_partition(b_sets(r, current));
    std::size_t best = 6;
    double best_vi = 0;
    for (std::size_t l = 0; l < 6; ++l) {
      if (gone[l]) continue;
      const double vi = variation_of_information(
          before, stratification_partition(b_sets(r, current.without_feature(l))));
      if (best == 6 || vi < best_vi - 1e-12) {
        best = l;
        best_vi = vi;
      }
    }
    CHECK(round.feature == best);
    CHECK(round.vi == doctest::Approx(best_vi));
    gone[best] = true;
    current = current.without_feature(best);
  }
}

TEST_CASE("attribution report") {
  const Relation r = load("toy.json");
  const FeatureRelation s = features_for(r, {{9, 12, 16, 17, 18, 19}, {9}}, {"x", "y"});
  const FeatureAttribution a = b_sets(r, s);
  const auto doc = nlohmann::json::parse(attribution_to_json(s, a, greedy_feature_pruning(r, s, 1)));
  CHECK(doc.contains("b_sets"));
  CHECK(doc.contains("stratification"));
  CHECK(doc["pruning"].size() == 1);
}
