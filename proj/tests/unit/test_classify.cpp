#include <cstdio>
#include <random>
#include <sstream>

#include "doctest.h"
#include "json.hpp"
#include "oracle.hpp"
#include "tdt/classify.hpp"
#include "tdt/error.hpp"

using namespace tdt;

namespace {

Relation load(const char* name) { return load_relation(oracle::fixture(name), RelationFormat::json); }

// `positives` non-compliant inputs first, then compliant ones.
GroundTruth truth_with(std::size_t positives, std::size_t negatives) {
  GroundTruth t;
  t.compliant.assign(positives, false);
  t.compliant.resize(positives + negatives, true);
  return t;
}

std::vector<std::size_t> range(std::size_t from, std::size_t to) {
  std::vector<std::size_t> out;
  for (std::size_t k = from; k < to; ++k) out.push_back(k);
  return out;
}

ScoreVector scores_of(std::vector<std::uint64_t> values) {
  ScoreVector s;
  s.scores = std::move(values);
  return s;
}

}  // namespace

TEST_CASE("vote classifier") {
  CHECK(vote_classifier(load("toy.json"), 4).empty());
  const Relation r = load("three.json");
  auto flagged = vote_classifier(r, 1);
  std::vector<std::size_t> expect = range(0, 14);
  expect.erase(expect.begin() + 11);  // c12 is accepted by all
  CHECK(flagged == expect);
  const std::vector<std::string> ones{"111", "111"};
  const Relation all = Relation::from_rows({"A", "B"}, {"x", "y", "z"}, ones);
  CHECK(vote_classifier(all, 1).empty());
  CHECK_THROWS_AS(vote_classifier(r, 0), ArgumentError);
  CHECK_THROWS_AS(vote_classifier(r, 4), ArgumentError);
}

TEST_CASE("vote classifier is monotone in k") {
  std::mt19937_64 rng(13);
  for (int round = 0; round < 100; ++round) {
    const std::size_t m = 1 + round % 5;
    const Relation r = oracle::random_relation(rng, m, 20);
    for (std::size_t k = 1; k < m; ++k) {
      const auto lo = vote_classifier(r, k);
      const auto hi = vote_classifier(r, k + 1);
      CHECK(std::includes(lo.begin(), lo.end(), hi.begin(), hi.end()));
    }
  }
}

TEST_CASE("score rule classifier") {
  CHECK(score_rule_classifier(scores_of({0, 3, 6, 7}), 3, 6) == std::vector<std::size_t>{0, 2});
  CHECK(score_rule_classifier(scores_of({0, 3, 6, 7}), 0, -1).empty());
  CHECK(score_rule_classifier(scores_of({0, 3, 6, 7}), -4, -1).empty());
  CHECK(score_rule_classifier(scores_of({0, 3, 6, 7}), 0, 0) == std::vector<std::size_t>{0});
}

TEST_CASE("evaluate: exact rationals") {
  // TP = 11, FP = 1, FN = 0
  GroundTruth t = truth_with(11, 5);
  std::vector<std::size_t> predicted = range(0, 12);
  const ClassifierReport rep = evaluate(predicted, t);
  CHECK(rep.true_positives == 11);
  CHECK(rep.false_positives == 1);
  CHECK(rep.false_negatives == 0);
  CHECK(rep.true_negatives == 4);
  CHECK(rep.precision == Ratio(11, 12));
  CHECK(rep.recall == Ratio(1, 1));
  CHECK(rep.f1 == Ratio(22, 23));
}

TEST_CASE("evaluate: perfect and empty predictions") {
  GroundTruth t = truth_with(3, 4);
  const ClassifierReport perfect = evaluate(range(0, 3), t);
  CHECK(perfect.precision == Ratio(1, 1));
  CHECK(perfect.recall == Ratio(1, 1));
  CHECK(perfect.f1 == Ratio(1, 1));

  const ClassifierReport none = evaluate({}, t);
  CHECK_FALSE(none.precision.has_value());
  CHECK(none.recall == Ratio(0, 1));
  CHECK_FALSE(none.f1.has_value());

  const ClassifierReport wrong = evaluate(range(3, 5), t);
  CHECK(wrong.precision == Ratio(0, 1));
  CHECK(wrong.recall == Ratio(0, 1));
  CHECK_FALSE(wrong.f1.has_value());

  CHECK_THROWS_AS(evaluate(range(0, 8), t), ValidationError);
}

TEST_CASE("f1 identity in rationals and decimals") {
  std::mt19937_64 rng(19);
  for (int round = 0; round < 300; ++round) {
    const std::size_t n = 1 + round % 40;
    std::bernoulli_distribution coin(0.5);
    GroundTruth t;
    std::vector<std::size_t> predicted;
    for (std::size_t k = 0; k < n; ++k) {
      t.compliant.push_back(coin(rng));
      if (coin(rng)) predicted.push_back(k);
    }
    const ClassifierReport rep = evaluate(predicted, t);
    // permutation invariance: reversed order gives the same counts
    std::vector<std::size_t> reversed(predicted.rbegin(), predicted.rend());
    CHECK(evaluate(reversed, t).f1 == rep.f1);
    if (!rep.f1) continue;
    const Ratio& p = *rep.precision;
    const Ratio& r = *rep.recall;
    // 2PR/(P+R) in exact integer arithmetic
    const std::int64_t num = 2 * p.numerator() * r.numerator();
    const std::int64_t den = p.numerator() * r.denominator() + r.numerator() * p.denominator();
    CHECK(*rep.f1 == Ratio(num, den));
    const double decimal = 2 * p.value() * r.value() / (p.value() + r.value());
    CHECK(std::abs(rep.f1->value() - decimal) <= 1e-12);
  }
}

TEST_CASE("ground truth csv") {
  const std::vector<std::string> inputs{"a", "b", "c"};
  const GroundTruth t = parse_ground_truth_csv("input,compliant\nb,1\na,0\nc,1\n", inputs);
  CHECK(t.compliant == std::vector<bool>{false, true, true});
  CHECK(parse_ground_truth_csv("a,0\r\nb,0\r\nc,1\r\n", inputs).compliant ==
        std::vector<bool>{false, false, true});
  CHECK_THROWS_AS(parse_ground_truth_csv("a,0\nb,1\n", inputs), ValidationError);
  CHECK_THROWS_AS(parse_ground_truth_csv("a,0\nb,1\nc,1\nz,1\n", inputs), ValidationError);
  CHECK_THROWS_AS(parse_ground_truth_csv("a,0\na,1\nb,1\nc,1\n", inputs), ValidationError);
  CHECK_THROWS_AS(parse_ground_truth_csv("a,2\nb,1\nc,1\n", inputs), FormatError);
}

TEST_CASE("report json") {
  GroundTruth t = truth_with(11, 5);
  const auto doc = nlohmann::json::parse(
      report_to_json(evaluate(range(0, 12), t), oracle::names(16, "f")));
  CHECK(doc["precision"]["exact"] == "11/12");
  CHECK(doc["f1"]["exact"] == "22/23");
  CHECK(doc["counts"]["tp"] == 11);
  CHECK(doc["flagged"].size() == 12);
  const auto empty = nlohmann::json::parse(report_to_json(evaluate({}, t), oracle::names(16, "f")));
  CHECK(empty["precision"].is_null());
}
