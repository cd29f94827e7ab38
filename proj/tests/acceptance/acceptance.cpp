// Runs every acceptance criterion and prints one PASS/FAIL line for each.
// Exit status is nonzero if any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "oracle.hpp"
#include "properties.hpp"
#include "tdt/classify.hpp"
#include "tdt/diagram.hpp"
#include "tdt/distill.hpp"
#include "tdt/dowker.hpp"
#include "tdt/harness.hpp"
#include "tdt/sheaf.hpp"

using namespace tdt;

namespace {

// Collects mismatches for one criterion.
class Check {
 public:
  void expect(bool ok, const std::string& what) {
    if (!ok) problems_.push_back(what);
  }
  template <typename A, typename B>
  void equal(const A& got, const B& want, const std::string& what) {
    expect(got == want, what);
  }
  const std::vector<std::string>& problems() const { return problems_; }

 private:
  std::vector<std::string> problems_;
};

Relation load(const char* name) { return load_relation(oracle::fixture(name), RelationFormat::json); }

std::set<std::string> keys(const Relation& r, const std::vector<Subset>& sets) {
  std::set<std::string> out;
  for (Subset s : sets) out.insert(region_key(r.programs(), s));
  return out;
}

std::vector<std::string> input_names(const Relation& r, const std::vector<std::size_t>& idx) {
  std::vector<std::string> out;
  for (std::size_t k : idx) out.push_back(r.inputs()[k]);
  return out;
}

void toy_fixture(Check& c) {
  const Relation r = load("toy.json");
  const WeightedDiagram d = build_diagram(r);
  const std::map<std::string, std::uint64_t> expected{
      {"A", 1}, {"B", 2}, {"C", 2}, {"D", 1}, {"A,B", 3},
      {"A,C", 1}, {"A,D", 2}, {"B,C", 1}, {"C,D", 3}, {"A,C,D", 4}};
  for (std::uint64_t x = 0; x < d.region_count(); ++x) {
    const std::string key = region_key(r.programs(), Subset(x));
    const auto it = expected.find(key);
    c.equal(d.weights()[x], it == expected.end() ? 0 : it->second, "weight of {" + key + "}");
  }
  const DowkerGraph g = build_graph(build_complex(r));
  std::set<std::string> red;
  for (const auto& e : g.edges) {
    if (!e.consistent) red.insert(region_key(r.programs(), e.from) + "->" + region_key(r.programs(), e.to));
  }
  c.equal(red, std::set<std::string>{"A,C->C", "B,C->B", "B,C->C"}, "inconsistent edges");
  c.equal(keys(r, consistent_core(g)), std::set<std::string>{"A", "B", "C", "D", "A,B", "A,D", "C,D"},
          "consistent core");
  c.equal(input_names(r, inconsistent_inputs(r)), std::vector<std::string>{"10", "13", "17", "18", "19", "20"},
          "inconsistent inputs");
}

void distill_fixture(Check& c) {
  const Relation r = load("three.json");
  const WeightedDiagram d = build_diagram(r);
  c.equal(std::vector<std::uint64_t>(d.weights().begin(), d.weights().end()),
          std::vector<std::uint64_t>{1, 2, 3, 1, 2, 3, 1, 1}, "weights");
  c.equal(keys(r, deficient_regions(d)), std::set<std::string>{"A,B", "B,C", "A,B,C"}, "deficient regions");
  const ScreenResult screen = singleton_screen(r);
  c.expect(screen.removed.size() == 1 && screen.removed[0].name == "B", "screen removes exactly B");
  const Subset ac = parse_subset(r, "A,C");
  const WeightedDiagram dac = build_diagram(restrict_programs(r, ac));
  c.equal(std::vector<std::uint64_t>(dac.weights().begin(), dac.weights().end()),
          std::vector<std::uint64_t>{4, 3, 3, 4}, "{A,C} weights");
  c.equal(keys(screen.relation, deficient_regions(dac)), std::set<std::string>{"A", "C"}, "{A,C} deficient");
  const DistillTrace t = distill(r);
  c.expect(t.final_programs.size() == 1 && t.final_programs.is_subset_of(ac), "one survivor from {A,C}");
  const WeightedDiagram last = build_diagram(restrict_programs(r, t.final_programs));
  c.equal(std::vector<std::uint64_t>(last.weights().begin(), last.weights().end()),
          std::vector<std::uint64_t>{7, 7}, "final weights");
  c.expect(is_consistent(last), "final diagram consistent");
}

void synthetic_fixture(Check& c) {
  const Relation r = load("synthetic.json");
  c.equal(r.input_count(), std::size_t{1000}, "corpus size");
  c.equal(r.input_count() - select_inputs(r, 20).kept.size(), std::size_t{10}, "threshold 20 excludes");
  c.equal(r.input_count() - select_inputs(r, 900).kept.size(), std::size_t{100}, "threshold 900 excludes");
  using V = std::vector<std::uint64_t>;
  c.equal(display_vector(r, parse_subset(r, "A")), V{2, 20, 30, 900}, "display at A");
  c.equal(display_vector(r, parse_subset(r, "A,B")), V{2, 3, 30, 40, 20, 900}, "display at AB");
  c.equal(display_vector(r, parse_subset(r, "A,B,C")), V{2, 3, 4, 20, 30, 40, 900}, "display at ABC");
}

void homology(Check& c) {
  const Relation r = load("toy.json");
  const DowkerComplex complex = build_complex(r);
  const auto betti = betti_numbers(complex, 2);
  c.expect(betti.size() >= 2 && betti[0] == 1 && betti[1] == 1, "(b0, b1) = (1, 1)");
  long long alternating = 0;
  for (std::size_t d = 0; d < betti.size(); ++d) {
    alternating += (d % 2 == 0 ? 1 : -1) * static_cast<long long>(betti[d]);
  }
  const auto faces = oracle::faces(oracle::region_counts(r, 0xF));
  c.equal(alternating, oracle::euler_characteristic(faces), "euler characteristic");
}

void property_suites(Check& c) {
  for (const auto& res : {properties::filtration(), properties::subdiagram(), properties::removal_identity(),
                          properties::component_duality(), properties::score_oracle(),
                          properties::distill_terminates()}) {
    c.expect(res.instances >= 500, res.name + ": only " + std::to_string(res.instances) + " instances");
    c.expect(res.failures == 0,
             res.name + ": " + std::to_string(res.failures) + " failures, first " + res.first_failure);
  }
}

void harness_golden(Check& c) {
  RunConfig cfg = load_run_config(oracle::fixture("run_three.json"));
  const std::string golden = read_file(oracle::fixture("golden_three.json"));
  for (std::size_t p : {1, 8}) {
    cfg.parallelism = p;
    const RunOutput out = run_corpus(cfg);
    c.equal(relation_to_json(out.relation), golden, "parallelism " + std::to_string(p));
  }
}

void classifier(Check& c) {
  GroundTruth truth;
  truth.compliant.assign(11, false);
  truth.compliant.resize(16, true);
  std::vector<std::size_t> flagged;
  for (std::size_t k = 0; k < 12; ++k) flagged.push_back(k);
  const ClassifierReport rep = evaluate(flagged, truth);
  c.expect(rep.precision == Ratio(11, 12), "precision 11/12");
  c.expect(rep.recall == Ratio(1, 1), "recall 1/1");
  c.expect(rep.f1 == Ratio(22, 23), "f1 22/23");
  const auto doc = nlohmann::json::parse(report_to_json(rep, oracle::names(16, "f")));
  c.equal(doc["precision"]["exact"].get<std::string>(), std::string("11/12"), "rendered precision");
  const double p = 11.0 / 12.0, r = 1.0;
  c.expect(std::abs(doc["f1"]["value"].get<double>() - 2 * p * r / (p + r)) <= 1e-12, "f1 decimal");

  // a second constructed set: TP 5, FP 3, FN 2
  GroundTruth t2;
  t2.compliant = {false, false, false, false, false, false, false, true, true, true, true};
  const ClassifierReport r2 = evaluate(std::vector<std::size_t>{0, 1, 2, 3, 4, 7, 8, 9}, t2);
  c.expect(r2.precision == Ratio(5, 8) && r2.recall == Ratio(5, 7) && r2.f1 == Ratio(2, 3), "5/8, 5/7, 2/3");
  c.expect(std::abs(r2.f1->value() - 2 * (5.0 / 8) * (5.0 / 7) / (5.0 / 8 + 5.0 / 7)) <= 1e-12,
           "second f1 decimal");
}

void report_formats(Check& c) {
  const Relation r = load("toy.json");
  const ScoreVector s = inconsistency_scores(r, 2);
  const std::string hist = histogram_to_csv(s);
  c.expect(hist.rfind("score,count\n", 0) == 0, "histogram header");
  std::istringstream rows(hist);
  std::string line;
  std::getline(rows, line);
  std::size_t expect_bin = 0, total = 0;
  while (std::getline(rows, line)) {
    const auto comma = line.find(',');
    c.equal(std::stoul(line.substr(0, comma)), expect_bin++, "contiguous histogram bins");
    total += std::stoul(line.substr(comma + 1));
  }
  c.equal(total, r.input_count(), "histogram total");
  c.expect(scores_to_csv(r, s).rfind("input,score\n", 0) == 0, "score csv header");

  std::vector<std::size_t> low;
  for (std::size_t k = 0; k < s.scores.size(); ++k) {
    if (s.scores[k] < 2) low.push_back(k);
  }
  const Relation restricted = restrict_inputs(r, low);
  const Relation back = parse_relation_json(relation_to_json(restricted));
  c.expect(back == restricted && back.programs() == r.programs(), "restricted relation round trip");
  c.equal(parse_relation_csv(relation_to_csv(restricted)), restricted, "restricted relation csv");
}

struct Criterion {
  int id;
  const char* title;
  double limit_secs;
  std::function<void(Check&)> run;
  const char* note = nullptr;
};

}  // namespace

int main() {
  const std::vector<Criterion> criteria{
      {1, "toy fixture weights, edges, core, inputs", 1.0, toy_fixture},
      {2, "three-program fixture and distillation", 1.0, distill_fixture},
      {3, "synthetic fixture selection and display vectors", 1.0, synthetic_fixture},
      {4, "toy homology with euler cross-check", 1.0, homology},
      {5, "randomized property suites", 60.0, property_suites},
      {6, "harness reproduces golden relation at parallelism 1 and 8", 10.0, harness_golden},
      {7, "classifier rationals and f1 identity", 1.0, classifier},
      {8, "report formats for external figures", 1.0, report_formats,
       "corpus-scale results need external corpora and parsers; formats only"},
  };
  int failed = 0;
  for (const auto& cr : criteria) {
    Check check;
    const auto start = std::chrono::steady_clock::now();
    try {
      cr.run(check);
    } catch (const std::exception& e) {
      check.expect(false, std::string("exception: ") + e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    check.expect(secs < cr.limit_secs, "over time limit");
    const bool ok = check.problems().empty();
    failed += ok ? 0 : 1;
    std::printf("%s %d: %s (%.3f s, limit %.0f s)%s%s\n", ok ? "PASS" : "FAIL", cr.id, cr.title, secs,
                cr.limit_secs, cr.note ? " -- " : "", cr.note ? cr.note : "");
    for (const auto& p : check.problems()) std::printf("    %s\n", p.c_str());
  }
  std::printf("%d of %zu criteria failed\n", failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
