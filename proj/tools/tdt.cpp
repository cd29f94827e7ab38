// tdt: command-line front end for the topological differential testing library.

#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "tdt/classify.hpp"
#include "tdt/diagram.hpp"
#include "tdt/distill.hpp"
#include "tdt/dowker.hpp"
#include "tdt/error.hpp"
#include "tdt/features.hpp"
#include "tdt/harness.hpp"
#include "tdt/relation.hpp"
#include "tdt/sheaf.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;

// Outputs are staged and written only after every computation succeeded.
class Outputs {
 public:
  void add(const std::string& path, std::string contents) {
    if (!path.empty()) files_.emplace_back(path, std::move(contents));
  }
  void commit() const {
    for (const auto& [path, contents] : files_) tdt::write_file(path, contents);
  }

 private:
  std::vector<std::pair<std::string, std::string>> files_;
};

struct RelationArg {
  std::string path;
  std::string format;  // empty: by extension

  void attach(CLI::App* cmd) {
    cmd->add_option("relation", path, "Relation file (canonical JSON or CSV)")
        ->required()
        ->check(CLI::ExistingFile);
    cmd->add_option("--input-format", format, "Relation format; default by extension")
        ->check(CLI::IsMember({"json", "csv"}));
  }

  tdt::Relation load() const {
    tdt::RelationFormat f = tdt::format_from_path(path);
    if (format == "json") f = tdt::RelationFormat::json;
    if (format == "csv") f = tdt::RelationFormat::csv;
    return tdt::load_relation(path, f);
  }
};

std::string relation_in_format(const tdt::Relation& r, const std::string& format,
                               const std::string& path) {
  std::string f = format;
  if (f.empty()) f = fs::path(path).extension() == ".csv"   ? "csv"
                     : fs::path(path).extension() == ".pgm" ? "pgm"
                                                            : "json";
  if (f == "csv") return tdt::relation_to_csv(r);
  if (f == "pgm") return tdt::relation_to_pgm(r);
  return tdt::relation_to_json(r);
}

std::string ids_text(const tdt::Relation& r, const std::vector<std::size_t>& idx) {
  std::string out;
  for (std::size_t k : idx) out += r.inputs()[k] + "\n";
  return out;
}

std::string join(const std::vector<std::string>& parts, const char* sep = ",") {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i != 0) out += sep;
    out += parts[i];
  }
  return out;
}

std::string braces(const std::vector<std::string>& programs, tdt::Subset s) {
  return "{" + tdt::region_key(programs, s) + "}";
}

json ratio_json(const std::optional<tdt::Ratio>& r) {
  if (!r) return nullptr;
  return {{"exact", r->to_string()}, {"value", r->value()}};
}

tdt::ScoreMode parse_mode(const std::string& mode) {
  return mode == "pairs" ? tdt::ScoreMode::pairs : tdt::ScoreMode::subsets;
}

// ---------------------------------------------------------------------------

struct RunOpts {
  std::string config;
  std::string out;
  std::string store;
  std::string keywords;
  std::size_t parallelism = 0;
};

int cmd_run(const RunOpts& o) {
  tdt::RunConfig cfg = tdt::load_run_config(o.config);
  if (o.parallelism != 0) cfg.parallelism = o.parallelism;
  tdt::validate_config(cfg);

  const std::string store_path =
      o.store.empty() ? fs::path(o.out).replace_extension(".jsonl").string() : o.store;
  tdt::RunOutput result = tdt::run_corpus(cfg);

  Outputs outs;
  outs.add(o.out, tdt::relation_to_json(result.relation));
  outs.add(store_path, tdt::store_to_jsonl(result.store));
  std::vector<std::vector<std::string>> keywords;
  for (const auto& p : cfg.parsers) keywords.push_back(p.keywords);
  std::optional<tdt::KeywordTable> table;
  if (!o.keywords.empty()) {
    table = tdt::keyword_table(result.store, keywords);
    outs.add(o.keywords, tdt::keyword_table_to_csv(*table));
  }
  outs.commit();

  const tdt::Relation& r = result.relation;
  std::size_t timeouts = 0;
  for (const auto& rec : result.store.records) timeouts += rec.timed_out ? 1 : 0;
  std::cout << "ran " << r.program_count() << " parsers on " << r.input_count()
            << " inputs (" << result.store.records.size() << " jobs)\n";
  for (std::size_t j = 0; j < r.program_count(); ++j) {
    std::cout << "  " << r.programs()[j] << ": accepted " << r.accept_count(j) << " / "
              << r.input_count() << "\n";
  }
  if (timeouts != 0) std::cout << "timed out: " << timeouts << "\n";
  if (table && !table->uncovered.empty()) {
    std::cout << "rejections without keyword match: " << table->uncovered.size() << "\n";
  }
  if (result.failures != 0) {
    std::cerr << "tdt: " << result.failures << " jobs could not be executed\n";
    for (const auto& rec : result.store.records) {
      if (!rec.diagnostic.empty()) {
        std::cerr << "  " << result.store.parsers[rec.parser] << " "
                  << result.store.inputs[rec.input] << ": " << rec.diagnostic << "\n";
      }
    }
    return kExitRuntime;
  }
  return 0;
}

struct AnalyzeOpts {
  RelationArg rel;
  std::string out;
  std::string dot;
  std::string inconsistent;
  std::optional<std::size_t> betti;
  std::size_t face_budget = tdt::kDefaultFaceBudget;
};

int cmd_analyze(const AnalyzeOpts& o) {
  const tdt::Relation r = o.rel.load();
  const tdt::DowkerComplex complex = tdt::build_complex(r);
  const tdt::DowkerGraph graph = tdt::build_graph(complex);
  const std::vector<tdt::Subset> core = tdt::consistent_core(graph);
  const std::vector<std::size_t> bad = tdt::inconsistent_inputs(r);
  std::vector<std::size_t> betti;
  if (o.betti) betti = tdt::betti_numbers(complex, *o.betti, o.face_budget);

  json report = json::parse(tdt::diagram_report_json(complex.diagram(), r.programs()));
  json core_json = json::array();
  for (tdt::Subset s : core) core_json.push_back(tdt::region_key(r.programs(), s));
  json bad_json = json::array();
  for (std::size_t k : bad) bad_json.push_back(r.inputs()[k]);
  std::size_t red = 0;
  json red_json = json::array();
  for (const auto& e : graph.edges) {
    if (e.consistent) continue;
    ++red;
    red_json.push_back(
        {{"from", tdt::region_key(r.programs(), e.from)}, {"to", tdt::region_key(r.programs(), e.to)}});
  }
  report["core"] = std::move(core_json);
  report["inconsistent_inputs"] = std::move(bad_json);
  report["inconsistent_edges"] = std::move(red_json);
  if (o.betti) report["betti"] = betti;
  if (r.input_count() != 0) {
    json rates = json::object();
    const auto rate = tdt::acceptance_rates(r);
    for (std::size_t j = 0; j < r.program_count(); ++j) rates[r.programs()[j]] = ratio_json(rate[j]);
    report["acceptance"] = std::move(rates);
    json cond = json::object();
    const auto matrix = tdt::conditional_acceptance(r);
    for (std::size_t j = 0; j < r.program_count(); ++j) {
      json row = json::object();
      for (std::size_t i = 0; i < r.program_count(); ++i) row[r.programs()[i]] = ratio_json(matrix[j][i]);
      cond[r.programs()[j]] = std::move(row);
    }
    report["conditional_acceptance"] = std::move(cond);
  }

  Outputs outs;
  outs.add(o.out, report.dump(2) + "\n");
  outs.add(o.dot, tdt::graph_to_dot(graph));
  outs.add(o.inconsistent, ids_text(r, bad));
  outs.commit();

  std::cout << r.program_count() << " programs, " << r.input_count() << " inputs, "
            << complex.facets().size() << " facets, " << graph.nodes.size() << " faces\n";
  std::cout << "diagram " << (report["consistent"].get<bool>() ? "consistent" : "inconsistent")
            << "; " << red << " inconsistent edges\n";
  std::vector<std::string> core_names;
  for (tdt::Subset s : core) core_names.push_back(braces(r.programs(), s));
  std::cout << "consistent core: " << join(core_names, " ") << "\n";
  std::cout << "inconsistent inputs (" << bad.size() << "):";
  for (std::size_t k : bad) std::cout << " " << r.inputs()[k];
  std::cout << "\n";
  if (o.betti) {
    std::cout << "betti:";
    for (std::size_t b : betti) std::cout << " " << b;
    std::cout << "\n";
  }
  return 0;
}

struct DistillOpts {
  RelationArg rel;
  std::string out;
  std::string relation_out;
};

int cmd_distill(const DistillOpts& o) {
  const tdt::Relation r = o.rel.load();
  const tdt::DistillTrace trace = tdt::distill(r);
  const tdt::Relation kept = tdt::restrict_programs(r, trace.final_programs);

  Outputs outs;
  outs.add(o.out, tdt::trace_to_json(trace));
  outs.add(o.relation_out, tdt::relation_to_json(kept));
  outs.commit();

  for (const auto& s : trace.initial_removals) {
    std::cout << "screened out " << s.name << " (accepts " << s.accepts << ", rejects "
              << s.rejects << ")\n";
  }
  for (const auto& step : trace.steps) {
    std::cout << "deficient " << braces(r.programs(), step.region) << " below "
              << braces(r.programs(), step.face) << ": removed " << r.programs()[step.removed]
              << "\n";
  }
  std::cout << "final programs: " << braces(r.programs(), trace.final_programs) << "\n";
  return 0;
}

struct ScoreOpts {
  RelationArg rel;
  std::size_t min_size = 2;
  std::string mode = "subsets";
  std::size_t workers = 1;
  std::string out;
  std::string hist;
  std::optional<std::uint64_t> split_at;
  std::string below;
  std::string above;
};

int cmd_score(const ScoreOpts& o) {
  if ((!o.below.empty() || !o.above.empty()) && !o.split_at) {
    throw tdt::ArgumentError("--below/--above need --split-at");
  }
  const tdt::Relation r = o.rel.load();
  const tdt::ScoreVector scores =
      tdt::inconsistency_scores(r, o.min_size, parse_mode(o.mode), o.workers);

  Outputs outs;
  outs.add(o.out, tdt::scores_to_csv(r, scores));
  outs.add(o.hist, tdt::histogram_to_csv(scores));
  std::vector<std::size_t> low;
  std::vector<std::size_t> high;
  if (o.split_at) {
    for (std::size_t k = 0; k < r.input_count(); ++k) {
      (scores.scores[k] < *o.split_at ? low : high).push_back(k);
    }
    if (!o.below.empty()) {
      outs.add(o.below, relation_in_format(tdt::restrict_inputs(r, low), "", o.below));
    }
    if (!o.above.empty()) {
      outs.add(o.above, relation_in_format(tdt::restrict_inputs(r, high), "", o.above));
    }
  }
  outs.commit();

  std::uint64_t max_score = 0;
  std::size_t flagged = 0;
  for (std::uint64_t s : scores.scores) {
    max_score = std::max(max_score, s);
    flagged += s != 0 ? 1 : 0;
  }
  std::cout << "scored " << r.input_count() << " inputs over " << scores.sweep_size
            << (o.mode == "pairs" ? " pairs" : " subsets") << "; " << flagged
            << " with positive score, max " << max_score << "\n";
  if (o.split_at) {
    std::cout << "score < " << *o.split_at << ": " << low.size() << ", score >= " << *o.split_at
              << ": " << high.size() << "\n";
  }
  return 0;
}

struct SelectOpts {
  RelationArg rel;
  std::uint64_t threshold = 0;
  std::string out;
  std::string relation_out;
};

int cmd_select(const SelectOpts& o) {
  const tdt::Relation r = o.rel.load();
  const tdt::Selection s = tdt::select_inputs(r, o.threshold);

  Outputs outs;
  outs.add(o.out, tdt::selection_to_json(r, s));
  outs.add(o.relation_out, tdt::relation_to_json(tdt::restrict_inputs(r, s.kept)));
  outs.commit();

  std::cout << "kept " << s.kept.size() << " / " << r.input_count() << "\n";
  for (const auto& c : s.candidates) {
    std::cout << "  threshold " << c.threshold << ": excludes " << c.excluded << ", "
              << c.components << " component" << (c.components == 1 ? "" : "s") << "\n";
  }
  return 0;
}

struct SheafOpts {
  RelationArg rel;
  std::string sigma;
  std::string out;
};

int cmd_sheaf(const SheafOpts& o) {
  const tdt::Relation r = o.rel.load();
  const tdt::Subset sigma = tdt::parse_subset(r, o.sigma);
  if (sigma.empty()) throw tdt::ArgumentError("--sigma must name at least one program");
  const tdt::SheafAssignment a = tdt::build_assignment(r);
  const std::string report = tdt::sheaf_to_json(r, a, sigma);

  Outputs outs;
  outs.add(o.out, report);
  outs.commit();

  std::cout << "sigma " << braces(r.programs(), sigma) << ": "
            << (tdt::consistency_at(a, sigma) ? "consistent" : "inconsistent") << "\n";
  std::cout << "display vector:";
  for (std::uint64_t v : tdt::display_vector(r, sigma)) std::cout << " " << v;
  std::cout << "\n";
  return 0;
}

struct FeaturesOpts {
  RelationArg rel;
  std::string features;
  std::optional<std::size_t> max_r;
  bool strict = false;
  std::size_t rounds = 0;
  std::string out;
};

int cmd_features(const FeaturesOpts& o) {
  const tdt::Relation r = o.rel.load();
  const tdt::FeatureRelation s = tdt::load_feature_relation(o.features);
  const tdt::FeatureAttribution a = tdt::b_sets(r, s, o.max_r, o.strict);
  const std::vector<tdt::PruningRound> pruning =
      o.rounds != 0 ? tdt::greedy_feature_pruning(r, s, o.rounds, o.max_r, o.strict)
                    : std::vector<tdt::PruningRound>{};

  Outputs outs;
  outs.add(o.out, tdt::attribution_to_json(s, a, pruning));
  outs.commit();

  for (std::size_t level = 0; level < a.b_sets.size(); ++level) {
    std::vector<std::string> names;
    for (std::size_t l : a.b_sets[level]) names.push_back(s.features()[l]);
    std::cout << "B_" << level << ": {" << join(names) << "}\n";
  }
  std::size_t unassigned = 0;
  for (const auto& st : a.stratum) unassigned += st ? 0 : 1;
  std::cout << "features without stratum: " << unassigned << " / " << s.feature_count() << "\n";
  for (std::size_t i = 0; i < pruning.size(); ++i) {
    std::cout << "round " << i + 1 << ": removed " << s.features()[pruning[i].feature]
              << ", vi " << pruning[i].vi << "\n";
  }
  return 0;
}

struct ClassifyOpts {
  RelationArg rel;
  std::optional<std::size_t> vote;
  std::optional<std::int64_t> below;
  std::int64_t equal = -1;
  std::size_t min_size = 2;
  std::string mode = "subsets";
  std::string truth;
  std::string out;
};

int cmd_classify(const ClassifyOpts& o) {
  if (o.vote.has_value() == o.below.has_value()) {
    throw tdt::ArgumentError("give exactly one of --vote or --score-below");
  }
  const tdt::Relation r = o.rel.load();
  std::optional<tdt::GroundTruth> truth;
  if (!o.truth.empty()) truth = tdt::load_ground_truth(o.truth, r.inputs());
  std::vector<std::size_t> flagged;
  if (o.vote) {
    flagged = tdt::vote_classifier(r, *o.vote);
  } else {
    const auto scores = tdt::inconsistency_scores(r, o.min_size, parse_mode(o.mode));
    flagged = tdt::score_rule_classifier(scores, *o.below, o.equal);
  }

  std::string report;
  std::optional<tdt::ClassifierReport> eval;
  if (truth) {
    eval = tdt::evaluate(flagged, *truth);
    report = tdt::report_to_json(*eval, r.inputs());
  } else {
    json doc;
    doc["flagged"] = json::array();
    for (std::size_t k : flagged) doc["flagged"].push_back(r.inputs()[k]);
    report = doc.dump(2) + "\n";
  }
  Outputs outs;
  outs.add(o.out, report);
  outs.commit();

  std::cout << "flagged " << flagged.size() << " / " << r.input_count() << "\n";
  if (eval) {
    auto show = [](const std::optional<tdt::Ratio>& v) {
      if (!v) return std::string("undefined");
      std::ostringstream s;
      s << v->to_string() << " (" << v->value() << ")";
      return s.str();
    };
    std::cout << "tp " << eval->true_positives << ", fp " << eval->false_positives << ", fn "
              << eval->false_negatives << ", tn " << eval->true_negatives << "\n";
    std::cout << "precision " << show(eval->precision) << "\nrecall " << show(eval->recall)
              << "\nf1 " << show(eval->f1) << "\n";
  }
  return 0;
}

struct ExportOpts {
  RelationArg rel;
  std::string out;
  std::string format = "pgm";
};

int cmd_export(const ExportOpts& o) {
  const tdt::Relation r = o.rel.load();
  Outputs outs;
  outs.add(o.out, relation_in_format(r, o.format, o.out));
  outs.commit();
  std::cout << "wrote " << o.format << " for " << r.program_count() << " x " << r.input_count()
            << " relation to " << o.out << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Topological differential testing of program ensembles"};
  app.require_subcommand(1);
  std::function<int()> action;

  RunOpts run;
  auto* c_run = app.add_subcommand("run", "Run parsers over a corpus");
  c_run->add_option("--config", run.config, "Run config JSON")->required()->check(CLI::ExistingFile);
  c_run->add_option("--out", run.out, "Relation JSON output")->required();
  c_run->add_option("--store", run.store, "JSONL result store (default: <out>.jsonl)");
  c_run->add_option("--keywords", run.keywords, "Keyword table CSV output");
  c_run->add_option("--parallelism", run.parallelism, "Override config parallelism")
      ->check(CLI::PositiveNumber);
  c_run->callback([&] { action = [&] { return cmd_run(run); }; });

  AnalyzeOpts analyze;
  auto* c_analyze = app.add_subcommand("analyze", "Diagram, Dowker graph, core and homology");
  analyze.rel.attach(c_analyze);
  c_analyze->add_option("--out", analyze.out, "JSON report");
  c_analyze->add_option("--dot", analyze.dot, "Dowker graph in DOT");
  c_analyze->add_option("--inconsistent", analyze.inconsistent, "Inconsistent input ids, one per line");
  c_analyze->add_option("--betti", analyze.betti, "Compute Betti numbers up to this dimension");
  c_analyze->add_option("--face-budget", analyze.face_budget, "Face enumeration limit for homology")
      ->check(CLI::PositiveNumber);
  c_analyze->callback([&] { action = [&] { return cmd_analyze(analyze); }; });

  DistillOpts dist;
  auto* c_distill = app.add_subcommand("distill", "Find a consistent program subset");
  dist.rel.attach(c_distill);
  c_distill->add_option("--out", dist.out, "Trace JSON");
  c_distill->add_option("--relation-out", dist.relation_out, "Relation restricted to the survivors");
  c_distill->callback([&] { action = [&] { return cmd_distill(dist); }; });

  ScoreOpts score;
  auto* c_score = app.add_subcommand("score", "Per-input inconsistency scores");
  score.rel.attach(c_score);
  c_score->add_option("--min-size", score.min_size, "Smallest swept subset size");
  c_score->add_option("--mode", score.mode, "Scoring mode")
      ->check(CLI::IsMember({"subsets", "pairs"}));
  c_score->add_option("--workers", score.workers, "Threads for the sweep")
      ->check(CLI::PositiveNumber);
  c_score->add_option("--out", score.out, "scores CSV (input,score)");
  c_score->add_option("--hist", score.hist, "histogram CSV (score,count)");
  c_score->add_option("--split-at", score.split_at, "Score threshold for restricted relations");
  c_score->add_option("--below", score.below, "Relation of inputs scoring below --split-at");
  c_score->add_option("--above", score.above, "Relation of inputs scoring at least --split-at");
  c_score->callback([&] { action = [&] { return cmd_score(score); }; });

  SelectOpts sel;
  auto* c_select = app.add_subcommand("select", "Keep inputs whose region weight reaches a threshold");
  sel.rel.attach(c_select);
  c_select->add_option("--threshold", sel.threshold, "Region weight threshold")->required();
  c_select->add_option("--out", sel.out, "Selection JSON");
  c_select->add_option("--relation-out", sel.relation_out, "Relation restricted to kept inputs");
  c_select->callback([&] { action = [&] { return cmd_select(sel); }; });

  SheafOpts sheaf;
  auto* c_sheaf = app.add_subcommand("sheaf", "Stalk consistency and display vector at a simplex");
  sheaf.rel.attach(c_sheaf);
  c_sheaf->add_option("--sigma", sheaf.sigma, "Comma-separated program names")->required();
  c_sheaf->add_option("--out", sheaf.out, "JSON report");
  c_sheaf->callback([&] { action = [&] { return cmd_sheaf(sheaf); }; });

  FeaturesOpts feat;
  auto* c_features = app.add_subcommand("features", "Attribute inconsistency to input features");
  feat.rel.attach(c_features);
  c_features->add_option("--features", feat.features, "Feature CSV")->required()->check(CLI::ExistingFile);
  c_features->add_option("--max-r", feat.max_r, "Largest number of removed programs");
  c_features->add_flag("--strict", feat.strict, "Use the strict relation product");
  c_features->add_option("--rounds", feat.rounds, "Greedy pruning rounds");
  c_features->add_option("--out", feat.out, "JSON report");
  c_features->callback([&] { action = [&] { return cmd_features(feat); }; });

  ClassifyOpts cls;
  auto* c_classify = app.add_subcommand("classify", "Flag non-compliant inputs and evaluate");
  cls.rel.attach(c_classify);
  c_classify->add_option("--vote", cls.vote, "Flag inputs with at least this many rejections");
  c_classify->add_option("--score-below", cls.below, "Flag inputs scoring below this");
  c_classify->add_option("--score-equal", cls.equal, "Also flag inputs scoring exactly this (-1: off)");
  c_classify->add_option("--min-size", cls.min_size, "Smallest swept subset size");
  c_classify->add_option("--mode", cls.mode, "Scoring mode")->check(CLI::IsMember({"subsets", "pairs"}));
  c_classify->add_option("--truth", cls.truth, "Ground-truth CSV (input,compliant)")
      ->check(CLI::ExistingFile);
  c_classify->add_option("--out", cls.out, "JSON report");
  c_classify->callback([&] { action = [&] { return cmd_classify(cls); }; });

  ExportOpts exp;
  auto* c_export = app.add_subcommand("export-pgm", "Write the relation as an image or convert it");
  exp.rel.attach(c_export);
  c_export->add_option("--out", exp.out, "Output file")->required();
  c_export->add_option("--format", exp.format, "Output format")
      ->check(CLI::IsMember({"pgm", "json", "csv"}));
  c_export->callback([&] { action = [&] { return cmd_export(exp); }; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitUsage;
  }

  try {
    return action();
  } catch (const tdt::ValidationError& e) {
    std::cerr << "tdt: " << e.what() << "\n";
    return kExitUsage;
  } catch (const tdt::FormatError& e) {
    std::cerr << "tdt: " << e.what() << "\n";
    return kExitUsage;
  } catch (const tdt::ArgumentError& e) {
    std::cerr << "tdt: " << e.what() << "\n";
    return kExitUsage;
  } catch (const tdt::ConfigError& e) {
    std::cerr << "tdt: " << e.what() << "\n";
    return kExitUsage;
  } catch (const tdt::CapacityError& e) {
    std::cerr << "tdt: " << e.what() << "\n";
    return kExitUsage;
  } catch (const tdt::PreconditionError& e) {
    std::cerr << "tdt: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "tdt: " << e.what() << "\n";
    return kExitRuntime;
  }
}
