#include "tdt/classify.hpp"

#include <unordered_map>

#include "json.hpp"
#include "tdt/error.hpp"

namespace tdt {

GroundTruth parse_ground_truth_csv(std::string_view text,
                                   const std::vector<std::string>& inputs) {
  std::unordered_map<std::string, std::size_t> index;
  for (std::size_t k = 0; k < inputs.size(); ++k) index.emplace(inputs[k], k);
  std::vector<int> seen(inputs.size(), -1);
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start < text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(start, end - start);
    start = end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) continue;
    const std::size_t comma = line.find(',');
    if (comma == std::string_view::npos || line.find(',', comma + 1) != std::string_view::npos) {
      throw FormatError("ground truth line " + std::to_string(line_no) +
                        ": expected 'input,compliant'");
    }
    const std::string name(line.substr(0, comma));
    const std::string_view value = line.substr(comma + 1);
    if (line_no == 1 && name == "input") continue;
    if (value != "0" && value != "1") {
      throw FormatError("ground truth line " + std::to_string(line_no) +
                        ": compliant must be 0 or 1");
    }
    const auto it = index.find(name);
    if (it == index.end()) {
      throw ValidationError("ground truth names unknown input '" + name + "'");
    }
    if (seen[it->second] != -1) {
      throw ValidationError("ground truth repeats input '" + name + "'");
    }
    seen[it->second] = value == "1" ? 1 : 0;
  }
  GroundTruth truth;
  for (std::size_t k = 0; k < inputs.size(); ++k) {
    if (seen[k] == -1) throw ValidationError("ground truth misses input '" + inputs[k] + "'");
    truth.compliant.push_back(seen[k] == 1);
  }
  return truth;
}

GroundTruth load_ground_truth(const std::filesystem::path& path,
                              const std::vector<std::string>& inputs) {
  return parse_ground_truth_csv(read_file(path), inputs);
}

std::vector<std::size_t> vote_classifier(const Relation& r, std::size_t reject_threshold) {
  if (reject_threshold < 1 || reject_threshold > r.program_count()) {
    throw ArgumentError("vote_classifier: threshold must be in [1, m]");
  }
  std::vector<std::size_t> out;
  for (std::size_t k = 0; k < r.input_count(); ++k) {
    std::size_t rejects = 0;
    for (std::size_t j = 0; j < r.program_count(); ++j) {
      if (!r.accepts(j, k)) ++rejects;
    }
    if (rejects >= reject_threshold) out.push_back(k);
  }
  return out;
}

std::vector<std::size_t> score_rule_classifier(const ScoreVector& scores,
                                               std::int64_t below, std::int64_t equal) {
  std::vector<std::size_t> out;
  for (std::size_t k = 0; k < scores.scores.size(); ++k) {
    const auto s = static_cast<std::int64_t>(scores.scores[k]);
    if (s < below || (equal >= 0 && s == equal)) out.push_back(k);
  }
  return out;
}

ClassifierReport evaluate(std::span<const std::size_t> predicted,
                          const GroundTruth& truth) {
  ClassifierReport rep;
  rep.predicted.assign(truth.compliant.size(), false);
  for (std::size_t k : predicted) {
    if (k >= truth.compliant.size()) {
      throw ValidationError("prediction index " + std::to_string(k) +
                            " is outside the ground truth");
    }
    rep.predicted[k] = true;
  }
  for (std::size_t k = 0; k < truth.compliant.size(); ++k) {
    const bool positive = !truth.compliant[k];
    if (rep.predicted[k] && positive) ++rep.true_positives;
    if (rep.predicted[k] && !positive) ++rep.false_positives;
    if (!rep.predicted[k] && positive) ++rep.false_negatives;
    if (!rep.predicted[k] && !positive) ++rep.true_negatives;
  }
  const std::size_t tp = rep.true_positives;
  if (tp + rep.false_positives > 0) rep.precision = Ratio(tp, tp + rep.false_positives);
  if (tp + rep.false_negatives > 0) rep.recall = Ratio(tp, tp + rep.false_negatives);
  // 2PR/(P+R) = 2TP/(2TP+FP+FN); undefined when P or R is, or P+R = 0.
  if (rep.precision && rep.recall && tp > 0) {
    rep.f1 = Ratio(2 * tp, 2 * tp + rep.false_positives + rep.false_negatives);
  }
  return rep;
}

std::string report_to_json(const ClassifierReport& report,
                           const std::vector<std::string>& inputs) {
  using nlohmann::json;
  auto metric = [](const std::optional<Ratio>& r) {
    if (!r) return json(nullptr);
    return json{{"exact", r->to_string()}, {"value", r->value()}};
  };
  json doc;
  doc["counts"] = {{"tp", report.true_positives},
                   {"fp", report.false_positives},
                   {"fn", report.false_negatives},
                   {"tn", report.true_negatives}};
  doc["precision"] = metric(report.precision);
  doc["recall"] = metric(report.recall);
  doc["f1"] = metric(report.f1);
  json flagged = json::array();
  for (std::size_t k = 0; k < report.predicted.size(); ++k) {
    if (report.predicted[k]) flagged.push_back(k < inputs.size() ? inputs[k] : std::to_string(k));
  }
  doc["flagged"] = std::move(flagged);
  return doc.dump(2) + "\n";
}

}  // namespace tdt
