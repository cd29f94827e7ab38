#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "tdt/distill.hpp"
#include "tdt/ratio.hpp"
#include "tdt/relation.hpp"

namespace tdt {

/// Adjudicated labels, aligned with a relation's inputs.
struct GroundTruth {
  std::vector<bool> compliant;
};

/// Reads "input,compliant" CSV rows and aligns them to `inputs`. Every input
/// must appear exactly once.
GroundTruth parse_ground_truth_csv(std::string_view text,
                                   const std::vector<std::string>& inputs);
GroundTruth load_ground_truth(const std::filesystem::path& path,
                              const std::vector<std::string>& inputs);

/// Inputs rejected by at least `reject_threshold` programs (1 <= k <= m).
std::vector<std::size_t> vote_classifier(const Relation& r, std::size_t reject_threshold);

/// Inputs whose score is below `below` or equal to `equal`. A negative
/// `equal` disables the equality clause.
std::vector<std::size_t> score_rule_classifier(const ScoreVector& scores,
                                               std::int64_t below, std::int64_t equal);

/// Positive class is non-compliant.
struct ClassifierReport {
  std::vector<bool> predicted;  // true = flagged non-compliant
  std::size_t true_positives = 0;
  std::size_t false_positives = 0;
  std::size_t false_negatives = 0;
  std::size_t true_negatives = 0;
  std::optional<Ratio> precision;
  std::optional<Ratio> recall;
  std::optional<Ratio> f1;
};

ClassifierReport evaluate(std::span<const std::size_t> predicted,
                          const GroundTruth& truth);

/// Metrics rendered as "num/den" and as decimals; undefined ones as null.
std::string report_to_json(const ClassifierReport& report,
                           const std::vector<std::string>& inputs);

}  // namespace tdt
