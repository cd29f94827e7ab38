#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "tdt/relation.hpp"
#include "tdt/subset.hpp"

namespace tdt {

struct ScreenedProgram {
  std::size_t index = 0;  // in the original relation
  std::string name;
  std::size_t accepts = 0;
  std::size_t rejects = 0;
};

struct ScreenResult {
  Relation relation;  // restricted to the surviving programs
  Subset kept;        // original program indices
  std::vector<ScreenedProgram> removed;
};

/// Keeps program j iff it accepts at least as many inputs as it rejects,
/// i.e. its single-program diagram is consistent. Throws EmptyResultError
/// (listing every program's counts) if nothing survives, and
/// PreconditionError on an empty corpus.
ScreenResult singleton_screen(const Relation& r);

/// One iteration of the program-removal loop. All subsets are expressed in
/// the original relation's program indices.
struct DistillStep {
  Subset region;
  Subset face;
  std::size_t removed = 0;
};

struct DistillTrace {
  std::vector<std::string> programs;  // of the original relation
  std::vector<ScreenedProgram> initial_removals;
  std::vector<DistillStep> steps;
  Subset final_programs;
};

/// Screens singletons, then repeatedly removes one program until the
/// diagram is consistent. Deficient regions are ranked by size (largest
/// first), then deficiency (largest first), then bits (ascending); the removed
/// program is the one missing from the heaviest facet (ties by bits).
DistillTrace distill(const Relation& r);

/// {"final": [...], "screened": [...], "steps": [...]} (canonical JSON).
std::string trace_to_json(const DistillTrace& trace);

enum class ScoreMode {
  /// Count program subsets S (|S| >= floor) under whose restriction the input
  /// is inconsistent.
  subsets,
  /// Count pairs sigma < tau (sigma nonempty, |tau| >= floor) of the full
  /// diagram for which the input is pair-inconsistent.
  pairs,
};

struct ScoreVector {
  std::vector<std::uint64_t> scores;  // one per input
  ScoreMode mode = ScoreMode::subsets;
  std::size_t min_subset_size = 2;
  /// Subsets swept (subset mode) or tau sets of the swept pairs (pair mode).
  std::vector<Subset> swept;
  /// Upper bound on any score: number of subsets or pairs swept.
  std::uint64_t sweep_size = 0;
};

/// `workers` > 1 splits the subset sweep across threads; the result does not
/// depend on it.
ScoreVector inconsistency_scores(const Relation& r, std::size_t min_subset_size = 2,
                                 ScoreMode mode = ScoreMode::subsets,
                                 std::size_t workers = 1);

/// (score, count) rows for every score from 0 to the maximum.
std::vector<std::pair<std::uint64_t, std::size_t>> score_histogram(
    const ScoreVector& scores);

/// "input,score" header then one row per input.
std::string scores_to_csv(const Relation& r, const ScoreVector& scores);
/// "score,count" header then one row per histogram bin.
std::string histogram_to_csv(const ScoreVector& scores);

struct ThresholdReport {
  std::uint64_t threshold = 0;
  std::size_t excluded = 0;
  /// Components of the complex generated by regions of weight >= threshold.
  std::size_t components = 0;
};

struct Selection {
  std::uint64_t threshold = 0;
  std::vector<std::size_t> kept;
  std::vector<ThresholdReport> candidates;  // ascending threshold
};

/// Keeps inputs whose accept-set region weighs at least `threshold`.
/// Requires a consistent diagram (PreconditionError otherwise).
Selection select_inputs(const Relation& r, std::uint64_t threshold);

std::string selection_to_json(const Relation& r, const Selection& s);

}  // namespace tdt
