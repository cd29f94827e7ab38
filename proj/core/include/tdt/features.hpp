#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "tdt/relation.hpp"
#include "tdt/subset.hpp"

namespace tdt {

/// Per-feature indicator: every input in `inconsistent` has the feature; with
/// `strict`, additionally no other input has it. Empty conjunctions are true.
std::vector<bool> relation_product(const FeatureRelation& s,
                                   std::span<const std::size_t> inconsistent,
                                   bool strict);

/// relation_product over the inconsistent inputs of r restricted to
/// `programs`. Throws ValidationError unless s and r list the same inputs.
std::vector<bool> relation_product(const Relation& r, const FeatureRelation& s,
                                   Subset programs, bool strict);

struct FeatureAttribution {
  std::size_t max_r = 0;
  bool strict = false;
  /// b_sets[r] = features l with RS(X, l) for every X of size m - r.
  std::vector<std::vector<std::size_t>> b_sets;
  /// Smallest r with l in b_sets[r], or nullopt when unassigned.
  std::vector<std::optional<std::size_t>> stratum;
  /// Whether the raw b_sets happen to be pairwise disjoint and cover [p].
  bool raw_sets_partition = false;
};

/// `max_r` truncates r to [0, max_r]; defaults to m - 1.
FeatureAttribution b_sets(const Relation& r, const FeatureRelation& s,
                          std::optional<std::size_t> max_r = std::nullopt,
                          bool strict = false);

/// Partition of a finite ground set of element ids.
class Partition {
 public:
  /// Blocks must be pairwise disjoint; empty blocks are dropped.
  static Partition from_blocks(const std::vector<std::vector<std::size_t>>& blocks);
  /// Element i (0-based) belongs to block labels[i].
  static Partition from_labels(std::span<const std::size_t> labels);

  const std::vector<std::size_t>& ground() const { return ground_; }
  /// Block id of ground()[i]; ids are 0..block_count()-1 in first-seen order.
  const std::vector<std::size_t>& labels() const { return labels_; }
  std::size_t block_count() const { return block_count_; }

 private:
  Partition(std::vector<std::size_t> ground, std::vector<std::size_t> labels);

  std::vector<std::size_t> ground_;
  std::vector<std::size_t> labels_;
  std::size_t block_count_ = 0;
};

/// Shannon entropy in bits.
double entropy(const Partition& p);

/// H(P) + H(Q) - 2 I(P; Q) in bits. Throws ValidationError when the ground
/// sets differ or are empty.
double variation_of_information(const Partition& p, const Partition& q);

/// Features grouped by stratum; unassigned features share one block.
Partition stratification_partition(const FeatureAttribution& a);

struct PruningRound {
  std::size_t feature = 0;
  double vi = 0.0;
};

/// Each round clears one remaining feature (on every input), choosing the one
/// whose clearing moves the feature stratification least in variation of
/// information; ties go to the lowest feature index.
std::vector<PruningRound> greedy_feature_pruning(
    const Relation& r, const FeatureRelation& s, std::size_t rounds,
    std::optional<std::size_t> max_r = std::nullopt, bool strict = false);

std::string attribution_to_json(const FeatureRelation& s, const FeatureAttribution& a,
                                const std::vector<PruningRound>& pruning);

}  // namespace tdt
