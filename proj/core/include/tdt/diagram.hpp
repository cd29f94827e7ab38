#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "tdt/relation.hpp"
#include "tdt/subset.hpp"

namespace tdt {

/// Exact region weights over the power set of m programs: weight(X) is the
/// number of inputs whose accept-set is exactly X.
class WeightedDiagram {
 public:
  /// `weights` must have 2^program_count entries indexed by subset bits.
  WeightedDiagram(std::size_t program_count, std::vector<std::uint64_t> weights);

  std::size_t program_count() const { return program_count_; }
  std::size_t region_count() const { return weights_.size(); }
  std::uint64_t weight(Subset region) const { return weights_[region.bits()]; }
  std::span<const std::uint64_t> weights() const { return weights_; }

  /// Sum of all region weights (the corpus size).
  std::uint64_t total() const;

  friend bool operator==(const WeightedDiagram&, const WeightedDiagram&) = default;

 private:
  std::size_t program_count_;
  std::vector<std::uint64_t> weights_;
};

WeightedDiagram build_diagram(const Relation& r);

/// Diagram of the programs in `keep` alone, in the compressed coordinates
/// of `keep` (bit i is the i-th member). Equivalent to
/// build_diagram(restrict_programs(r, keep)) without touching the relation.
WeightedDiagram coarsen_diagram(const WeightedDiagram& d, Subset keep);

/// Largest weight among the facets of `region` (one element fewer). Zero
/// for the empty region.
std::uint64_t max_facet_weight(const WeightedDiagram& d, Subset region);

/// Regions lighter than one of their facets, ascending by (size, bits).
/// The empty region is never deficient.
std::vector<Subset> deficient_regions(const WeightedDiagram& d);

/// True iff no region is deficient (weights are order preserving).
bool is_consistent(const WeightedDiagram& d);

/// Inputs accepted by all of sigma and rejected by some program of
/// tau \ sigma, provided weight(sigma) > weight(tau); otherwise empty.
/// Throws ArgumentError unless sigma is a subset of tau.
std::vector<std::size_t> pair_inconsistent_inputs(const Relation& r, Subset sigma,
                                                  Subset tau);

/// Overload reusing an already built diagram of `r`.
std::vector<std::size_t> pair_inconsistent_inputs(const Relation& r,
                                                  const WeightedDiagram& d,
                                                  Subset sigma, Subset tau);

/// Region label used in JSON reports: member names sorted and joined by ','.
std::string region_key(const std::vector<std::string>& programs, Subset region);

/// {"consistent": bool, "deficient": [[names...]...], "weights": {key: n}}.
std::string diagram_report_json(const WeightedDiagram& d,
                                const std::vector<std::string>& programs);

}  // namespace tdt
