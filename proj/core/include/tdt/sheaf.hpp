#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "tdt/relation.hpp"
#include "tdt/subset.hpp"

namespace tdt {

/// Largest program count for which build_assignment materializes every stalk
/// (3^m counts in total).
inline constexpr std::size_t kMaxSheafPrograms = 16;

/// Per-simplex acceptance-pattern counts over the full simplex of programs.
/// stalk(sigma)[z] counts the inputs whose accept-set intersected with sigma
/// is the pattern z, where z is expressed in sigma's compressed coordinates
/// (bit i = i-th member of sigma).
class SheafAssignment {
 public:
  explicit SheafAssignment(std::vector<std::string> programs);

  std::size_t program_count() const { return programs_.size(); }
  const std::vector<std::string>& programs() const { return programs_; }

  /// Simplices carrying a stalk, ascending by (size, bits).
  std::vector<Subset> base() const;
  bool has(Subset sigma) const { return stalks_.count(sigma) != 0; }

  /// Throws ArgumentError when sigma has no stalk.
  const std::vector<std::uint64_t>& stalk(Subset sigma) const;

  /// Count for the pattern given in full program coordinates.
  std::uint64_t count(Subset sigma, Subset pattern) const;

  /// Installs a stalk; size must be 2^|sigma|.
  void set_stalk(Subset sigma, std::vector<std::uint64_t> counts);

 private:
  std::vector<std::string> programs_;
  std::map<Subset, std::vector<std::uint64_t>> stalks_;
};

/// Coarsening map from a stalk over `from` to one over `to` (subset of from).
std::vector<std::uint64_t> restrict_section(const std::vector<std::uint64_t>& counts,
                                            Subset from, Subset to);

/// Canonical assignment of r on every nonempty program subset.
SheafAssignment build_assignment(const Relation& r);

/// True iff every coface stalk restricts to sigma's stalk and that stalk,
/// read as a diagram over sigma, is consistent.
bool consistency_at(const SheafAssignment& a, Subset sigma);

/// Exact region counts over all regions Z meeting sigma, ordered by
/// (|Z & sigma|, |Z|, bits).
std::vector<std::uint64_t> display_vector(const Relation& r, Subset sigma);

/// {"consistent": b, "display": [...], "sigma": [...], "stalk": {...}}.
std::string sheaf_to_json(const Relation& r, const SheafAssignment& a, Subset sigma);

}  // namespace tdt
