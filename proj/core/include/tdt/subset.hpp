#pragma once

#include <bit>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <vector>

namespace tdt {

/// A subset of {0, ..., 63} stored as a bitmask. Bit j is set iff element j
/// belongs to the subset. Used for program subsets (regions, faces) and for
/// vertex sets of dual complexes.
class Subset {
 public:
  static constexpr std::size_t kMaxElements = 64;

  constexpr Subset() = default;
  constexpr explicit Subset(std::uint64_t bits) : bits_(bits) {}

  static constexpr Subset full(std::size_t count) {
    return Subset(count >= kMaxElements ? ~std::uint64_t{0}
                                        : (std::uint64_t{1} << count) - 1);
  }
  static constexpr Subset singleton(std::size_t j) {
    return Subset(std::uint64_t{1} << j);
  }

  constexpr std::uint64_t bits() const { return bits_; }
  constexpr std::size_t size() const {
    return static_cast<std::size_t>(std::popcount(bits_));
  }
  constexpr bool empty() const { return bits_ == 0; }
  constexpr bool contains(std::size_t j) const {
    return ((bits_ >> j) & 1U) != 0;
  }
  constexpr bool is_subset_of(Subset other) const {
    return (bits_ & ~other.bits_) == 0;
  }
  constexpr Subset with(std::size_t j) const {
    return Subset(bits_ | (std::uint64_t{1} << j));
  }
  constexpr Subset without(std::size_t j) const {
    return Subset(bits_ & ~(std::uint64_t{1} << j));
  }

  /// Element indices in ascending order.
  std::vector<std::size_t> members() const {
    std::vector<std::size_t> out;
    out.reserve(size());
    for (std::uint64_t b = bits_; b != 0; b &= b - 1) {
      out.push_back(static_cast<std::size_t>(std::countr_zero(b)));
    }
    return out;
  }

  friend constexpr Subset operator&(Subset a, Subset b) {
    return Subset(a.bits_ & b.bits_);
  }
  friend constexpr Subset operator|(Subset a, Subset b) {
    return Subset(a.bits_ | b.bits_);
  }
  /// Set difference.
  friend constexpr Subset operator-(Subset a, Subset b) {
    return Subset(a.bits_ & ~b.bits_);
  }
  friend constexpr bool operator==(Subset, Subset) = default;
  friend constexpr auto operator<=>(Subset a, Subset b) {
    return a.bits_ <=> b.bits_;
  }

 private:
  std::uint64_t bits_ = 0;
};

using ProgramSubset = Subset;

/// Strict weak order by (size, bits); the canonical order for reports.
struct BySizeThenBits {
  constexpr bool operator()(Subset a, Subset b) const {
    if (a.size() != b.size()) return a.size() < b.size();
    return a.bits() < b.bits();
  }
};

/// Gathers the bits of `value` selected by `mask` into the low bits of the
/// result, preserving order (software PEXT).
constexpr std::uint64_t compress_bits(std::uint64_t value, std::uint64_t mask) {
  std::uint64_t out = 0;
  std::uint64_t bit = 1;
  for (; mask != 0; mask &= mask - 1, bit <<= 1) {
    if ((value & mask & (~mask + 1)) != 0) out |= bit;
  }
  return out;
}

/// Inverse of compress_bits: scatters the low bits of `value` onto the set
/// bits of `mask` (software PDEP).
constexpr std::uint64_t expand_bits(std::uint64_t value, std::uint64_t mask) {
  std::uint64_t out = 0;
  for (; mask != 0; mask &= mask - 1, value >>= 1) {
    if ((value & 1U) != 0) out |= mask & (~mask + 1);
  }
  return out;
}

}  // namespace tdt
