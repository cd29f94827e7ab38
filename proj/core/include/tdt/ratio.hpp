#pragma once

#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <string>

namespace tdt {

/// Exact non-negative fraction kept in lowest terms. The denominator is
/// never zero; callers represent undefined quantities with std::optional.
class Ratio {
 public:
  constexpr Ratio(std::uint64_t num, std::uint64_t den) : num_(num), den_(den) {
    if (den_ == 0) throw std::invalid_argument("Ratio: zero denominator");
    const std::uint64_t g = std::gcd(num_, den_);
    if (g > 1) {
      num_ /= g;
      den_ /= g;
    }
  }

  constexpr std::uint64_t numerator() const { return num_; }
  constexpr std::uint64_t denominator() const { return den_; }
  constexpr double value() const {
    return static_cast<double>(num_) / static_cast<double>(den_);
  }

  /// "num/den" form, e.g. "11/12".
  std::string to_string() const {
    return std::to_string(num_) + "/" + std::to_string(den_);
  }

  friend constexpr bool operator==(const Ratio&, const Ratio&) = default;

 private:
  std::uint64_t num_;
  std::uint64_t den_;
};

}  // namespace tdt
