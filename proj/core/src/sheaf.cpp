#include "tdt/sheaf.hpp"

#include <algorithm>

#include "json.hpp"
#include "tdt/diagram.hpp"
#include "tdt/error.hpp"

namespace tdt {

SheafAssignment::SheafAssignment(std::vector<std::string> programs)
    : programs_(std::move(programs)) {
  if (programs_.size() > Subset::kMaxElements) {
    throw CapacityError("sheaf assignment supports at most 64 programs");
  }
}

std::vector<Subset> SheafAssignment::base() const {
  std::vector<Subset> out;
  for (const auto& entry : stalks_) out.push_back(entry.first);
  std::sort(out.begin(), out.end(), BySizeThenBits{});
  return out;
}

const std::vector<std::uint64_t>& SheafAssignment::stalk(Subset sigma) const {
  const auto it = stalks_.find(sigma);
  if (it == stalks_.end()) throw ArgumentError("simplex is not in the sheaf's base");
  return it->second;
}

std::uint64_t SheafAssignment::count(Subset sigma, Subset pattern) const {
  if (!pattern.is_subset_of(sigma)) throw ArgumentError("pattern is not inside sigma");
  return stalk(sigma)[compress_bits(pattern.bits(), sigma.bits())];
}

void SheafAssignment::set_stalk(Subset sigma, std::vector<std::uint64_t> counts) {
  if (sigma.empty() || !sigma.is_subset_of(Subset::full(programs_.size()))) {
    throw ArgumentError("stalk simplex must be a nonempty program subset");
  }
  if (sigma.size() >= 63 || counts.size() != (std::size_t{1} << sigma.size())) {
    throw ValidationError("stalk size must be 2^|sigma|");
  }
  stalks_[sigma] = std::move(counts);
}

std::vector<std::uint64_t> restrict_section(const std::vector<std::uint64_t>& counts,
                                            Subset from, Subset to) {
  if (!to.is_subset_of(from)) throw ArgumentError("restriction target is not a face");
  std::vector<std::uint64_t> out(std::size_t{1} << to.size(), 0);
  for (std::size_t z = 0; z < counts.size(); ++z) {
    const std::uint64_t full = expand_bits(z, from.bits());
    out[compress_bits(full & to.bits(), to.bits())] += counts[z];
  }
  return out;
}

SheafAssignment build_assignment(const Relation& r) {
  if (r.program_count() > kMaxSheafPrograms) {
    throw CapacityError("build_assignment: " + std::to_string(r.program_count()) +
                        " programs exceeds the limit of " +
                        std::to_string(kMaxSheafPrograms));
  }
  SheafAssignment a(r.programs());
  const WeightedDiagram d = build_diagram(r);
  const Subset all = Subset::full(r.program_count());
  for (std::uint64_t x = 1; x <= all.bits(); ++x) {
    a.set_stalk(Subset(x), restrict_section({d.weights().begin(), d.weights().end()}, all,
                                            Subset(x)));
  }
  return a;
}

bool consistency_at(const SheafAssignment& a, Subset sigma) {
  const auto& own = a.stalk(sigma);
  for (Subset tau : a.base()) {
    if (tau == sigma || !sigma.is_subset_of(tau)) continue;
    if (restrict_section(a.stalk(tau), tau, sigma) != own) return false;
  }
  return is_consistent(WeightedDiagram(sigma.size(), own));
}

std::vector<std::uint64_t> display_vector(const Relation& r, Subset sigma) {
  const WeightedDiagram d = build_diagram(r);
  std::vector<Subset> regions;
  for (std::size_t x = 1; x < d.region_count(); ++x) {
    if (!(Subset(x) & sigma).empty()) regions.emplace_back(x);
  }
  std::sort(regions.begin(), regions.end(), [&](Subset a, Subset b) {
    const std::size_t ia = (a & sigma).size();
    const std::size_t ib = (b & sigma).size();
    if (ia != ib) return ia < ib;
    if (a.size() != b.size()) return a.size() < b.size();
    return a.bits() < b.bits();
  });
  std::vector<std::uint64_t> out;
  out.reserve(regions.size());
  for (Subset z : regions) out.push_back(d.weight(z));
  return out;
}

std::string sheaf_to_json(const Relation& r, const SheafAssignment& a, Subset sigma) {
  nlohmann::json doc;
  nlohmann::json names = nlohmann::json::array();
  for (std::size_t j : sigma.members()) names.push_back(r.programs().at(j));
  nlohmann::json stalk = nlohmann::json::object();
  const auto& counts = a.stalk(sigma);
  for (std::size_t z = 0; z < counts.size(); ++z) {
    stalk[region_key(r.programs(), Subset(expand_bits(z, sigma.bits())))] = counts[z];
  }
  doc["sigma"] = std::move(names);
  doc["stalk"] = std::move(stalk);
  doc["consistent"] = consistency_at(a, sigma);
  doc["display"] = display_vector(r, sigma);
  return doc.dump(2) + "\n";
}

}  // namespace tdt
