#include "tdt/diagram.hpp"

#include <algorithm>
#include <numeric>

#include "json.hpp"
#include "tdt/error.hpp"

namespace tdt {

WeightedDiagram::WeightedDiagram(std::size_t program_count,
                                 std::vector<std::uint64_t> weights)
    : program_count_(program_count), weights_(std::move(weights)) {
  require_diagram_capacity(program_count_, "diagram");
  if (weights_.size() != (std::size_t{1} << program_count_)) {
    throw ValidationError("diagram over " + std::to_string(program_count_) +
                          " programs needs " +
                          std::to_string(std::size_t{1} << program_count_) +
                          " weights, got " + std::to_string(weights_.size()));
  }
}

std::uint64_t WeightedDiagram::total() const {
  return std::accumulate(weights_.begin(), weights_.end(), std::uint64_t{0});
}

WeightedDiagram build_diagram(const Relation& r) {
  require_diagram_capacity(r.program_count(), "build_diagram");
  std::vector<std::uint64_t> weights(std::size_t{1} << r.program_count(), 0);
  for (Subset column : r.column_sets()) ++weights[column.bits()];
  return WeightedDiagram(r.program_count(), std::move(weights));
}

WeightedDiagram coarsen_diagram(const WeightedDiagram& d, Subset keep) {
  if (!keep.is_subset_of(Subset::full(d.program_count()))) {
    throw ArgumentError("coarsen_diagram: keep set names unknown programs");
  }
  std::vector<std::uint64_t> weights(std::size_t{1} << keep.size(), 0);
  const auto all = d.weights();
  for (std::size_t x = 0; x < all.size(); ++x) {
    if (all[x] != 0) weights[compress_bits(x, keep.bits())] += all[x];
  }
  return WeightedDiagram(keep.size(), std::move(weights));
}

std::uint64_t max_facet_weight(const WeightedDiagram& d, Subset region) {
  std::uint64_t best = 0;
  for (std::size_t j : region.members()) {
    best = std::max(best, d.weight(region.without(j)));
  }
  return best;
}

std::vector<Subset> deficient_regions(const WeightedDiagram& d) {
  std::vector<Subset> out;
  for (std::size_t x = 1; x < d.region_count(); ++x) {
    const Subset region(x);
    if (d.weight(region) < max_facet_weight(d, region)) out.push_back(region);
  }
  std::sort(out.begin(), out.end(), BySizeThenBits{});
  return out;
}

bool is_consistent(const WeightedDiagram& d) {
  for (std::size_t x = 1; x < d.region_count(); ++x) {
    const Subset region(x);
    for (std::size_t j : region.members()) {
      if (d.weight(region.without(j)) > d.weight(region)) return false;
    }
  }
  return true;
}

std::vector<std::size_t> pair_inconsistent_inputs(const Relation& r, Subset sigma,
                                                  Subset tau) {
  return pair_inconsistent_inputs(r, build_diagram(r), sigma, tau);
}

std::vector<std::size_t> pair_inconsistent_inputs(const Relation& r,
                                                  const WeightedDiagram& d,
                                                  Subset sigma, Subset tau) {
  if (!sigma.is_subset_of(tau)) {
    throw ArgumentError("pair_inconsistent_inputs: sigma is not a subset of tau");
  }
  if (!tau.is_subset_of(Subset::full(r.program_count()))) {
    throw ArgumentError("pair_inconsistent_inputs: tau names unknown programs");
  }
  std::vector<std::size_t> out;
  if (d.weight(sigma) <= d.weight(tau)) return out;
  const Subset extra = tau - sigma;
  const auto& columns = r.column_sets();
  for (std::size_t k = 0; k < columns.size(); ++k) {
    if (sigma.is_subset_of(columns[k]) && !extra.is_subset_of(columns[k])) {
      out.push_back(k);
    }
  }
  return out;
}

std::string region_key(const std::vector<std::string>& programs, Subset region) {
  std::vector<std::string> names;
  for (std::size_t j : region.members()) names.push_back(programs.at(j));
  std::sort(names.begin(), names.end());
  std::string key;
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (i > 0) key += ',';
    key += names[i];
  }
  return key;
}

std::string diagram_report_json(const WeightedDiagram& d,
                                const std::vector<std::string>& programs) {
  nlohmann::json doc;
  nlohmann::json weights = nlohmann::json::object();
  for (std::size_t x = 0; x < d.region_count(); ++x) {
    weights[region_key(programs, Subset(x))] = d.weight(Subset(x));
  }
  nlohmann::json deficient = nlohmann::json::array();
  for (Subset region : deficient_regions(d)) {
    std::vector<std::string> names;
    for (std::size_t j : region.members()) names.push_back(programs.at(j));
    std::sort(names.begin(), names.end());
    deficient.push_back(names);
  }
  doc["weights"] = std::move(weights);
  doc["deficient"] = std::move(deficient);
  doc["consistent"] = is_consistent(d);
  return doc.dump(2) + "\n";
}

}  // namespace tdt
