#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "tdt/diagram.hpp"
#include "tdt/relation.hpp"
#include "tdt/subset.hpp"

namespace tdt {

/// Face budget for homology computations.
inline constexpr std::size_t kDefaultFaceBudget = 1'000'000;

/// Abstract simplicial complex given by the downward closure of a family of
/// generating vertex sets, optionally carrying region weights.
///
/// Faces are enumerated on demand, so complexes with large facets stay cheap
/// as long as callers only ask for low-dimensional faces.
class DowkerComplex {
 public:
  DowkerComplex(std::vector<std::string> vertex_labels,
                std::vector<Subset> generators);
  DowkerComplex(std::vector<std::string> vertex_labels,
                std::vector<Subset> generators, WeightedDiagram weights);

  /// Number of vertex slots (labels); some may be isolated from every face.
  std::size_t vertex_slots() const { return labels_.size(); }
  const std::vector<std::string>& labels() const { return labels_; }

  /// Vertices belonging to at least one face.
  std::vector<std::size_t> vertices() const;

  /// Maximal faces, ascending by (size, bits).
  const std::vector<Subset>& facets() const { return facets_; }

  bool contains(Subset face) const;
  bool empty() const { return facets_.empty(); }

  /// All nonempty faces ascending by (size, bits). Throws CapacityError when
  /// there are more than `budget`.
  std::vector<Subset> faces(
      std::size_t budget = std::numeric_limits<std::size_t>::max()) const;

  /// Faces with exactly dim + 1 vertices, ascending by bits.
  std::vector<Subset> faces_of_dimension(
      std::size_t dim,
      std::size_t budget = std::numeric_limits<std::size_t>::max()) const;

  bool weighted() const { return weights_.has_value(); }
  /// Throws PreconditionError on an unweighted complex.
  const WeightedDiagram& diagram() const;
  std::uint64_t weight(Subset face) const { return diagram().weight(face); }

 private:
  std::vector<std::string> labels_;
  std::vector<Subset> facets_;
  std::optional<WeightedDiagram> weights_;
};

struct DowkerNode {
  Subset face;
  std::uint64_t weight = 0;
};

/// Covering edge superset -> subset; consistent iff weight(to) <= weight(from).
struct DowkerEdge {
  Subset from;
  Subset to;
  std::size_t removed = 0;
  bool consistent = true;
};

struct DowkerGraph {
  std::vector<std::string> labels;
  std::vector<DowkerNode> nodes;  // ascending (size, bits)
  std::vector<DowkerEdge> edges;  // by source node, then removed vertex
};

/// Weighted Dowker complex of r: faces are the nonempty program sets jointly
/// accepting at least one input.
DowkerComplex build_complex(const Relation& r);

/// Requires a weighted complex.
DowkerGraph build_graph(const DowkerComplex& c);

/// Faces all of whose internal covering edges are consistent, ascending by
/// (size, bits). Closed under taking nonempty sub-faces.
std::vector<Subset> consistent_core(const DowkerGraph& g);

/// Dense flag table over the regions of `d`: true iff the region is a
/// nonempty face of the Dowker complex lying outside the consistent core.
std::vector<bool> inconsistent_region_flags(const WeightedDiagram& d);

/// Inputs whose (nonempty) accept-set lies outside the consistent core.
std::vector<std::size_t> inconsistent_inputs(const Relation& r);

/// Same as inconsistent_inputs(restrict_programs(r, programs)), computed
/// without materializing the restriction. Indices refer to r's inputs.
std::vector<std::size_t> inconsistent_inputs(const Relation& r, Subset programs);

struct Components {
  std::size_t count = 0;
  std::vector<std::vector<std::size_t>> parts;  // each ascending; by first vertex
};

/// Connected components of the 1-skeleton (vertices that belong to a face).
Components connected_components(const DowkerComplex& c);

/// Betti numbers over GF(2) for dimensions 0..max_dim. Throws CapacityError
/// when the faces needed exceed `face_budget`.
std::vector<std::size_t> betti_numbers(const DowkerComplex& c, std::size_t max_dim,
                                       std::size_t face_budget = kDefaultFaceBudget);

/// Dowker complex of the transpose: one vertex per distinct nonempty input
/// column (first occurrence order, labelled by that input), one generator per
/// program. Throws CapacityError past 64 distinct columns.
DowkerComplex dual_complex(const Relation& r);

/// Graphviz digraph: nodes labelled "{P1,P2}; w", edges superset -> subset,
/// inconsistent edges coloured red.
std::string graph_to_dot(const DowkerGraph& g);

}  // namespace tdt
