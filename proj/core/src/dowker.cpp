#include "tdt/dowker.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "tdt/error.hpp"

namespace tdt {
namespace {

std::vector<Subset> maximal_sets(std::vector<Subset> sets) {
  std::erase_if(sets, [](Subset s) { return s.empty(); });
  std::sort(sets.begin(), sets.end());
  sets.erase(std::unique(sets.begin(), sets.end()), sets.end());
  // Larger sets first so each candidate only needs checking against kept ones.
  std::sort(sets.begin(), sets.end(),
            [](Subset a, Subset b) { return BySizeThenBits{}(b, a); });
  std::vector<Subset> kept;
  for (Subset s : sets) {
    const bool covered = std::any_of(kept.begin(), kept.end(),
                                     [&](Subset k) { return s.is_subset_of(k); });
    if (!covered) kept.push_back(s);
  }
  std::sort(kept.begin(), kept.end(), BySizeThenBits{});
  return kept;
}

// Next k-subset of the low bits in colex order (Gosper's hack).
std::uint64_t next_combination(std::uint64_t x) {
  const std::uint64_t low = x & (~x + 1);
  const std::uint64_t ripple = x + low;
  return ripple | (((x ^ ripple) >> 2) / low);
}

class UnionFind {
 public:
  explicit UnionFind(std::size_t n) : parent_(n) {
    std::iota(parent_.begin(), parent_.end(), std::size_t{0});
  }
  std::size_t find(std::size_t x) {
    while (parent_[x] != x) {
      parent_[x] = parent_[parent_[x]];
      x = parent_[x];
    }
    return x;
  }
  void unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a != b) parent_[std::max(a, b)] = std::min(a, b);
  }

 private:
  std::vector<std::size_t> parent_;
};

// Rank over GF(2) of a matrix given as sparse columns of row indices.
std::size_t gf2_rank(std::vector<std::vector<std::size_t>> columns) {
  std::unordered_map<std::size_t, std::size_t> pivot_owner;
  std::size_t rank = 0;
  for (std::size_t c = 0; c < columns.size(); ++c) {
    auto& col = columns[c];
    std::sort(col.begin(), col.end());
    while (!col.empty()) {
      const auto it = pivot_owner.find(col.back());
      if (it == pivot_owner.end()) {
        pivot_owner.emplace(col.back(), c);
        ++rank;
        break;
      }
      const auto& other = columns[it->second];
      std::vector<std::size_t> sum;
      sum.reserve(col.size() + other.size());
      std::set_symmetric_difference(col.begin(), col.end(), other.begin(),
                                    other.end(), std::back_inserter(sum));
      col = std::move(sum);
    }
  }
  return rank;
}

}  // namespace

DowkerComplex::DowkerComplex(std::vector<std::string> vertex_labels,
                             std::vector<Subset> generators)
    : labels_(std::move(vertex_labels)) {
  if (labels_.size() > Subset::kMaxElements) {
    throw CapacityError("Dowker complex supports at most 64 vertices");
  }
  const Subset all = Subset::full(labels_.size());
  for (Subset g : generators) {
    if (!g.is_subset_of(all)) throw ArgumentError("generator names unknown vertices");
  }
  facets_ = maximal_sets(std::move(generators));
}

DowkerComplex::DowkerComplex(std::vector<std::string> vertex_labels,
                             std::vector<Subset> generators, WeightedDiagram weights)
    : DowkerComplex(std::move(vertex_labels), std::move(generators)) {
  if (weights.program_count() != labels_.size()) {
    throw ValidationError("diagram size does not match the complex's vertices");
  }
  weights_ = std::move(weights);
}

std::vector<std::size_t> DowkerComplex::vertices() const {
  Subset used;
  for (Subset f : facets_) used = used | f;
  return used.members();
}

bool DowkerComplex::contains(Subset face) const {
  if (face.empty()) return false;
  return std::any_of(facets_.begin(), facets_.end(),
                     [&](Subset f) { return face.is_subset_of(f); });
}

std::vector<Subset> DowkerComplex::faces(std::size_t budget) const {
  std::vector<Subset> out;
  if (labels_.size() <= kMaxDiagramPrograms) {
    const std::size_t regions = std::size_t{1} << labels_.size();
    std::vector<char> mark(regions, 0);
    for (Subset f : facets_) mark[f.bits()] = 1;
    for (std::size_t x = regions; x-- > 1;) {
      if (mark[x] == 0) continue;
      for (std::uint64_t b = x; b != 0; b &= b - 1) {
        mark[x & ~(b & (~b + 1))] = 1;
      }
    }
    for (std::size_t x = 1; x < regions; ++x) {
      if (mark[x] != 0) {
        out.emplace_back(x);
        if (out.size() > budget) {
          throw CapacityError("complex has more than " + std::to_string(budget) +
                              " faces");
        }
      }
    }
  } else {
    std::unordered_set<std::uint64_t> seen;
    for (Subset f : facets_) {
      // Walk every nonempty submask of the facet.
      for (std::uint64_t s = f.bits(); s != 0; s = (s - 1) & f.bits()) {
        if (seen.insert(s).second && seen.size() > budget) {
          throw CapacityError("complex has more than " + std::to_string(budget) +
                              " faces");
        }
      }
    }
    for (std::uint64_t s : seen) out.emplace_back(s);
  }
  std::sort(out.begin(), out.end(), BySizeThenBits{});
  return out;
}

std::vector<Subset> DowkerComplex::faces_of_dimension(std::size_t dim,
                                                      std::size_t budget) const {
  const std::size_t k = dim + 1;
  const std::size_t compact_at =
      budget > (std::numeric_limits<std::size_t>::max() - 64) / 4 ? budget
                                                                  : budget * 4 + 64;
  auto compact = [&](std::vector<Subset>& v) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
    if (v.size() > budget) {
      throw CapacityError("complex has more than " + std::to_string(budget) +
                          " faces of dimension " + std::to_string(dim));
    }
  };
  std::vector<Subset> out;
  for (Subset f : facets_) {
    const std::size_t size = f.size();
    if (size < k) continue;
    if (size >= 64) throw CapacityError("facet with 64 vertices is too large to enumerate");
    const std::uint64_t limit = std::uint64_t{1} << size;
    for (std::uint64_t local = (std::uint64_t{1} << k) - 1; local < limit;
         local = next_combination(local)) {
      out.emplace_back(expand_bits(local, f.bits()));
      // Facets overlap, so duplicates are squeezed out before judging size.
      if (out.size() > compact_at) compact(out);
    }
  }
  compact(out);
  return out;
}

const WeightedDiagram& DowkerComplex::diagram() const {
  if (!weights_) throw PreconditionError("complex carries no weights");
  return *weights_;
}

DowkerComplex build_complex(const Relation& r) {
  require_diagram_capacity(r.program_count(), "build_complex");
  return DowkerComplex(r.programs(), r.column_sets(), build_diagram(r));
}

DowkerGraph build_graph(const DowkerComplex& c) {
  const WeightedDiagram& d = c.diagram();
  DowkerGraph g;
  g.labels = c.labels();
  const auto faces = c.faces();
  g.nodes.reserve(faces.size());
  for (Subset face : faces) {
    g.nodes.push_back({face, d.weight(face)});
    if (face.size() < 2) continue;
    for (std::size_t j : face.members()) {
      const Subset sub = face.without(j);
      g.edges.push_back({face, sub, j, d.weight(sub) <= d.weight(face)});
    }
  }
  return g;
}

std::vector<Subset> consistent_core(const DowkerGraph& g) {
  std::unordered_map<std::uint64_t, std::size_t> index;
  for (std::size_t i = 0; i < g.nodes.size(); ++i) index.emplace(g.nodes[i].face.bits(), i);
  std::vector<char> tainted(g.nodes.size(), 0);
  // Edges are grouped by source in node order and every target precedes its
  // source, so one pass propagates taint upward.
  for (const DowkerEdge& e : g.edges) {
    const std::size_t from = index.at(e.from.bits());
    const std::size_t to = index.at(e.to.bits());
    if (!e.consistent || tainted[to] != 0) tainted[from] = 1;
  }
  std::vector<Subset> core;
  for (std::size_t i = 0; i < g.nodes.size(); ++i) {
    if (tainted[i] == 0) core.push_back(g.nodes[i].face);
  }
  return core;
}

std::vector<bool> inconsistent_region_flags(const WeightedDiagram& d) {
  const std::size_t regions = d.region_count();
  // A region is a face iff some superset region has positive weight.
  std::vector<char> face(regions, 0);
  for (std::size_t x = 0; x < regions; ++x) face[x] = d.weights()[x] != 0 ? 1 : 0;
  for (std::size_t bit = 1; bit < regions; bit <<= 1) {
    for (std::size_t x = 0; x < regions; ++x) {
      if ((x & bit) == 0 && face[x | bit] != 0) face[x] = 1;
    }
  }
  std::vector<bool> tainted(regions, false);
  for (std::size_t x = 1; x < regions; ++x) {
    if (face[x] == 0 || std::popcount(x) < 2) continue;
    for (std::uint64_t b = x; b != 0; b &= b - 1) {
      const std::size_t sub = x & ~(b & (~b + 1));
      if (d.weights()[sub] > d.weights()[x] || tainted[sub]) {
        tainted[x] = true;
        break;
      }
    }
  }
  return tainted;
}

std::vector<std::size_t> inconsistent_inputs(const Relation& r) {
  const DowkerGraph g = build_graph(build_complex(r));
  const auto core = consistent_core(g);
  std::unordered_set<std::uint64_t> in_core;
  for (Subset s : core) in_core.insert(s.bits());
  std::vector<std::size_t> out;
  const auto& columns = r.column_sets();
  for (std::size_t k = 0; k < columns.size(); ++k) {
    if (!columns[k].empty() && in_core.count(columns[k].bits()) == 0) out.push_back(k);
  }
  return out;
}

std::vector<std::size_t> inconsistent_inputs(const Relation& r, Subset programs) {
  require_diagram_capacity(r.program_count(), "inconsistent_inputs");
  if (programs.empty()) throw ArgumentError("inconsistent_inputs: empty program set");
  const WeightedDiagram local = coarsen_diagram(build_diagram(r), programs);
  const auto flags = inconsistent_region_flags(local);
  std::vector<std::size_t> out;
  const auto& columns = r.column_sets();
  for (std::size_t k = 0; k < columns.size(); ++k) {
    if (flags[compress_bits(columns[k].bits(), programs.bits())]) out.push_back(k);
  }
  return out;
}

Components connected_components(const DowkerComplex& c) {
  UnionFind uf(c.vertex_slots());
  for (Subset edge : c.faces_of_dimension(1)) {
    const auto ends = edge.members();
    uf.unite(ends[0], ends[1]);
  }
  Components out;
  std::unordered_map<std::size_t, std::size_t> part_of_root;
  for (std::size_t v : c.vertices()) {
    const std::size_t root = uf.find(v);
    auto [it, fresh] = part_of_root.emplace(root, out.parts.size());
    if (fresh) out.parts.emplace_back();
    out.parts[it->second].push_back(v);
  }
  out.count = out.parts.size();
  return out;
}

std::vector<std::size_t> betti_numbers(const DowkerComplex& c, std::size_t max_dim,
                                       std::size_t face_budget) {
  std::vector<std::vector<Subset>> faces;
  std::size_t total = 0;
  for (std::size_t d = 0; d <= max_dim + 1; ++d) {
    faces.push_back(c.faces_of_dimension(d, face_budget));
    total += faces.back().size();
    if (total > face_budget) {
      throw CapacityError("homology needs more than " + std::to_string(face_budget) +
                          " faces");
    }
  }
  // rank[d] = rank of the boundary map from d-faces to (d-1)-faces.
  std::vector<std::size_t> rank(max_dim + 2, 0);
  for (std::size_t d = 1; d <= max_dim + 1; ++d) {
    std::unordered_map<std::uint64_t, std::size_t> row;
    for (std::size_t i = 0; i < faces[d - 1].size(); ++i) row.emplace(faces[d - 1][i].bits(), i);
    std::vector<std::vector<std::size_t>> columns;
    columns.reserve(faces[d].size());
    for (Subset f : faces[d]) {
      std::vector<std::size_t> col;
      for (std::size_t v : f.members()) col.push_back(row.at(f.without(v).bits()));
      columns.push_back(std::move(col));
    }
    rank[d] = gf2_rank(std::move(columns));
  }
  std::vector<std::size_t> betti;
  for (std::size_t d = 0; d <= max_dim; ++d) {
    betti.push_back(faces[d].size() - rank[d] - rank[d + 1]);
  }
  return betti;
}

DowkerComplex dual_complex(const Relation& r) {
  const auto& columns = r.column_sets();
  std::vector<Subset> distinct;
  std::vector<std::string> labels;
  std::unordered_map<std::uint64_t, std::size_t> vertex_of;
  for (std::size_t k = 0; k < columns.size(); ++k) {
    if (columns[k].empty()) continue;
    if (vertex_of.emplace(columns[k].bits(), distinct.size()).second) {
      distinct.push_back(columns[k]);
      labels.push_back(r.inputs()[k]);
    }
  }
  if (distinct.size() > Subset::kMaxElements) {
    throw CapacityError("dual complex: " + std::to_string(distinct.size()) +
                        " distinct columns exceeds 64");
  }
  std::vector<Subset> generators;
  for (std::size_t j = 0; j < r.program_count(); ++j) {
    Subset g;
    for (std::size_t v = 0; v < distinct.size(); ++v) {
      if (distinct[v].contains(j)) g = g.with(v);
    }
    generators.push_back(g);
  }
  return DowkerComplex(std::move(labels), std::move(generators));
}

std::string graph_to_dot(const DowkerGraph& g) {
  std::ostringstream out;
  std::unordered_map<std::uint64_t, std::size_t> id;
  out << "digraph dowker {\n";
  for (std::size_t i = 0; i < g.nodes.size(); ++i) {
    id.emplace(g.nodes[i].face.bits(), i);
    out << "  n" << i << " [label=\"{";
    const auto members = g.nodes[i].face.members();
    for (std::size_t m = 0; m < members.size(); ++m) {
      if (m > 0) out << ',';
      out << g.labels.at(members[m]);
    }
    out << "}; " << g.nodes[i].weight << "\"];\n";
  }
  for (const DowkerEdge& e : g.edges) {
    out << "  n" << id.at(e.from.bits()) << " -> n" << id.at(e.to.bits());
    if (!e.consistent) out << " [color=red]";
    out << ";\n";
  }
  out << "}\n";
  return out.str();
}

}  // namespace tdt
