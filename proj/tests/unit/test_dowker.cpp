#include <algorithm>
#include <random>
#include <set>

#include "doctest.h"
#include "oracle.hpp"
#include "tdt/dowker.hpp"
#include "tdt/error.hpp"

using namespace tdt;

namespace {

Relation load(const char* name) { return load_relation(oracle::fixture(name), RelationFormat::json); }

DowkerComplex plain(std::size_t vertices, std::vector<Subset> generators) {
  return DowkerComplex(oracle::names(vertices, "v"), std::move(generators));
}

Subset bits(std::uint64_t b) { return Subset(b); }

std::vector<Subset> sorted(std::vector<Subset> v) {
  std::sort(v.begin(), v.end(), BySizeThenBits{});
  return v;
}

}  // namespace

TEST_CASE("toy complex facets and faces") {
  const Relation r = load("toy.json");
  const DowkerComplex c = build_complex(r);
  CHECK(sorted(c.facets()) ==
        sorted({parse_subset(r, "A,B"), parse_subset(r, "B,C"), parse_subset(r, "A,C,D")}));
  CHECK(c.faces().size() == 10);
  CHECK(c.faces_of_dimension(0).size() == 4);
  CHECK(c.faces_of_dimension(1).size() == 5);
  CHECK(c.faces_of_dimension(2).size() == 1);
  CHECK(c.faces_of_dimension(3).empty());
  CHECK(c.contains(parse_subset(r, "A,D")));
  CHECK_FALSE(c.contains(parse_subset(r, "B,D")));
  CHECK_FALSE(c.contains(Subset{}));
  CHECK(c.weight(parse_subset(r, "A,C,D")) == 4);
}

TEST_CASE("toy graph: inconsistent edges and core") {
  const Relation r = load("toy.json");
  const DowkerGraph g = build_graph(build_complex(r));
  CHECK(g.nodes.size() == 10);
  std::set<std::pair<std::string, std::string>> red;
  for (const auto& e : g.edges) {
    CHECK(e.from.size() == e.to.size() + 1);
    CHECK(e.from.without(e.removed) == e.to);
    CHECK_FALSE(e.to.empty());
    if (!e.consistent) red.emplace(region_key(r.programs(), e.from), region_key(r.programs(), e.to));
  }
  const std::set<std::pair<std::string, std::string>> expected{
      {"A,C", "C"}, {"B,C", "B"}, {"B,C", "C"}};
  CHECK(red == expected);
  // 5 edges x 2 + 1 triangle x 3
  CHECK(g.edges.size() == 13);

  const auto core = consistent_core(g);
  std::set<std::string> core_keys;
  for (Subset s : core) core_keys.insert(region_key(r.programs(), s));
  CHECK(core_keys == std::set<std::string>{"A", "B", "C", "D", "A,B", "A,D", "C,D"});
}

TEST_CASE("toy inconsistent inputs") {
  const Relation r = load("toy.json");
  const std::vector<std::size_t> expected{9, 12, 16, 17, 18, 19};  // 10, 13, 17-20
  CHECK(inconsistent_inputs(r) == expected);
  CHECK(inconsistent_inputs(r, Subset::full(4)) == expected);
  CHECK(oracle::inconsistent_inputs(r, 0xF) == expected);
}

TEST_CASE("all-ones relation has no inconsistency") {
  const std::vector<std::string> rows{"1111", "1111", "1111"};
  const Relation r = Relation::from_rows({"A", "B", "C"}, oracle::names(4, "f"), rows);
  const DowkerGraph g = build_graph(build_complex(r));
  CHECK(std::none_of(g.edges.begin(), g.edges.end(), [](const DowkerEdge& e) { return !e.consistent; }));
  CHECK(inconsistent_inputs(r).empty());
  CHECK(graph_to_dot(g).find("red") == std::string::npos);
}

TEST_CASE("fast and graph paths agree with the oracle") {
  std::mt19937_64 rng(23);
  for (int round = 0; round < 300; ++round) {
    const std::size_t m = 1 + round % 5;
    const Relation r = oracle::random_relation(rng, m, round % 25, 0.3 + 0.1 * (round % 5));
    const auto graph_path = inconsistent_inputs(r);
    CHECK(graph_path == inconsistent_inputs(r, Subset::full(m)));
    CHECK(graph_path == oracle::inconsistent_inputs(r, (oracle::Mask{1} << m) - 1));
    const Subset keep(std::uniform_int_distribution<std::uint64_t>(1, (1u << m) - 1)(rng));
    CHECK(inconsistent_inputs(r, keep) == oracle::inconsistent_inputs(r, keep.bits()));
    CHECK(inconsistent_inputs(r, keep) == inconsistent_inputs(restrict_programs(r, keep)));
  }
}

TEST_CASE("betti numbers of small complexes") {
  const Relation r = load("toy.json");
  const DowkerComplex toy = build_complex(r);
  CHECK(betti_numbers(toy, 1) == std::vector<std::size_t>{1, 1});
  CHECK(betti_numbers(toy, 2) == std::vector<std::size_t>{1, 1, 0});

  // hollow triangle
  CHECK(betti_numbers(plain(3, {bits(0b011), bits(0b110), bits(0b101)}), 2) ==
        std::vector<std::size_t>{1, 1, 0});
  // two points
  CHECK(betti_numbers(plain(2, {bits(0b01), bits(0b10)}), 1) == std::vector<std::size_t>{2, 0});
  // boundary of a tetrahedron
  CHECK(betti_numbers(plain(4, {bits(0b0111), bits(0b1011), bits(0b1101), bits(0b1110)}), 2) ==
        std::vector<std::size_t>{1, 0, 1});
  // solid simplex
  CHECK(betti_numbers(plain(5, {bits(0b11111)}), 3) == std::vector<std::size_t>{1, 0, 0, 0});
  // two hollow squares sharing a vertex
  CHECK(betti_numbers(plain(7, {bits(0b0000011), bits(0b0000110), bits(0b0001100), bits(0b0001001),
                                bits(0b0110000), bits(0b1100000), bits(0b1000001), bits(0b0010001)}),
                      1) == std::vector<std::size_t>{1, 2});
}

TEST_CASE("euler characteristic matches betti numbers") {
  std::mt19937_64 rng(5);
  for (int round = 0; round < 200; ++round) {
    const std::size_t m = 1 + round % 6;
    const Relation r = oracle::random_relation(rng, m, 1 + round % 12, 0.4);
    const DowkerComplex c = build_complex(r);
    const auto betti = betti_numbers(c, m);
    long long alt = 0;
    for (std::size_t d = 0; d < betti.size(); ++d) {
      alt += (d % 2 == 0 ? 1 : -1) * static_cast<long long>(betti[d]);
    }
    const auto faces = oracle::faces(oracle::region_counts(r, (oracle::Mask{1} << m) - 1));
    CHECK(alt == oracle::euler_characteristic(faces));
    CHECK(c.faces().size() == faces.size());
  }
}

TEST_CASE("face budget") {
  const DowkerComplex c = plain(12, {Subset::full(12)});
  CHECK(c.faces().size() == 4095);
  CHECK_THROWS_AS(c.faces(100), CapacityError);
  CHECK_THROWS_AS(c.faces_of_dimension(5, 100), CapacityError);
  CHECK(c.faces_of_dimension(1, 100).size() == 66);
  CHECK_THROWS_AS(betti_numbers(c, 6, 1000), CapacityError);
}

TEST_CASE("complexes on more than 24 vertices") {
  std::vector<Subset> gens{Subset(0b111) , Subset(std::uint64_t{0b11} << 38), Subset((std::uint64_t{1} << 39) | 1)};
  const DowkerComplex c = plain(40, gens);
  CHECK(c.faces().size() == 7 + 3 + 2 - 1);
  CHECK(connected_components(c).count == 1);
  CHECK(betti_numbers(c, 1) == std::vector<std::size_t>{1, 0});
  CHECK_THROWS_AS(plain(65, {}), CapacityError);
}

TEST_CASE("dual complex and connected components") {
  const Relation r = load("toy.json");
  const DowkerComplex dual = dual_complex(r);
  CHECK(dual.vertex_slots() == 10);
  CHECK(dual.labels().front() == "1");
  CHECK(connected_components(dual).count == 1);
  const Components comps = connected_components(build_complex(r));
  CHECK(comps.count == 1);
  CHECK(comps.parts.front() == std::vector<std::size_t>{0, 1, 2, 3});

  const std::vector<std::string> rows{"1100", "0100", "0011", "0000"};
  const Relation split = Relation::from_rows({"A", "B", "C", "D"}, oracle::names(4, "f"), rows);
  const Components two = connected_components(build_complex(split));
  CHECK(two.count == 2);
  CHECK(two.parts == std::vector<std::vector<std::size_t>>{{0, 1}, {2}});
  CHECK(connected_components(dual_complex(split)).count == 2);
}

TEST_CASE("dot rendering") {
  const Relation r = load("toy.json");
  const std::string dot = graph_to_dot(build_graph(build_complex(r)));
  CHECK(dot.rfind("digraph", 0) == 0);
  std::size_t red = 0;
  for (std::size_t pos = 0; (pos = dot.find("[color=red]", pos)) != std::string::npos; ++pos) ++red;
  CHECK(red == 3);
  CHECK(dot.find("{A,C,D}; 4") != std::string::npos);
}

TEST_CASE("unweighted complex has no diagram") {
  const DowkerComplex c = plain(2, {Subset(0b11)});
  CHECK_FALSE(c.weighted());
  CHECK_THROWS_AS(c.diagram(), PreconditionError);
}
