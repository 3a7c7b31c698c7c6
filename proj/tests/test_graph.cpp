/*
 * Copyright 2026 The hihgnn-sim Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "doctest.h"
#include "hihgnn/graph.hpp"
#include "hihgnn/graph_io.hpp"
#include "hihgnn/synthetic.hpp"
#include "test_support.hpp"

using namespace hihgnn;

namespace {

// 2 authors, 1 paper, AP edges {(A1,P1),(A2,P1)} plus the reverse.
const char* kToy =
    "vtypes\n"
    "A 2 3\n"
    "P 1 2\n"
    "relations\n"
    "AP A P\n"
    "PA P A\n"
    "edges AP\n"
    "0 0\n"
    "1 0\n"
    "edges PA\n"
    "0 0\n"
    "0 1\n"
    "metapaths\n"
    "APA AP PA\n";

HetGraph toy() {
  std::istringstream in(kToy);
  return parse_hetgraph(in, "toy");
}

std::size_t parse_error_line(const std::string& text) {
  std::istringstream in(text);
  try {
    parse_hetgraph(in, "bad");
  } catch (const ParseError& e) {
    return e.line();
  }
  return 0;
}

}  // namespace

TEST_SUITE("graph") {

TEST_CASE("CSC construction sorts by target then source") {
  CscMatrix m = CscMatrix::from_edges(3, 2, {{2, 1}, {0, 0}, {1, 1}, {0, 1}});
  CHECK(m.nnz() == 4);
  CHECK(m.col_ptr()[0] == 0);
  CHECK(m.col_ptr()[1] == 1);
  CHECK(m.col_ptr()[2] == 4);
  auto s = m.sources_of(1);
  CHECK(std::vector<VertexId>(s.begin(), s.end()) == std::vector<VertexId>{0, 1, 2});
  CHECK(m.in_degree(0) == 1);
  CHECK(m.edges() == std::vector<Edge>{{0, 0}, {0, 1}, {1, 1}, {2, 1}});
}

TEST_CASE("CSC rejects bad input") {
  CHECK_THROWS_AS(CscMatrix::from_edges(2, 2, {{2, 0}}), std::out_of_range);
  CHECK_THROWS_AS(CscMatrix::from_edges(2, 2, {{0, 2}}), std::out_of_range);
  CHECK_THROWS_AS(CscMatrix::from_edges(2, 2, {{0, 1}, {0, 1}}), std::invalid_argument);
  CHECK(CscMatrix::from_edges(2, 2, {{0, 1}, {0, 1}}, DuplicatePolicy::kCollapse).nnz() == 1);
}

TEST_CASE("CSC round trip and transpose (property)") {
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    Rng rng(seed);
    const auto ns = 1 + static_cast<std::uint32_t>(rng.below(20));
    const auto nd = 1 + static_cast<std::uint32_t>(rng.below(20));
    std::set<Edge> want;
    const auto m = rng.below(60);
    for (std::uint64_t k = 0; k < m; ++k) {
      want.insert({static_cast<VertexId>(rng.below(ns)), static_cast<VertexId>(rng.below(nd))});
    }
    std::vector<Edge> shuffled(want.begin(), want.end());
    for (std::size_t i = shuffled.size(); i > 1; --i) std::swap(shuffled[i - 1], shuffled[rng.below(i)]);
    const CscMatrix c = CscMatrix::from_edges(ns, nd, shuffled);
    auto got = c.edges();
    CHECK(std::set<Edge>(got.begin(), got.end()) == want);
    for (VertexId v = 0; v + 1 <= nd; ++v) CHECK(c.col_ptr()[v] <= c.col_ptr()[v + 1]);
    const CscMatrix t = c.transpose();
    CHECK(t.num_src() == nd);
    CHECK(t.num_dst() == ns);
    CHECK(t.transpose() == c);
    for (const Edge& e : t.edges()) CHECK(want.count({e.dst, e.src}) == 1);
  }
}

TEST_CASE("toy file loads") {
  HetGraph g = toy();
  CHECK(g.vertex_types().size() == 2);
  CHECK(g.vertex_type(0).count == 2);
  CHECK(g.vertex_type(1).count == 1);
  CHECK(g.adjacency(*g.find_relation("AP")).nnz() == 2);
  CHECK(g.total_edges() == 4);
  CHECK_FALSE(g.has_features(0));
  HetGraph f = g.with_generated_features(3);
  CHECK(f.raw_features(0).rows() == 2);
  CHECK(f.raw_features(0).cols() == 3);
  for (double v : f.raw_features(1).values()) {
    CHECK(v >= -1.0);
    CHECK(v <= 1.0);
  }
  CHECK(f.raw_features(0) == g.with_generated_features(3).raw_features(0));
}

TEST_CASE("relation graph copies the adjacency") {
  HetGraph g = toy();
  SemanticGraph sg = build_relation_graph(g, "AP");
  CHECK(sg.num_edges() == 2);
  CHECK(sg.targets == std::vector<VertexId>{0});
  CHECK(sg.edges == g.adjacency(*g.find_relation("AP")));
  CHECK(sg.relation.has_value());
  CHECK_THROWS_AS(build_relation_graph(g, "XX"), std::invalid_argument);
}

TEST_CASE("relation with zero edges gives an empty semantic graph") {
  std::istringstream in("vtypes\nA 2 1\nP 2 1\nrelations\nAP A P\nPA P A\nedges AP\n0 1\n");
  HetGraph g = parse_hetgraph(in);
  SemanticGraph sg = build_relation_graph(g, "PA");
  CHECK(sg.num_edges() == 0);
  CHECK(sg.targets.empty());
}

TEST_CASE("APA on the toy graph is the full 2x2 block, self-edges kept") {
  HetGraph g = toy();
  SemanticGraph sg = build_metapath_graph(g, g.metapaths()[0]);
  CHECK(sg.edges.edges() == std::vector<Edge>{{0, 0}, {1, 0}, {0, 1}, {1, 1}});
  CHECK(sg.targets == std::vector<VertexId>{0, 1});
  CHECK(sg.types_touched == std::vector<TypeId>{0});
  CHECK_FALSE(sg.relation.has_value());
}

TEST_CASE("length-1 metapath equals the relation graph") {
  HetGraph g = toy();
  SemanticGraph a = build_metapath_graph(g, MetapathSpec{"AP", {*g.find_relation("AP")}});
  SemanticGraph b = build_relation_graph(g, "AP");
  CHECK(a.edges == b.edges);
  CHECK(a.targets == b.targets);
}

TEST_CASE("metapath composition equals path enumeration (property)") {
  for (std::uint64_t seed = 1; seed <= 150; ++seed) {
    HetGraph g = gen_synthetic(testing::random_spec(seed, 15));
    for (const MetapathSpec& m : g.metapaths()) {
      SemanticGraph sg = build_metapath_graph(g, m);
      auto reach = testing::brute_metapath(g, m);
      std::set<Edge> want;
      for (std::size_t u = 0; u < reach.size(); ++u) {
        for (std::size_t v = 0; v < reach[u].size(); ++v) {
          if (reach[u][v]) want.insert({static_cast<VertexId>(u), static_cast<VertexId>(v)});
        }
      }
      auto got = sg.edges.edges();
      REQUIRE(std::set<Edge>(got.begin(), got.end()) == want);
      for (VertexId v : sg.targets) CHECK(sg.edges.in_degree(v) >= 1);
      CHECK(sg.targets.size() == std::set<VertexId>([&] {
              std::set<VertexId> t;
              for (const Edge& e : want) t.insert(e.dst);
              return t;
            }()).size());
    }
  }
}

TEST_CASE("three-step chain on a 50-vertex graph matches enumeration") {
  SyntheticSpec s;
  s.seed = 11;
  s.types = {{"A", 20, 4}, {"B", 15, 4}, {"C", 15, 4}};
  s.relations = {{"AB", "A", "B", 0.1, {}, {}}, {"BC", "B", "C", 0.15, {}, {}}, {"CA", "C", "A", 0.1, {}, {}}};
  s.metapaths = {{"ABCA", {"AB", "BC", "CA"}}};
  HetGraph g = gen_synthetic(s);
  SemanticGraph sg = build_metapath_graph(g, g.metapaths()[0]);
  auto reach = testing::brute_metapath(g, g.metapaths()[0]);
  std::size_t n = 0;
  for (auto& row : reach) n += std::count(row.begin(), row.end(), true);
  CHECK(sg.num_edges() == n);
  for (const Edge& e : sg.edges.edges()) CHECK(reach[e.src][e.dst]);
}

TEST_CASE("reversed chain gives the transpose (property)") {
  for (std::uint64_t seed = 1; seed <= 60; ++seed) {
    HetGraph g = gen_synthetic(testing::random_spec(seed));
    for (const MetapathSpec& m : g.metapaths()) {
      // random_spec pairs relation 2k with its reverse 2k+1
      MetapathSpec rev{"rev", {}};
      for (auto it = m.relations.rbegin(); it != m.relations.rend(); ++it) rev.relations.push_back(*it ^ 1u);
      SemanticGraph f = build_metapath_graph(g, m);
      SemanticGraph b = build_metapath_graph(g, rev);
      CHECK(b.edges == f.edges.transpose());
    }
  }
}

TEST_CASE("graph invariants are enforced") {
  // empty relation list: |Tv| + |Te| = 2 is not heterogeneous
  std::istringstream a("vtypes\nA 2 1\nP 2 1\n");
  CHECK_THROWS(parse_hetgraph(a));
  std::vector<VertexType> types{{"A", 2, 1}, {"P", 2, 1}};
  std::vector<RelationType> rels{{"AP", 0, 1}, {"PA", 1, 0}};
  std::vector<CscMatrix> adj{CscMatrix::from_edges(2, 2, {{0, 0}}), CscMatrix::from_edges(2, 2, {})};
  CHECK_NOTHROW(HetGraph(types, rels, adj, {Matrix(), Matrix()}));
  CHECK_THROWS_AS(HetGraph({{"A", 2, 1}, {"A", 2, 1}}, rels, adj, {Matrix(), Matrix()}), std::invalid_argument);
  CHECK_THROWS_AS(HetGraph({{"A", 0, 1}, {"P", 2, 1}}, rels, adj, {Matrix(), Matrix()}), std::invalid_argument);
  CHECK_THROWS_AS(HetGraph(types, {{"AP", 0, 1}, {"AP", 1, 0}}, adj, {Matrix(), Matrix()}), std::invalid_argument);
  CHECK_THROWS_AS(HetGraph(types, {{"AP", 0, 5}, {"PA", 1, 0}}, adj, {Matrix(), Matrix()}), std::invalid_argument);
  CHECK_THROWS_AS(HetGraph(types, rels, {CscMatrix::from_edges(3, 2, {}), adj[1]}, {Matrix(), Matrix()}),
                  std::invalid_argument);
  CHECK_THROWS_AS(HetGraph(types, rels, adj, {Matrix(2, 3), Matrix()}), std::invalid_argument);
  Matrix bad(2, 1);
  bad(0, 0) = std::nan("");
  CHECK_THROWS_AS(HetGraph(types, rels, adj, {bad, Matrix()}), std::invalid_argument);
  CHECK_THROWS_AS(HetGraph(types, rels, adj, {Matrix(), Matrix()}, {{"X", {0, 0}}}), std::invalid_argument);
  CHECK_THROWS_AS(HetGraph(types, rels, adj, {Matrix(), Matrix()}, {{"X", {}}}), std::invalid_argument);
}

TEST_CASE("parse errors carry the line number") {
  CHECK(parse_error_line("vtypes\nA 2 1\nP x 1\n") == 3);
  CHECK(parse_error_line("vtypes\nA 2 1\nP 1 1\nrelations\nAP A Q\n") == 5);
  CHECK(parse_error_line("vtypes\nA 2 1\nP 1 1\nrelations\nAP A P\nedges AP\n0 0\n5 0\n") == 8);
  CHECK(parse_error_line("vtypes\nA 2 1\nP 1 1\nrelations\nAP A P\nedges AP\n0 0\n0 0\n") > 0);
  CHECK(parse_error_line("vtypes\nA 2 1\nP 1 1\nrelations\nAP A P\nfeatures A\n1\n") > 0);
  CHECK(parse_error_line("vtypes\nA 2 1\nP 1 1\nrelations\nAP A P\nmetapaths\nAPP AP AP\n") == 7);
  CHECK(parse_error_line("edges AP\n0 0\n") == 1);
  CHECK_THROWS_AS(load_hetgraph("/nonexistent/graph.hg"), std::runtime_error);
}

TEST_CASE("comments and blank lines are ignored") {
  std::istringstream in("# header\nvtypes\n\nA 2 1   # two authors\nP 1 1\nrelations\nAP A P\nPA P A\n");
  HetGraph g = parse_hetgraph(in);
  CHECK(g.vertex_type(0).count == 2);
}

TEST_CASE("serialization is canonical") {
  for (std::uint64_t seed = 1; seed <= 30; ++seed) {
    HetGraph g = gen_synthetic(testing::random_spec(seed));
    const std::string text = serialize_hetgraph(g);
    std::istringstream in(text);
    HetGraph back = parse_hetgraph(in);
    CHECK(serialize_hetgraph(back) == text);
    CHECK(back.raw_features(0) == g.raw_features(0));
  }
  std::istringstream in(kToy);
  HetGraph g = parse_hetgraph(in);
  CHECK(serialize_hetgraph(g) == kToy);
}

TEST_CASE("synthetic generation is deterministic") {
  SyntheticSpec s;
  s.seed = 7;
  s.types = {{"X", 10, 2}, {"Y", 10, 2}};
  s.relations = {{"XY", "X", "Y", 0.1, {}, {}}, {"YX", "Y", "X", {}, {}, std::string("XY")}};
  HetGraph a = gen_synthetic(s);
  HetGraph b = gen_synthetic(s);
  CHECK(a.adjacency(0) == b.adjacency(0));
  CHECK(a.adjacency(0).nnz() == 10);
  CHECK(a.adjacency(1) == a.adjacency(0).transpose());
  CHECK(serialize_hetgraph(a) == serialize_hetgraph(b));
  s.seed = 8;
  CHECK_FALSE(gen_synthetic(s).adjacency(0) == a.adjacency(0));
}

TEST_CASE("density 1 saturates and bad densities are rejected") {
  SyntheticSpec s;
  s.seed = 1;
  s.types = {{"X", 6, 1}, {"Y", 4, 1}};
  s.relations = {{"XY", "X", "Y", 1.0, {}, {}}, {"YX", "Y", "X", 0.5, {}, {}}};
  CHECK(gen_synthetic(s).adjacency(0).nnz() == 24);
  s.relations[0].density = 1.5;
  CHECK_THROWS_AS(gen_synthetic(s), std::invalid_argument);
  s.relations[0].density = 0.0;
  CHECK_THROWS_AS(gen_synthetic(s), std::invalid_argument);
  s.relations[0].density.reset();
  s.relations[0].edges = 25;
  CHECK_THROWS_AS(gen_synthetic(s), std::invalid_argument);
}

TEST_CASE("dataset presets have the published shapes") {
  HetGraph dblp = gen_synthetic(dataset_preset("dblp", 1.0, 1));
  CHECK(dblp.vertex_type(*dblp.find_type("A")).count == 4057);
  CHECK(dblp.vertex_type(*dblp.find_type("P")).count == 14328);
  CHECK(dblp.vertex_type(*dblp.find_type("T")).count == 7723);
  CHECK(dblp.vertex_type(*dblp.find_type("V")).count == 20);
  CHECK(dblp.adjacency(*dblp.find_relation("AP")).nnz() == 19645);
  CHECK(dblp.adjacency(*dblp.find_relation("PA")).nnz() == 19645);
  CHECK(dblp.adjacency(*dblp.find_relation("TP")).nnz() == 85810);
  SemanticGraph tp = build_relation_graph(dblp, "TP");
  CHECK(tp.num_edges() == 85810);
  SyntheticSpec imdb = dataset_preset("imdb", 1.0, 1);
  HetGraph gi = gen_synthetic(imdb);
  CHECK(gi.vertex_type(*gi.find_type("M")).count == 4932);
  CHECK(gi.vertex_type(*gi.find_type("D")).count == 2393);
  CHECK(gi.vertex_type(*gi.find_type("A")).count == 6124);
  CHECK(gi.vertex_type(*gi.find_type("K")).count == 7971);
  CHECK(gi.vertex_type(*gi.find_type("K")).feature_dim == 0);
  CHECK_NOTHROW(gen_synthetic(dataset_preset("acm", 0.1, 1)));
  // dense relations saturate instead of failing at small scales
  HetGraph tiny = gen_synthetic(dataset_preset("acm", 0.02, 1));
  const RelationId tiny_tp = *tiny.find_relation("TP");
  CHECK(tiny.adjacency(tiny_tp).nnz() ==
        std::uint64_t{tiny.vertex_type(tiny.relation(tiny_tp).src).count} * tiny.vertex_type(tiny.relation(tiny_tp).dst).count);
  CHECK_THROWS_AS(dataset_preset("cora", 1.0, 1), std::invalid_argument);
  CHECK_THROWS_AS(dataset_preset("dblp", 0.0, 1), std::invalid_argument);
}

TEST_CASE("ring preset links neighbouring types") {
  HetGraph g = gen_synthetic(ring_preset(5, 30, 8, 2.0, 3));
  CHECK(g.vertex_types().size() == 5);
  CHECK(g.relations().size() == 5);
  CHECK(g.metapaths().size() == 5);
  for (RelationId r = 0; r < 5; ++r) {
    CHECK(g.relation(r).src == r);
    CHECK(g.relation(r).dst == (r + 1) % 5);
    CHECK(g.adjacency(r).nnz() == 60);
  }
  CHECK_THROWS_AS(ring_preset(1, 30, 8, 2.0, 3), std::invalid_argument);
}

}
