#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "lanegraph/error.hpp"
#include "lanegraph/json_io.hpp"
#include "lanegraph/map_model.hpp"
#include "support/test_util.hpp"

using namespace lanegraph;
using namespace lanegraph::testutil;

namespace {

HierGraph two_node_hier(int n_valid, int W = 4) {
  HierGraph h;
  h.global_nodes = {{0, 0}, {4, 0}};
  h.global_adj = {{0, 1}, {1, 0}};
  h.W = W;
  h.order = {0, 1};
  h.fov_m = 10;
  LocalPath lp;
  lp.coords.assign(W, Vec2{});
  lp.mask.assign(W, 0);
  for (int i = 0; i < n_valid; ++i) {
    lp.coords[i] = {1.0 + i, 0.5};
    lp.mask[i] = 1;
  }
  h.local_paths[{0, 1}] = lp;
  h.semantics[{0, 1}] = 0;
  return h;
}

}  // namespace

TEST_CASE("validate: triangle graph is clean") {
  PlainGraph g;
  g.nodes = {{0, 0}, {1, 0}, {0, 1}};
  g.edges = {{0, 1}, {1, 2}, {0, 2}};
  CHECK(validate(g).ok());
}

TEST_CASE("validate: self-loop reported") {
  PlainGraph g;
  g.nodes = {{0, 0}, {1, 0}};
  g.edges = {{0, 0}};
  auto r = validate(g);
  REQUIRE_FALSE(r.ok());
  CHECK(r.joined().find("self-loop") != std::string::npos);
}

TEST_CASE("validate: duplicate edges and coordinates reported") {
  PlainGraph g;
  g.nodes = {{0, 0}, {1, 0}, {1, 0}};
  g.edges = {{0, 1}, {1, 0}};
  auto r = validate(g);
  CHECK(r.joined().find("duplicate edge") != std::string::npos);
  CHECK(r.joined().find("duplicate node coordinates") != std::string::npos);
}

TEST_CASE("validate: non-prefix mask reported") {
  HierGraph h = two_node_hier(0);
  auto& lp = h.local_paths.at({0, 1});
  lp.mask = {1, 0, 1, 0};
  auto r = validate(h);
  REQUIRE_FALSE(r.ok());
  CHECK(r.joined().find("non-prefix mask") != std::string::npos);
}

TEST_CASE("validate: asymmetric adjacency reported") {
  HierGraph h = two_node_hier(0);
  h.global_adj[0][1] = 0;
  CHECK(validate(h).joined().find("asymmetric adjacency") != std::string::npos);
}

TEST_CASE("flatten: edge without interior points") {
  PlainGraph flat = flatten(two_node_hier(0));
  CHECK(flat.node_count() == 2);
  CHECK(flat.edge_count() == 1);
  CHECK(validate(flat).ok());
}

TEST_CASE("flatten: edge with three interior points") {
  PlainGraph flat = flatten(two_node_hier(3));
  CHECK(flat.node_count() == 5);
  CHECK(flat.edge_count() == 4);
  std::vector<int> deg(flat.node_count(), 0);
  for (auto [a, b] : flat.edges) {
    deg[a]++;
    deg[b]++;
  }
  int degree_two = 0;
  for (int d : deg) degree_two += (d == 2);
  CHECK(degree_two == 3);
  CHECK(validate(flat).ok());
}

TEST_CASE("flatten: coincident global nodes are merged") {
  HierGraph h = two_node_hier(0);
  h.global_nodes.push_back({4.0, kMergeTolerance / 4});  // within merge range of node 1
  for (auto& row : h.global_adj) row.push_back(0);
  h.global_adj.push_back({0, 0, 0});
  h.global_adj[1][2] = h.global_adj[2][1] = 0;
  h.global_adj[0][2] = h.global_adj[2][0] = 1;
  h.order = {0, 1, 2};
  PlainGraph flat = flatten(h);
  CHECK(flat.node_count() == 2);
  CHECK(flat.edge_count() == 1);  // the two chains collapse onto one edge
  CHECK(validate(flat).ok());
}

TEST_CASE("flatten: invalid input raises a validation error") {
  HierGraph h = two_node_hier(0);
  h.global_adj[0][0] = 1;
  CHECK_THROWS_AS(flatten(h), Error);
}

TEST_CASE("to_sequence: single two-node lane") {
  auto g = path_graph({{0, 0}, {3, 4}});
  auto s = to_sequence(g);
  REQUIRE(s.steps.size() == 1);
  CHECK(s.steps[0].q == 3);
  CHECK(s.steps[0].dx == doctest::Approx(3));
  CHECK(s.steps[0].dy == doctest::Approx(4));
  CHECK(validate(s).ok());
}

TEST_CASE("to_sequence: two disjoint lanes") {
  PlainGraph g;
  g.nodes = {{0, 0}, {1, 0}, {5, 5}, {6, 5}};
  g.edges = {{0, 1}, {2, 3}};
  g.bbox = compute_bbox(g.nodes);
  auto s = to_sequence(g);
  REQUIRE(s.steps.size() == 3);  // two drawn edges plus one pen-up jump
  CHECK(s.steps[0].q == 1);
  CHECK(s.steps[1].q == 2);
  CHECK(s.steps[2].q == 3);
  CHECK(validate(s).ok());
}

TEST_CASE("to_sequence: plus intersection revisits the center") {
  auto g = plus_graph();
  auto s = to_sequence(g);
  auto pts = sequence_points(s);
  int center_visits = 0;
  for (const auto& p : pts) center_visits += (dist(p, {0, 0}) < 1e-9);
  CHECK(center_visits >= 2);
  CHECK(validate(s).ok());
}

TEST_CASE("to_sequence: empty map errors") {
  PlainGraph g;
  CHECK_THROWS_AS(to_sequence(g), Error);
  g.nodes = {{0, 0}};
  CHECK_THROWS_AS(to_sequence(g), Error);
}

TEST_CASE("to_sequence: step count and coordinate recovery on random graphs") {
  Rng rng(42);
  for (int trial = 0; trial < 20; ++trial) {
    PlainGraph g = random_geometric_graph(rng, 3 + rng.uniform_int(20));
    if (g.edges.empty()) continue;
    auto s = to_sequence(g);
    // drawn movement steps == edge count; the rest is pen-up bookkeeping
    int drawn = 0;
    int prev_q = 2;
    for (const auto& st : s.steps) {
      if (prev_q == 2) drawn++;
      prev_q = st.q == 3 ? 2 : st.q;
    }
    CHECK(drawn == g.edge_count());

    auto pts = sequence_points(s);
    for (const auto& node : g.nodes) {
      double best = 1e18;
      for (const auto& p : pts) best = std::min(best, dist(p, node));
      CHECK(best < 1e-9);
    }
  }
}

TEST_CASE("json round trip: plain and hier") {
  Rng rng(7);
  PlainGraph g = random_geometric_graph(rng, 12);
  g.edge_light.assign(g.edges.size(), 0);
  g.edge_light[0] = 1;
  Json j = plain_to_json(g, 50.0);
  double fov = 0;
  PlainGraph back = plain_from_json(j, &fov);
  CHECK(fov == doctest::Approx(50.0));
  CHECK(geo_isomorphic(g, back));

  HierGraph h = two_node_hier(2);
  h.semantics[{0, 1}] = 1;
  HierGraph hback = hier_from_json(hier_to_json(h));
  CHECK(hback.node_count() == 2);
  CHECK(hback.W == h.W);
  CHECK(hback.order == h.order);
  CHECK(hback.semantics.at({0, 1}) == 1);
  CHECK(hback.local_paths.at({0, 1}).valid_count() == 2);
  CHECK(validate(hback).ok());
}

TEST_CASE("sequence validation flags bad state layout") {
  SequenceRep s;
  s.steps = {{1, 0, 2}, {1, 0, 3}, {1, 0, 2}};
  CHECK_FALSE(validate(s).ok());
  s.steps = {{1, 0, 3}};
  CHECK(validate(s).ok());
  s.steps = {{1, 0, 5}};
  CHECK_FALSE(validate(s).ok());
}
