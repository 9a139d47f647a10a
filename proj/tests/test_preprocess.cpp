#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "lanegraph/error.hpp"
#include "lanegraph/graph_utils.hpp"
#include "lanegraph/preprocess.hpp"
#include "support/test_util.hpp"

using namespace lanegraph;
using namespace lanegraph::testutil;

TEST_CASE("decimate: collinear interior point removed") {
  auto r = decimate({{0, 0}, {1, 0}, {2, 0}}, 0.01);
  REQUIRE(r.polyline.size() == 2);
  CHECK(r.polyline[0].x == 0);
  CHECK(r.polyline[1].x == 2);
  CHECK(r.hausdorff < 1e-12);
}

TEST_CASE("decimate: sharp corner retained") {
  std::vector<Vec2> poly{{0, 0}, {1, 0}, {1, 1}};
  auto r = decimate(poly, 0.01);
  CHECK(r.polyline.size() == 3);
}

TEST_CASE("decimate: degenerate polyline errors") {
  CHECK_THROWS_AS(decimate({{0, 0}}, 0.01), Error);
}

TEST_CASE("decimate: quarter-circle thinning near 70 percent") {
  // 100 points on a quarter arc; tolerance picked to remove ~70% of them
  std::vector<Vec2> arc;
  for (int i = 0; i < 100; ++i) {
    double a = M_PI / 2 * i / 99.0;
    arc.push_back({std::cos(a), std::sin(a)});
  }
  auto r = decimate(arc, 0.033);
  double removed = 1.0 - static_cast<double>(r.polyline.size()) / arc.size();
  CHECK(removed > 0.65);
  CHECK(removed < 0.75);
}

TEST_CASE("decimate: idempotent") {
  Rng rng(11);
  for (int trial = 0; trial < 25; ++trial) {
    std::vector<Vec2> poly;
    int n = 5 + rng.uniform_int(40);
    Vec2 p{0, 0};
    for (int i = 0; i < n; ++i) {
      poly.push_back(p);
      p = p + Vec2{rng.uniform(0.5, 2.0), rng.uniform(-0.5, 0.5)};
    }
    auto once = decimate(poly, 0.1);
    auto twice = decimate(once.polyline, 0.1);
    REQUIRE(once.polyline.size() == twice.polyline.size());
    for (std::size_t i = 0; i < once.polyline.size(); ++i)
      CHECK(dist(once.polyline[i], twice.polyline[i]) == 0);
  }
}

TEST_CASE("extract_keypoints: path endpoints only") {
  auto g = path_graph({{0, 0}, {1, 0}, {2, 0}});
  auto keys = extract_keypoints(g);
  CHECK(keys == std::set<int>{0, 2});
}

TEST_CASE("extract_keypoints: plus intersection keeps center and tips") {
  auto keys = extract_keypoints(plus_graph());
  CHECK(keys == std::set<int>{0, 1, 2, 3, 4});
}

TEST_CASE("extract_keypoints: pure 4-cycle promotes exactly one node") {
  PlainGraph g;
  g.nodes = {{0, 0}, {1, 0}, {1, 1}, {0, 1}};
  g.edges = {{0, 1}, {1, 2}, {2, 3}, {3, 0}};
  g.bbox = compute_bbox(g.nodes);
  auto keys = extract_keypoints(g);
  REQUIRE(keys.size() == 1);
  CHECK(*keys.begin() == 0);  // lexicographically smallest coordinate
}

TEST_CASE("dfs_order: hand traces") {
  std::vector<std::vector<std::uint8_t>> tri{{0, 1, 1}, {1, 0, 1}, {1, 1, 0}};
  CHECK(dfs_order_from(tri, 0) == std::vector<int>{0, 1, 2});

  std::vector<std::vector<std::uint8_t>> single{{0}};
  CHECK(dfs_order_from(single, 0) == std::vector<int>{0});

  // two disjoint edges {0,1} and {2,3}, starting at 3
  std::vector<std::vector<std::uint8_t>> two(4, std::vector<std::uint8_t>(4, 0));
  two[0][1] = two[1][0] = 1;
  two[2][3] = two[3][2] = 1;
  CHECK(dfs_order_from(two, 3) == std::vector<int>{3, 2, 0, 1});
}

TEST_CASE("dfs_order: valid permutation with connected prefixes per component") {
  Rng rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    PlainGraph g = random_geometric_graph(rng, 4 + rng.uniform_int(15));
    const int n = g.node_count();
    std::vector<std::vector<std::uint8_t>> adj(n, std::vector<std::uint8_t>(n, 0));
    for (auto [a, b] : g.edges) adj[a][b] = adj[b][a] = 1;
    auto order = dfs_order(adj, trial);
    auto comp = connected_components(g);
    std::vector<int> comp_seen(n, 0);
    std::vector<bool> seen(n, false);
    for (int v : order) {
      REQUIRE(v >= 0);
      REQUIRE(v < n);
      REQUIRE_FALSE(seen[v]);
      // every node except its component's first attaches to a visited one
      if (comp_seen[comp[v]] > 0) {
        bool attached = false;
        for (int u = 0; u < n; ++u) attached = attached || (adj[v][u] && seen[u]);
        CHECK(attached);
      }
      comp_seen[comp[v]]++;
      seen[v] = true;
    }
    CHECK(static_cast<int>(order.size()) == n);
  }
}

TEST_CASE("build_hierarchical: simple path") {
  auto g = path_graph({{0, 0}, {1, 0}, {2, 0.5}, {3, 0.5}});
  PatchConfig cfg;
  cfg.max_local_W = 4;
  cfg.fov_m = 10;
  auto h = build_hierarchical(g, cfg);
  CHECK(h.node_count() == 2);
  CHECK(h.edge_count() == 1);
  CHECK(h.local_paths.at({0, 1}).valid_count() == 2);
  CHECK(validate(h).ok());
}

TEST_CASE("build_hierarchical: empty-interior edges have all-zero masks") {
  PlainGraph g = plus_graph();
  PatchConfig cfg;
  cfg.fov_m = 4;
  auto h = build_hierarchical(g, cfg);
  CHECK(h.node_count() == 5);
  for (const auto& [e, lp] : h.local_paths) {
    (void)e;
    CHECK(lp.valid_count() == 0);
  }
}

TEST_CASE("build_hierarchical: local overflow reported") {
  auto g = path_graph({{0, 0}, {1, 0}, {2, 0.4}, {3, 0}, {4, 0.4}, {5, 0}});
  PatchConfig cfg;
  cfg.max_local_W = 2;
  cfg.fov_m = 10;
  CHECK_THROWS_WITH_AS(build_hierarchical(g, cfg), doctest::Contains("local overflow"), Error);
}

TEST_CASE("build_hierarchical: parallel chains resolved by midpoint promotion") {
  // two distinct chains joining nodes 0 and 1
  PlainGraph g;
  g.nodes = {{0, 0}, {4, 0}, {1, 1}, {2, 1}, {3, 1}, {1, -1}, {2, -1}, {3, -1}, {0, -3}, {4, -3}};
  g.edges = {{0, 2}, {2, 3}, {3, 4}, {4, 1}, {0, 5}, {5, 6}, {6, 7}, {7, 1}, {0, 8}, {1, 9}};
  g.bbox = compute_bbox(g.nodes);
  PatchConfig cfg;
  cfg.max_local_W = 4;
  cfg.fov_m = 10;
  auto h = build_hierarchical(g, cfg);
  CHECK(validate(h).ok());
  auto flat = flatten(h);
  CHECK(geo_isomorphic(flat, g));
}

TEST_CASE("round trip: flatten(build_hierarchical(g)) isomorphic to g") {
  Rng rng(123);
  int done = 0;
  for (int trial = 0; trial < 30; ++trial) {
    PlainGraph g = random_geometric_graph(rng, 6 + rng.uniform_int(25), 3);
    PatchConfig cfg;
    cfg.max_local_W = 64;
    cfg.fov_m = 100;
    cfg.seed = trial;
    HierGraph h = build_hierarchical(g, cfg);
    REQUIRE(validate(h).ok());
    PlainGraph flat = flatten(h);
    REQUIRE(validate(flat).ok());
    CHECK(geo_isomorphic(flat, g));
    done++;
  }
  CHECK(done > 0);
}

TEST_CASE("round trip: pure cycle survives") {
  PlainGraph g;
  g.nodes = {{0, 0}, {1, 0}, {1, 1}, {0, 1}};
  g.edges = {{0, 1}, {1, 2}, {2, 3}, {3, 0}};
  g.bbox = compute_bbox(g.nodes);
  PatchConfig cfg;
  cfg.max_local_W = 8;
  cfg.fov_m = 2;
  auto h = build_hierarchical(g, cfg);
  CHECK(validate(h).ok());
  CHECK(geo_isomorphic(flatten(h), g));
}

TEST_CASE("sample_patches: fov equal to bbox returns the whole map") {
  Rng rng(3);
  PlainGraph g = random_geometric_graph(rng, 10);
  g.bbox = compute_bbox(g.nodes);
  double fov = std::max(g.bbox.width(), g.bbox.height());
  PlainGraph padded = g;
  padded.bbox = BBox{g.bbox.min_x, g.bbox.min_y, g.bbox.min_x + fov, g.bbox.min_y + fov};
  PatchConfig cfg;
  cfg.fov_m = fov;
  auto patches = sample_patches(padded, cfg, 1);
  REQUIRE(patches.size() == 1);
  CHECK(patches[0].node_count() == g.node_count());
  CHECK(patches[0].edge_count() == g.edge_count());
}

TEST_CASE("sample_patches: map smaller than fov errors") {
  PlainGraph g = path_graph({{0, 0}, {1, 0}});
  PatchConfig cfg;
  cfg.fov_m = 50;
  CHECK_THROWS_AS(sample_patches(g, cfg, 1), Error);
}

TEST_CASE("sample_patches: deterministic, non-empty, inside fov") {
  Rng rng(9);
  PlainGraph g = random_geometric_graph(rng, 60, 10);
  g.bbox = BBox{0, 0, 110, 110};
  PatchConfig cfg;
  cfg.fov_m = 30;
  cfg.seed = 77;
  auto a = sample_patches(g, cfg, 20);
  auto b = sample_patches(g, cfg, 20);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    REQUIRE(a[i].node_count() == b[i].node_count());
    for (int v = 0; v < a[i].node_count(); ++v) CHECK(dist(a[i].nodes[v], b[i].nodes[v]) == 0);
    CHECK(a[i].edge_count() > 0);
    CHECK(validate(a[i]).ok());
    for (const auto& p : a[i].nodes) {
      CHECK(p.x >= -1e-9);
      CHECK(p.x <= cfg.fov_m + 1e-9);
      CHECK(p.y >= -1e-9);
      CHECK(p.y <= cfg.fov_m + 1e-9);
    }
  }
}

TEST_CASE("normalize: corners and center") {
  HierGraph h;
  h.global_nodes = {{0, 0}, {100, 100}, {200, 150}};
  h.global_adj.assign(3, std::vector<std::uint8_t>(3, 0));
  h.global_adj[0][1] = h.global_adj[1][0] = 1;
  h.global_adj[1][2] = h.global_adj[2][1] = 1;
  h.W = 0;
  h.order = {0, 1, 2};
  h.fov_m = 200;
  auto n = normalize(h, 200.0);
  CHECK(n.graph.global_nodes[0].x == doctest::Approx(-1));
  CHECK(n.graph.global_nodes[0].y == doctest::Approx(-1));
  CHECK(n.graph.global_nodes[1].x == doctest::Approx(0));
  CHECK(n.graph.global_nodes[1].y == doctest::Approx(0));

  auto back = denormalize(n.graph, n.transform);
  for (int i = 0; i < 3; ++i) CHECK(dist(back.global_nodes[i], h.global_nodes[i]) < 1e-9);

  HierGraph out;
  out = h;
  out.global_nodes[2] = {250, 0};
  CHECK_THROWS_AS(normalize(out, 200.0), Error);
}
