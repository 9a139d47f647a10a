#pragma once

#include <algorithm>
#include <numeric>
#include <set>
#include <vector>

#include "lanegraph/map_model.hpp"
#include "lanegraph/rng.hpp"

namespace lanegraph::testutil {

// Isomorphism check for geometric graphs with pairwise-distinct coordinates:
// the coordinate match forces the only possible node bijection, so it
// suffices to verify it exists and preserves the edge set exactly.
inline bool geo_isomorphic(const PlainGraph& a, const PlainGraph& b, double tol = 1e-9) {
  if (a.nodes.size() != b.nodes.size() || a.edges.size() != b.edges.size()) return false;
  const int n = a.node_count();
  std::vector<int> ia(n), ib(n);
  std::iota(ia.begin(), ia.end(), 0);
  std::iota(ib.begin(), ib.end(), 0);
  auto by_coord = [](const std::vector<Vec2>& pts) {
    return [&pts](int u, int v) {
      if (pts[u].x != pts[v].x) return pts[u].x < pts[v].x;
      return pts[u].y < pts[v].y;
    };
  };
  std::sort(ia.begin(), ia.end(), by_coord(a.nodes));
  std::sort(ib.begin(), ib.end(), by_coord(b.nodes));
  std::vector<int> map_ab(n);
  for (int k = 0; k < n; ++k) {
    if (dist(a.nodes[ia[k]], b.nodes[ib[k]]) > tol) return false;
    map_ab[ia[k]] = ib[k];
  }
  std::set<Edge> ea, eb;
  for (auto [u, v] : a.edges) {
    int x = map_ab[u], y = map_ab[v];
    ea.insert({std::min(x, y), std::max(x, y)});
  }
  for (auto [u, v] : b.edges) eb.insert({std::min(u, v), std::max(u, v)});
  return ea == eb;
}

inline PlainGraph path_graph(const std::vector<Vec2>& pts) {
  PlainGraph g;
  g.nodes = pts;
  for (int i = 0; i + 1 < static_cast<int>(pts.size()); ++i) g.edges.push_back({i, i + 1});
  g.bbox = compute_bbox(g.nodes);
  return g;
}

// Plus-shaped intersection: center plus 4 tips.
inline PlainGraph plus_graph() {
  PlainGraph g;
  g.nodes = {{0, 0}, {0, 1}, {0, -1}, {1, 0}, {-1, 0}};
  g.edges = {{0, 1}, {0, 2}, {0, 3}, {0, 4}};
  g.bbox = compute_bbox(g.nodes);
  return g;
}

// Random connected geometric graph: spanning tree plus a few extra edges,
// coordinates pairwise distinct.
inline PlainGraph random_geometric_graph(Rng& rng, int n, int extra_edges = 2) {
  PlainGraph g;
  for (int i = 0; i < n; ++i) g.nodes.push_back({rng.uniform(0.0, 100.0), rng.uniform(0.0, 100.0)});
  std::set<Edge> edges;
  for (int i = 1; i < n; ++i) {
    int j = rng.uniform_int(i);
    edges.insert({j, i});
  }
  for (int k = 0; k < extra_edges && n > 2; ++k) {
    int u = rng.uniform_int(n), v = rng.uniform_int(n);
    if (u == v) continue;
    edges.insert({std::min(u, v), std::max(u, v)});
  }
  g.edges.assign(edges.begin(), edges.end());
  g.bbox = compute_bbox(g.nodes);
  return g;
}

}  // namespace lanegraph::testutil
