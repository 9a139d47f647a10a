#include "lanegraph/graph_utils.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <queue>
#include <unordered_map>

#include "lanegraph/error.hpp"

namespace lanegraph {

std::vector<int> node_degrees(const PlainGraph& g) {
  std::vector<int> deg(g.nodes.size(), 0);
  for (auto [a, b] : g.edges) {
    deg[a]++;
    deg[b]++;
  }
  return deg;
}

std::vector<std::vector<int>> adjacency_lists(const PlainGraph& g) {
  std::vector<std::vector<int>> adj(g.nodes.size());
  for (auto [a, b] : g.edges) {
    adj[a].push_back(b);
    adj[b].push_back(a);
  }
  for (auto& nbrs : adj) std::sort(nbrs.begin(), nbrs.end());
  return adj;
}

std::vector<int> connected_components(const PlainGraph& g) {
  auto adj = adjacency_lists(g);
  std::vector<int> comp(g.nodes.size(), -1);
  int c = 0;
  for (int start = 0; start < g.node_count(); ++start) {
    if (comp[start] >= 0) continue;
    std::queue<int> q;
    q.push(start);
    comp[start] = c;
    while (!q.empty()) {
      int u = q.front();
      q.pop();
      for (int v : adj[u])
        if (comp[v] < 0) {
          comp[v] = c;
          q.push(v);
        }
    }
    c++;
  }
  return comp;
}

namespace {

bool coord_less(const PlainGraph& g, int a, int b) {
  const Vec2& pa = g.nodes[a];
  const Vec2& pb = g.nodes[b];
  if (pa.x != pb.x) return pa.x < pb.x;
  if (pa.y != pb.y) return pa.y < pb.y;
  return a < b;
}

}  // namespace

std::set<int> key_point_set(const PlainGraph& g) {
  auto deg = node_degrees(g);
  std::set<int> keys;
  for (int i = 0; i < g.node_count(); ++i)
    if (deg[i] != 2) keys.insert(i);

  // Pure degree-2 cycles have no natural key point; promote the
  // coordinate-lexicographically smallest node of each such component.
  auto comp = connected_components(g);
  int n_comp = comp.empty() ? 0 : *std::max_element(comp.begin(), comp.end()) + 1;
  std::vector<int> promoted(n_comp, -1);
  std::vector<bool> pure(n_comp, true);
  for (int i = 0; i < g.node_count(); ++i) {
    int c = comp[i];
    if (deg[i] != 2) {
      pure[c] = false;
      continue;
    }
    if (promoted[c] < 0 || coord_less(g, i, promoted[c])) promoted[c] = i;
  }
  for (int c = 0; c < n_comp; ++c)
    if (pure[c] && promoted[c] >= 0) keys.insert(promoted[c]);
  return keys;
}

std::vector<Chain> extract_chains(const PlainGraph& g) { return extract_chains(g, key_point_set(g)); }

std::vector<Chain> extract_chains(const PlainGraph& g, const std::set<int>& key_points) {
  // Adjacency with edge indices, neighbors ascending.
  std::vector<std::vector<std::pair<int, int>>> adj(g.nodes.size());
  for (int e = 0; e < g.edge_count(); ++e) {
    auto [a, b] = g.edges[e];
    adj[a].push_back({b, e});
    adj[b].push_back({a, e});
  }
  for (auto& nbrs : adj) std::sort(nbrs.begin(), nbrs.end());

  std::vector<bool> used(g.edges.size(), false);
  std::vector<Chain> chains;
  for (int k : key_points) {
    for (auto [nbr, e0] : adj[k]) {
      if (used[e0]) continue;
      Chain chain;
      chain.nodes.push_back(k);
      int prev = k, cur = nbr, edge = e0;
      used[e0] = true;
      chain.edge_indices.push_back(e0);
      chain.nodes.push_back(cur);
      while (!key_points.count(cur)) {
        int next = -1, next_edge = -1;
        for (auto [v, e] : adj[cur]) {
          if (e == edge) continue;
          next = v;
          next_edge = e;
          break;
        }
        if (next < 0) break;  // dangling degree-1 interior cannot happen; guard anyway
        used[next_edge] = true;
        chain.nodes.push_back(next);
        chain.edge_indices.push_back(next_edge);
        prev = cur;
        cur = next;
        edge = next_edge;
      }
      (void)prev;
      if (g.has_light()) {
        for (int e : chain.edge_indices)
          if (g.edge_light[e]) chain.light = true;
      }
      chains.push_back(std::move(chain));
    }
  }
  return chains;
}

std::vector<int> coincident_groups(const std::vector<Vec2>& pts, double tol) {
  std::vector<int> parent(pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) parent[i] = static_cast<int>(i);
  std::function<int(int)> find = [&](int i) {
    while (parent[i] != i) {
      parent[i] = parent[parent[i]];
      i = parent[i];
    }
    return i;
  };
  auto unite = [&](int a, int b) {
    a = find(a);
    b = find(b);
    if (a == b) return;
    if (a > b) std::swap(a, b);
    parent[b] = a;
  };

  std::unordered_map<std::uint64_t, std::vector<int>> cells;
  auto cell_key = [](long long cx, long long cy) {
    return static_cast<std::uint64_t>(cx) * 0x9e3779b97f4a7c15ULL ^ static_cast<std::uint64_t>(cy);
  };
  for (std::size_t i = 0; i < pts.size(); ++i) {
    long long cx = static_cast<long long>(std::floor(pts[i].x / tol));
    long long cy = static_cast<long long>(std::floor(pts[i].y / tol));
    for (long long dx = -1; dx <= 1; ++dx)
      for (long long dy = -1; dy <= 1; ++dy) {
        auto it = cells.find(cell_key(cx + dx, cy + dy));
        if (it == cells.end()) continue;
        for (int j : it->second)
          if (dist(pts[i], pts[j]) <= tol) unite(static_cast<int>(i), j);
      }
    cells[cell_key(cx, cy)].push_back(static_cast<int>(i));
  }
  std::vector<int> rep(pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) rep[i] = find(static_cast<int>(i));
  return rep;
}

PlainGraph merge_coincident(const PlainGraph& g, double tol) {
  auto rep = coincident_groups(g.nodes, tol);
  std::vector<int> compact(g.nodes.size(), -1);
  PlainGraph out;
  out.bbox = g.bbox;
  for (std::size_t i = 0; i < g.nodes.size(); ++i) {
    if (rep[i] == static_cast<int>(i)) {
      compact[i] = out.node_count();
      out.nodes.push_back(g.nodes[i]);
    }
  }
  for (std::size_t i = 0; i < g.nodes.size(); ++i) compact[i] = compact[rep[i]];

  std::set<Edge> emitted;
  const bool lights = g.has_light();
  for (int e = 0; e < g.edge_count(); ++e) {
    int a = compact[g.edges[e].first], b = compact[g.edges[e].second];
    if (a == b) continue;
    Edge key{std::min(a, b), std::max(a, b)};
    if (!emitted.insert(key).second) continue;
    out.edges.push_back(key);
    if (lights) out.edge_light.push_back(g.edge_light[e]);
  }
  if (!lights) out.edge_light.clear();
  return out;
}

}  // namespace lanegraph
