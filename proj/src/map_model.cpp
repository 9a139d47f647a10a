#include "lanegraph/map_model.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <set>
#include <unordered_map>

#include "lanegraph/error.hpp"
#include "lanegraph/graph_utils.hpp"

namespace lanegraph {

BBox compute_bbox(const std::vector<Vec2>& nodes) {
  BBox b;
  if (nodes.empty()) return b;
  b.min_x = b.max_x = nodes[0].x;
  b.min_y = b.max_y = nodes[0].y;
  for (const auto& p : nodes) {
    b.min_x = std::min(b.min_x, p.x);
    b.max_x = std::max(b.max_x, p.x);
    b.min_y = std::min(b.min_y, p.y);
    b.max_y = std::max(b.max_y, p.y);
  }
  return b;
}

ValidationReport validate(const PlainGraph& g) {
  ValidationReport r;
  const int n = g.node_count();
  std::set<Edge> seen;
  for (auto [a, b] : g.edges) {
    if (a < 0 || b < 0 || a >= n || b >= n) {
      r.violations.push_back("edge index out of range");
      continue;
    }
    if (a == b) r.violations.push_back("self-loop");
    Edge key{std::min(a, b), std::max(a, b)};
    if (!seen.insert(key).second) r.violations.push_back("duplicate edge");
  }
  if (!g.edge_light.empty() && g.edge_light.size() != g.edges.size())
    r.violations.push_back("semantic flag count mismatch");

  auto rep = coincident_groups(g.nodes, 1e-9);
  for (std::size_t i = 0; i < rep.size(); ++i)
    if (rep[i] != static_cast<int>(i)) {
      r.violations.push_back("duplicate node coordinates");
      break;
    }
  return r;
}

ValidationReport validate(const HierGraph& h) {
  ValidationReport r;
  const int n = h.node_count();
  if (static_cast<int>(h.global_adj.size()) != n) {
    r.violations.push_back("adjacency shape mismatch");
    return r;
  }
  for (int i = 0; i < n; ++i) {
    if (static_cast<int>(h.global_adj[i].size()) != n) {
      r.violations.push_back("adjacency shape mismatch");
      return r;
    }
    if (h.global_adj[i][i]) r.violations.push_back("nonzero adjacency diagonal");
    for (int j = 0; j < n; ++j)
      if (h.global_adj[i][j] != h.global_adj[j][i]) {
        r.violations.push_back("asymmetric adjacency");
        i = n;
        break;
      }
  }
  if (h.W < 0) r.violations.push_back("negative W");

  auto check_key = [&](const Edge& e, const char* what) {
    if (e.first < 0 || e.second < 0 || e.first >= n || e.second >= n || e.first >= e.second ||
        !h.global_adj[e.first][e.second]) {
      r.violations.push_back(std::string(what) + " key not a global edge");
      return false;
    }
    return true;
  };
  for (const auto& [e, lp] : h.local_paths) {
    if (!check_key(e, "local path")) continue;
    if (static_cast<int>(lp.coords.size()) != h.W || static_cast<int>(lp.mask.size()) != h.W) {
      r.violations.push_back("local path size != W");
      continue;
    }
    bool seen_zero = false;
    for (auto m : lp.mask) {
      if (!m) seen_zero = true;
      else if (seen_zero) {
        r.violations.push_back("non-prefix mask");
        break;
      }
    }
  }
  for (const auto& [e, flag] : h.semantics) {
    (void)flag;
    check_key(e, "semantics");
  }

  if (static_cast<int>(h.order.size()) != n) {
    r.violations.push_back("order not a permutation");
  } else {
    std::vector<bool> hit(n, false);
    for (int v : h.order) {
      if (v < 0 || v >= n || hit[v]) {
        r.violations.push_back("order not a permutation");
        break;
      }
      hit[v] = true;
    }
  }
  return r;
}

ValidationReport validate(const SequenceRep& s) {
  ValidationReport r;
  if (s.steps.empty()) {
    r.violations.push_back("empty sequence");
    return r;
  }
  int terminal = 0;
  for (const auto& st : s.steps) {
    if (st.q < 1 || st.q > 3) {
      r.violations.push_back("state out of range");
      break;
    }
    if (st.q == 3) terminal++;
  }
  if (terminal != 1 || s.steps.back().q != 3) r.violations.push_back("terminal state misplaced");
  return r;
}

PlainGraph flatten(const HierGraph& h) {
  auto report = validate(h);
  if (!report.ok()) fail_validation("flatten: invalid HierGraph: " + report.joined());

  std::vector<Vec2> pts(h.global_nodes);
  std::vector<int> pos(h.node_count());
  for (int k = 0; k < h.node_count(); ++k) pos[h.order[k]] = k;
  // chain node indices per global edge, walked in the stored local-path
  // direction: earlier-generated endpoint first
  std::vector<std::pair<Edge, std::vector<int>>> chains;
  bool any_light = false;
  for (auto e : h.edge_list()) {
    int from = e.first, to = e.second;
    if (pos[from] > pos[to]) std::swap(from, to);
    std::vector<int> seq{from};
    auto it = h.local_paths.find(e);
    if (it != h.local_paths.end()) {
      for (int w = 0; w < h.W; ++w) {
        if (!it->second.mask[w]) break;
        seq.push_back(static_cast<int>(pts.size()));
        pts.push_back(it->second.coords[w]);
      }
    }
    seq.push_back(to);
    chains.push_back({e, std::move(seq)});
    auto s = h.semantics.find(e);
    if (s != h.semantics.end() && s->second) any_light = true;
  }

  auto rep = coincident_groups(pts, kMergeTolerance);
  std::vector<int> compact(pts.size(), -1);
  PlainGraph out;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if (rep[i] == static_cast<int>(i)) {
      compact[i] = out.node_count();
      out.nodes.push_back(pts[i]);
    }
  }
  for (std::size_t i = 0; i < pts.size(); ++i) compact[i] = compact[rep[i]];

  std::set<Edge> emitted;
  for (const auto& [ge, seq] : chains) {
    bool light = false;
    if (any_light) {
      auto s = h.semantics.find(ge);
      light = s != h.semantics.end() && s->second;
    }
    for (std::size_t i = 0; i + 1 < seq.size(); ++i) {
      int a = compact[seq[i]], b = compact[seq[i + 1]];
      if (a == b) continue;  // merged-away segment
      Edge key{std::min(a, b), std::max(a, b)};
      if (!emitted.insert(key).second) continue;
      out.edges.push_back(key);
      if (any_light) out.edge_light.push_back(light ? 1 : 0);
    }
  }
  if (h.fov_m > 0)
    out.bbox = BBox{0, 0, h.fov_m, h.fov_m};
  else
    out.bbox = compute_bbox(out.nodes);
  return out;
}

SequenceRep to_sequence(const PlainGraph& g, OriginRule rule) {
  (void)rule;  // single rule: ascending spatial order
  if (g.nodes.empty() || g.edges.empty()) fail_validation("to_sequence: empty map");
  auto report = validate(g);
  if (!report.ok()) fail_validation("to_sequence: invalid graph: " + report.joined());

  auto chains = extract_chains(g);
  // Orient each path from its lexicographically smaller endpoint.
  std::vector<std::vector<int>> paths;
  paths.reserve(chains.size());
  for (auto& c : chains) {
    auto nodes = c.nodes;
    int a = nodes.front(), b = nodes.back();
    auto less = [&](int u, int v) {
      const Vec2 &pu = g.nodes[u], &pv = g.nodes[v];
      if (pu.x != pv.x) return pu.x < pv.x;
      if (pu.y != pv.y) return pu.y < pv.y;
      return u < v;
    };
    if (a != b && less(b, a)) std::reverse(nodes.begin(), nodes.end());
    paths.push_back(std::move(nodes));
  }
  std::sort(paths.begin(), paths.end(), [&](const auto& p, const auto& q) {
    const Vec2 &sp = g.nodes[p.front()], &sq = g.nodes[q.front()];
    if (sp.x != sq.x) return sp.x < sq.x;
    if (sp.y != sq.y) return sp.y < sq.y;
    if (p.front() != q.front()) return p.front() < q.front();
    return p[1] < q[1];
  });

  SequenceRep out;
  out.origin = g.nodes[paths[0].front()];
  Vec2 cur = out.origin;
  for (std::size_t pi = 0; pi < paths.size(); ++pi) {
    const auto& path = paths[pi];
    const bool last_path = (pi + 1 == paths.size());
    if (pi > 0) {
      // pen-up jump to the new path's start; not drawn on reconstruction
      Vec2 s = g.nodes[path.front()];
      out.steps.push_back({s.x - cur.x, s.y - cur.y, 2});
      cur = s;
    }
    for (std::size_t i = 1; i < path.size(); ++i) {
      Vec2 p = g.nodes[path[i]];
      int q = 2;
      if (i + 1 == path.size()) q = last_path ? 3 : 1;
      out.steps.push_back({p.x - cur.x, p.y - cur.y, q});
      cur = p;
    }
  }
  return out;
}

std::vector<Vec2> sequence_points(const SequenceRep& s) {
  std::vector<Vec2> pts{s.origin};
  Vec2 cur = s.origin;
  for (const auto& st : s.steps) {
    cur = {cur.x + st.dx, cur.y + st.dy};
    pts.push_back(cur);
  }
  return pts;
}

}  // namespace lanegraph
