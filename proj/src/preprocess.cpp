#include "lanegraph/preprocess.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "lanegraph/error.hpp"
#include "lanegraph/graph_utils.hpp"
#include "lanegraph/rng.hpp"

namespace lanegraph {

void PatchConfig::check() const {
  if (fov_m <= 0) fail_config("fov_m must be positive");
  if (max_local_W < 1) fail_config("max_local_W must be >= 1");
  if (curvature_tol < 0 || curvature_tol >= M_PI) fail_config("curvature_tol must be in [0, pi)");
}

namespace {

double turning_angle(Vec2 in_dir, Vec2 out_dir) {
  double a = norm(in_dir), b = norm(out_dir);
  if (a < 1e-12 || b < 1e-12) return 0.0;
  return std::atan2(std::abs(cross(in_dir, out_dir)), dot(in_dir, out_dir));
}

double point_segment_dist(Vec2 p, Vec2 a, Vec2 b) {
  Vec2 ab = b - a;
  double len2 = dot(ab, ab);
  if (len2 < 1e-24) return dist(p, a);
  double t = std::clamp(dot(p - a, ab) / len2, 0.0, 1.0);
  return dist(p, a + t * ab);
}

double polyline_hausdorff(const std::vector<Vec2>& from, const std::vector<Vec2>& to) {
  double worst = 0;
  for (const auto& p : from) {
    double best = std::numeric_limits<double>::max();
    for (std::size_t i = 0; i + 1 < to.size(); ++i)
      best = std::min(best, point_segment_dist(p, to[i], to[i + 1]));
    if (to.size() == 1) best = dist(p, to[0]);
    worst = std::max(worst, best);
  }
  return worst;
}

std::vector<Vec2> decimate_pass(const std::vector<Vec2>& pts, double tol, bool* changed) {
  std::vector<Vec2> kept;
  kept.push_back(pts.front());
  for (std::size_t i = 1; i + 1 < pts.size(); ++i) {
    Vec2 incoming = pts[i] - kept.back();
    Vec2 outgoing = pts[i + 1] - pts[i];
    if (turning_angle(incoming, outgoing) < tol) {
      *changed = true;
      continue;
    }
    kept.push_back(pts[i]);
  }
  kept.push_back(pts.back());
  return kept;
}

}  // namespace

DecimateResult decimate(const std::vector<Vec2>& polyline, double curvature_tol) {
  if (polyline.size() < 2) fail_validation("decimate: degenerate polyline");
  std::vector<Vec2> cur = polyline;
  bool changed = true;
  while (changed && cur.size() > 2) {
    changed = false;
    cur = decimate_pass(cur, curvature_tol, &changed);
  }
  DecimateResult r;
  r.hausdorff = polyline_hausdorff(polyline, cur);
  r.polyline = std::move(cur);
  return r;
}

GraphDecimation decimate_graph(const PlainGraph& g, double curvature_tol) {
  auto keys = key_point_set(g);
  auto chains = extract_chains(g, keys);

  GraphDecimation result;
  result.original = g.node_count();
  PlainGraph& out = result.graph;
  out.bbox = g.bbox;

  std::vector<int> remap(g.nodes.size(), -1);
  for (int k : keys) {
    remap[k] = out.node_count();
    out.nodes.push_back(g.nodes[k]);
  }
  const bool lights = g.has_light();
  for (const auto& chain : chains) {
    std::vector<Vec2> poly;
    poly.reserve(chain.nodes.size());
    for (int v : chain.nodes) poly.push_back(g.nodes[v]);
    auto dec = decimate(poly, curvature_tol);
    result.max_hausdorff = std::max(result.max_hausdorff, dec.hausdorff);

    auto& kept = dec.polyline;
    const bool cycle = chain.nodes.front() == chain.nodes.back();
    std::vector<int> node_seq;
    if (!cycle) {
      node_seq.push_back(remap[chain.nodes.front()]);
      for (std::size_t i = 1; i + 1 < kept.size(); ++i) {
        node_seq.push_back(out.node_count());
        out.nodes.push_back(kept[i]);
      }
      node_seq.push_back(remap[chain.nodes.back()]);
    } else {
      // keep at least two interior points so the cycle stays a simple graph
      std::vector<std::size_t> interior;
      if (kept.size() >= 4) {
        for (std::size_t i = 1; i + 1 < kept.size(); ++i) interior.push_back(i);
      }
      node_seq.push_back(remap[chain.nodes.front()]);
      if (!interior.empty()) {
        for (std::size_t i : interior) {
          node_seq.push_back(out.node_count());
          out.nodes.push_back(kept[i]);
        }
      } else {
        std::size_t n = chain.nodes.size();
        for (std::size_t frac : {n / 3, 2 * n / 3}) {
          std::size_t idx = std::clamp<std::size_t>(frac, 1, n - 2);
          node_seq.push_back(out.node_count());
          out.nodes.push_back(g.nodes[chain.nodes[idx]]);
        }
      }
      node_seq.push_back(remap[chain.nodes.back()]);
    }
    for (std::size_t i = 0; i + 1 < node_seq.size(); ++i) {
      out.edges.push_back({node_seq[i], node_seq[i + 1]});
      if (lights) out.edge_light.push_back(chain.light ? 1 : 0);
    }
  }
  if (!lights) out.edge_light.clear();
  result.removed = result.original - out.node_count();
  return result;
}

std::set<int> extract_keypoints(const PlainGraph& g) { return key_point_set(g); }

std::vector<int> dfs_order_from(const std::vector<std::vector<std::uint8_t>>& adj, int start) {
  const int n = static_cast<int>(adj.size());
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (adj[i][j] != adj[j][i]) fail_validation("dfs_order: asymmetric adjacency");

  std::vector<int> order;
  std::vector<bool> visited(n, false);
  auto dfs = [&](int root) {
    std::vector<int> stack{root};
    while (!stack.empty()) {
      int u = stack.back();
      stack.pop_back();
      if (visited[u]) continue;
      visited[u] = true;
      order.push_back(u);
      for (int v = n - 1; v >= 0; --v)
        if (adj[u][v] && !visited[v]) stack.push_back(v);
    }
  };
  if (n == 0) return order;
  dfs(start);
  for (int i = 0; i < n; ++i)
    if (!visited[i]) dfs(i);
  return order;
}

std::vector<int> dfs_order(const std::vector<std::vector<std::uint8_t>>& adj, std::uint64_t seed) {
  if (adj.empty()) return {};
  Rng rng(derive_seed(seed, 0x0dF5));
  return dfs_order_from(adj, rng.uniform_int(static_cast<int>(adj.size())));
}

HierGraph build_hierarchical(const PlainGraph& g, const PatchConfig& cfg) {
  cfg.check();
  auto report = validate(g);
  if (!report.ok()) fail_validation("build_hierarchical: invalid graph: " + report.joined());

  auto keys = key_point_set(g);
  std::vector<Chain> chains;
  for (int iter = 0;; ++iter) {
    if (iter > 100) fail_internal("build_hierarchical: promotion did not converge");
    chains = extract_chains(g, keys);
    // Resolve chains a boolean adjacency cannot hold: self-chains (pure
    // cycles) and parallel chains between the same key-point pair. Keep the
    // shortest chain of each parallel group, promote the midpoint of every
    // other offender to a key point and retry.
    std::map<Edge, std::vector<const Chain*>> groups;
    std::vector<const Chain*> conflicts;
    for (const auto& c : chains) {
      int a = c.nodes.front(), b = c.nodes.back();
      if (a == b) {
        conflicts.push_back(&c);
        continue;
      }
      groups[{std::min(a, b), std::max(a, b)}].push_back(&c);
    }
    for (auto& [key, group] : groups) {
      (void)key;
      if (group.size() < 2) continue;
      std::stable_sort(group.begin(), group.end(),
                       [](const Chain* x, const Chain* y) { return x->nodes.size() < y->nodes.size(); });
      for (std::size_t i = 1; i < group.size(); ++i) conflicts.push_back(group[i]);
    }
    if (conflicts.empty()) break;
    for (const Chain* c : conflicts) {
      if (c->nodes.size() < 3)
        fail_validation("multi-edge between key points " + std::to_string(c->nodes.front()) + " and " +
                        std::to_string(c->nodes.back()));
      keys.insert(c->nodes[c->nodes.size() / 2]);
    }
  }

  HierGraph h;
  h.W = cfg.max_local_W;
  h.fov_m = cfg.fov_m;
  std::vector<int> remap(g.nodes.size(), -1);
  for (int k : keys) {
    remap[k] = h.node_count();
    h.global_nodes.push_back(g.nodes[k]);
  }
  const int n = h.node_count();
  h.global_adj.assign(n, std::vector<std::uint8_t>(n, 0));

  struct PendingChain {
    Edge e;
    std::vector<Vec2> interior;  // walked from e.first to e.second
    bool light;
  };
  std::vector<PendingChain> pending;
  for (const auto& c : chains) {
    int interior_count = static_cast<int>(c.nodes.size()) - 2;
    if (interior_count > cfg.max_local_W)
      fail_validation("local overflow: chain between nodes " + std::to_string(c.nodes.front()) + " and " +
                      std::to_string(c.nodes.back()) + " has " + std::to_string(interior_count) +
                      " interior points (W=" + std::to_string(cfg.max_local_W) + ")");
    int a = remap[c.nodes.front()], b = remap[c.nodes.back()];
    PendingChain pc;
    pc.light = c.light;
    if (a <= b) {
      pc.e = {a, b};
      for (std::size_t i = 1; i + 1 < c.nodes.size(); ++i) pc.interior.push_back(g.nodes[c.nodes[i]]);
    } else {
      pc.e = {b, a};
      for (std::size_t i = c.nodes.size() - 2; i >= 1; --i) pc.interior.push_back(g.nodes[c.nodes[i]]);
    }
    h.global_adj[pc.e.first][pc.e.second] = 1;
    h.global_adj[pc.e.second][pc.e.first] = 1;
    pending.push_back(std::move(pc));
  }

  h.order = dfs_order(h.global_adj, cfg.seed);
  std::vector<int> pos(n, 0);
  for (int k = 0; k < n; ++k) pos[h.order[k]] = k;

  for (auto& pc : pending) {
    // local path runs from the earlier-generated endpoint to the later one
    if (pos[pc.e.first] > pos[pc.e.second]) std::reverse(pc.interior.begin(), pc.interior.end());
    LocalPath lp;
    lp.coords.assign(h.W, Vec2{});
    lp.mask.assign(h.W, 0);
    for (std::size_t i = 0; i < pc.interior.size(); ++i) {
      lp.coords[i] = pc.interior[i];
      lp.mask[i] = 1;
    }
    h.local_paths[pc.e] = std::move(lp);
    h.semantics[pc.e] = pc.light ? 1 : 0;
  }
  return h;
}

namespace {

// Liang-Barsky clip of segment p0->p1 against an axis-aligned square.
// Returns false when the segment misses the square; otherwise t0/t1 bound the
// inside portion.
bool clip_segment(Vec2 p0, Vec2 p1, const BBox& box, double* t0, double* t1) {
  double t_lo = 0.0, t_hi = 1.0;
  double d[2] = {p1.x - p0.x, p1.y - p0.y};
  double lo[2] = {box.min_x, box.min_y}, hi[2] = {box.max_x, box.max_y};
  double p[2] = {p0.x, p0.y};
  for (int axis = 0; axis < 2; ++axis) {
    if (std::abs(d[axis]) < 1e-15) {
      if (p[axis] < lo[axis] || p[axis] > hi[axis]) return false;
      continue;
    }
    double ta = (lo[axis] - p[axis]) / d[axis];
    double tb = (hi[axis] - p[axis]) / d[axis];
    if (ta > tb) std::swap(ta, tb);
    t_lo = std::max(t_lo, ta);
    t_hi = std::min(t_hi, tb);
    if (t_lo > t_hi) return false;
  }
  *t0 = t_lo;
  *t1 = t_hi;
  return true;
}

}  // namespace

std::vector<PlainGraph> sample_patches(const PlainGraph& map, const PatchConfig& cfg, int n) {
  cfg.check();
  const double fov = cfg.fov_m;
  if (map.bbox.width() < fov || map.bbox.height() < fov)
    fail_validation("sample_patches: map smaller than fov");

  const double half = fov / 2;
  const bool lights = map.has_light();

  auto crop = [&](Vec2 center) {
    BBox box{center.x - half, center.y - half, center.x + half, center.y + half};
    Vec2 corner{box.min_x, box.min_y};
    PlainGraph patch;
    patch.bbox = BBox{0, 0, fov, fov};
    std::vector<int> remap(map.nodes.size(), -1);
    auto inside_node = [&](int v) {
      if (remap[v] >= 0) return remap[v];
      remap[v] = patch.node_count();
      patch.nodes.push_back(map.nodes[v] - corner);
      return remap[v];
    };
    for (int e = 0; e < map.edge_count(); ++e) {
      auto [a, b] = map.edges[e];
      Vec2 pa = map.nodes[a], pb = map.nodes[b];
      double t0, t1;
      if (!clip_segment(pa, pb, box, &t0, &t1) || t1 - t0 < 1e-12) continue;
      int na, nb;
      if (t0 <= 0.0) {
        na = inside_node(a);
      } else {
        na = patch.node_count();
        patch.nodes.push_back(pa + t0 * (pb - pa) - corner);
      }
      if (t1 >= 1.0) {
        nb = inside_node(b);
      } else {
        nb = patch.node_count();
        patch.nodes.push_back(pa + t1 * (pb - pa) - corner);
      }
      patch.edges.push_back({na, nb});
      if (lights) patch.edge_light.push_back(map.edge_light[e]);
    }
    return merge_coincident(patch, 1e-9);
  };

  std::vector<PlainGraph> patches;
  for (int i = 0; i < n; ++i) {
    Rng rng(derive_seed(cfg.seed, 0xA7C4, static_cast<std::uint64_t>(i)));
    bool done = false;
    for (int attempt = 0; attempt < 100 && !done; ++attempt) {
      Vec2 center{map.bbox.min_x + half + rng.uniform() * (map.bbox.width() - fov),
                  map.bbox.min_y + half + rng.uniform() * (map.bbox.height() - fov)};
      PlainGraph patch = crop(center);
      if (patch.edges.empty()) continue;
      patches.push_back(std::move(patch));
      done = true;
    }
    if (!done) fail_validation("sample_patches: sparse map");
  }
  return patches;
}

NormalizedHier normalize(const HierGraph& h, double fov_m) {
  if (fov_m <= 0) fail_config("normalize: fov must be positive");
  NormTransform t{fov_m};
  const double eps = 1e-9 * fov_m;
  auto check = [&](Vec2 p) {
    if (p.x < -eps || p.y < -eps || p.x > fov_m + eps || p.y > fov_m + eps)
      fail_validation("normalize: coordinate outside fov square");
  };
  NormalizedHier out;
  out.transform = t;
  out.graph = h;
  for (auto& p : out.graph.global_nodes) {
    check(p);
    p = t.forward(p);
  }
  for (auto& [e, lp] : out.graph.local_paths) {
    (void)e;
    for (int w = 0; w < out.graph.W; ++w) {
      if (lp.mask[w]) {
        check(lp.coords[w]);
        lp.coords[w] = t.forward(lp.coords[w]);
      } else {
        lp.coords[w] = {0, 0};
      }
    }
  }
  return out;
}

HierGraph denormalize(const HierGraph& h, const NormTransform& t) {
  HierGraph out = h;
  out.fov_m = t.fov_m;
  for (auto& p : out.global_nodes) p = t.inverse(p);
  for (auto& [e, lp] : out.local_paths) {
    (void)e;
    for (int w = 0; w < out.W; ++w) {
      if (lp.mask[w])
        lp.coords[w] = t.inverse(lp.coords[w]);
      else
        lp.coords[w] = {0, 0};
    }
  }
  return out;
}

}  // namespace lanegraph
