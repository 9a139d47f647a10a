#include "lanegraph/synth.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>

#include "lanegraph/error.hpp"
#include "lanegraph/graph_utils.hpp"
#include "lanegraph/rng.hpp"

namespace fs = std::filesystem;

namespace lanegraph {

void CityConfig::check() const {
  if (size_m < 2 * block_m) fail_config("size_m must be at least 2*block_m");
  if (curve_prob < 0 || curve_prob > 1 || light_prob < 0 || light_prob > 1)
    fail_config("probabilities must be in [0,1]");
  if (jitter < 0 || jitter >= 0.5) fail_config("jitter must be in [0, 0.5)");
}

namespace {

constexpr double kSampleSpacing = 2.0;  // meters between lane control points

std::vector<Vec2> straight_samples(Vec2 a, Vec2 b) {
  double len = dist(a, b);
  int n = std::max(1, static_cast<int>(std::ceil(len / kSampleSpacing)));
  std::vector<Vec2> pts;
  pts.reserve(n + 1);
  for (int i = 0; i <= n; ++i) {
    double t = static_cast<double>(i) / n;
    pts.push_back(a + t * (b - a));
  }
  pts.front() = a;
  pts.back() = b;
  return pts;
}

std::vector<Vec2> arc_samples(Vec2 a, Vec2 b, double bulge_fraction, int side) {
  double chord = dist(a, b);
  double h = bulge_fraction * chord;
  double r = h / 2 + chord * chord / (8 * h);
  Vec2 mid = 0.5 * (a + b);
  Vec2 dir = (1.0 / chord) * (b - a);
  Vec2 perp{-dir.y, dir.x};
  Vec2 center = mid - (side * (r - h)) * perp;
  double theta_a = std::atan2(a.y - center.y, a.x - center.x);
  double sweep = 2 * std::asin(std::min(1.0, chord / (2 * r)));
  // choose the rotation direction that passes through the bulge point
  Vec2 bulge = mid + (side * h) * perp;
  auto at = [&](double t, double s) {
    double ang = theta_a + s * t * sweep;
    return Vec2{center.x + r * std::cos(ang), center.y + r * std::sin(ang)};
  };
  double s = dist(at(0.5, 1.0), bulge) < dist(at(0.5, -1.0), bulge) ? 1.0 : -1.0;
  double arc_len = r * sweep;
  int n = std::max(3, static_cast<int>(std::ceil(arc_len / kSampleSpacing)));
  std::vector<Vec2> pts;
  pts.reserve(n + 1);
  for (int i = 0; i <= n; ++i) pts.push_back(at(static_cast<double>(i) / n, s));
  pts.front() = a;
  pts.back() = b;
  return pts;
}

}  // namespace

CityMap generate_city(const CityConfig& cfg) {
  cfg.check();
  Rng rng(derive_seed(cfg.seed, 0xC17F));

  const int m = std::max(2, static_cast<int>(std::llround(cfg.size_m / cfg.block_m)));
  const double spacing = cfg.size_m / m;

  CityMap city;
  PlainGraph& g = city.graph;
  g.bbox = BBox{0, 0, cfg.size_m, cfg.size_m};

  // jittered grid intersections
  std::vector<std::vector<int>> grid(m + 1, std::vector<int>(m + 1));
  for (int i = 0; i <= m; ++i)
    for (int j = 0; j <= m; ++j) {
      Vec2 p{i * spacing, j * spacing};
      p.x += rng.uniform(-cfg.jitter, cfg.jitter) * spacing;
      p.y += rng.uniform(-cfg.jitter, cfg.jitter) * spacing;
      p.x = std::clamp(p.x, 0.0, cfg.size_m);
      p.y = std::clamp(p.y, 0.0, cfg.size_m);
      grid[i][j] = g.node_count();
      g.nodes.push_back(p);
    }

  std::vector<bool> signalized(g.nodes.size());
  for (std::size_t i = 0; i < signalized.size(); ++i) signalized[i] = rng.bernoulli(cfg.light_prob);

  std::vector<std::uint8_t> lane_light;
  auto add_lane = [&](int na, int nb) {
    Vec2 a = g.nodes[na], b = g.nodes[nb];
    std::vector<Vec2> pts;
    if (rng.bernoulli(cfg.curve_prob)) {
      double bulge = rng.uniform(0.035, 0.05);
      int side = rng.bernoulli(0.5) ? 1 : -1;
      pts = arc_samples(a, b, bulge, side);
    } else {
      pts = straight_samples(a, b);
    }
    Lane lane;
    lane.traffic_light = signalized[na] || signalized[nb];
    lane.path.push_back(na);
    int prev = na;
    for (std::size_t i = 1; i + 1 < pts.size(); ++i) {
      int v = g.node_count();
      g.nodes.push_back(pts[i]);
      lane.path.push_back(v);
      g.edges.push_back({prev, v});
      lane_light.push_back(lane.traffic_light ? 1 : 0);
      prev = v;
    }
    g.edges.push_back({prev, nb});
    lane_light.push_back(lane.traffic_light ? 1 : 0);
    lane.path.push_back(nb);
    city.lanes.push_back(std::move(lane));
  };

  // horizontal then vertical segments, row-major
  for (int j = 0; j <= m; ++j)
    for (int i = 0; i < m; ++i) add_lane(grid[i][j], grid[i + 1][j]);
  for (int i = 0; i <= m; ++i)
    for (int j = 0; j < m; ++j) add_lane(grid[i][j], grid[i][j + 1]);

  bool any = std::find(lane_light.begin(), lane_light.end(), 1) != lane_light.end();
  if (any) g.edge_light = std::move(lane_light);
  return city;
}

bool is_validation_patch(std::uint64_t city_index, std::uint64_t patch_index) {
  return splitmix64((city_index << 32) ^ patch_index ^ 0x5157u) % 10 == 0;
}

Json CorpusStats::to_json() const {
  Json j;
  j["n_train"] = n_train;
  j["n_val"] = n_val;
  j["plain"] = {{"nodes_mean", plain_nodes_mean},
                {"nodes_max", plain_nodes_max},
                {"edges_mean", plain_edges_mean},
                {"edges_max", plain_edges_max}};
  j["global"] = {{"nodes_mean", global_nodes_mean},
                 {"nodes_max", global_nodes_max},
                 {"edges_mean", global_edges_mean},
                 {"edges_max", global_edges_max},
                 {"sparsity_ratio", sparsity_ratio}};
  j["local"] = {{"nodes_max", local_nodes_max}};
  j["removal_fraction_mean"] = removal_fraction_mean;
  return j;
}

CorpusStats build_corpus(const CorpusConfig& cfg, const std::string& out_dir) {
  cfg.city.check();
  cfg.patch.check();
  fs::create_directories(fs::path(out_dir) / "train");
  fs::create_directories(fs::path(out_dir) / "val");

  CorpusStats stats;
  double non_edges = 0, edges_total = 0;
  int count = 0;
  char name[64];

  for (int c = 0; c < cfg.n_cities; ++c) {
    CityConfig city_cfg = cfg.city;
    city_cfg.seed = derive_seed(cfg.city.seed, 0xC0DE, static_cast<std::uint64_t>(c));
    CityMap city = generate_city(city_cfg);

    PatchConfig patch_cfg = cfg.patch;
    patch_cfg.seed = derive_seed(cfg.patch.seed, 0x9A7C, static_cast<std::uint64_t>(c));
    auto patches = sample_patches(city.graph, patch_cfg, cfg.patches_per_city);

    for (int p = 0; p < static_cast<int>(patches.size()); ++p) {
      auto dec = decimate_graph(patches[p], cfg.patch.curvature_tol);
      PatchConfig hier_cfg = cfg.patch;
      hier_cfg.seed = derive_seed(cfg.patch.seed, 0xD0, (static_cast<std::uint64_t>(c) << 32) ^ p);
      HierGraph h = build_hierarchical(dec.graph, hier_cfg);

      bool val = is_validation_patch(c, p);
      std::snprintf(name, sizeof(name), "patch_%02d_%04d.json", c, p);
      fs::path file = fs::path(out_dir) / (val ? "val" : "train") / name;
      save_json_file(file.string(), hier_to_json(h));

      stats.plain_nodes_mean += dec.graph.node_count();
      stats.plain_edges_mean += dec.graph.edge_count();
      stats.plain_nodes_max = std::max(stats.plain_nodes_max, dec.graph.node_count());
      stats.plain_edges_max = std::max(stats.plain_edges_max, dec.graph.edge_count());
      int gn = h.node_count(), ge = h.edge_count();
      stats.global_nodes_mean += gn;
      stats.global_edges_mean += ge;
      stats.global_nodes_max = std::max(stats.global_nodes_max, gn);
      stats.global_edges_max = std::max(stats.global_edges_max, ge);
      for (const auto& [e, lp] : h.local_paths) {
        (void)e;
        stats.local_nodes_max = std::max(stats.local_nodes_max, lp.valid_count());
      }
      if (ge > 0) {
        non_edges += gn * (gn - 1) / 2.0 - ge;
        edges_total += ge;
      }
      stats.removal_fraction_mean += dec.removal_fraction();
      (val ? stats.n_val : stats.n_train)++;
      count++;
    }
  }
  if (count > 0) {
    stats.plain_nodes_mean /= count;
    stats.plain_edges_mean /= count;
    stats.global_nodes_mean /= count;
    stats.global_edges_mean /= count;
    stats.removal_fraction_mean /= count;
  }
  if (edges_total > 0) stats.sparsity_ratio = non_edges / edges_total;
  save_json_file((fs::path(out_dir) / "stats.json").string(), stats.to_json());
  return stats;
}

}  // namespace lanegraph
