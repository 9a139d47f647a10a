#include "lanegraph/metrics.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <unordered_map>

#include "lanegraph/error.hpp"
#include "lanegraph/graph_utils.hpp"

namespace lanegraph {

std::vector<double> degree_hist(const PlainGraph& g) {
  if (g.nodes.empty()) fail_validation("degree_hist: empty graph");
  auto deg = node_degrees(g);
  int max_deg = *std::max_element(deg.begin(), deg.end());
  std::vector<double> hist(max_deg + 1, 0.0);
  for (int d : deg) hist[d] += 1.0;
  return hist;
}

std::vector<double> laplacian_eigenvalues(const PlainGraph& g) {
  if (g.nodes.empty()) fail_validation("laplacian_spectrum: empty graph");
  const int n = g.node_count();
  auto deg = node_degrees(g);
  Eigen::MatrixXd L = Eigen::MatrixXd::Identity(n, n);
  for (auto [a, b] : g.edges) {
    double w = 1.0 / std::sqrt(double(deg[a]) * deg[b]);
    L(a, b) -= w;
    L(b, a) -= w;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(L, Eigen::EigenvaluesOnly);
  std::vector<double> ev(solver.eigenvalues().data(), solver.eigenvalues().data() + n);
  std::sort(ev.begin(), ev.end());
  return ev;
}

std::vector<double> laplacian_spectrum_hist(const PlainGraph& g, int bins) {
  auto ev = laplacian_eigenvalues(g);
  std::vector<double> hist(bins, 0.0);
  for (double v : ev) {
    int b = static_cast<int>(std::floor(v / 2.0 * bins));
    b = std::clamp(b, 0, bins - 1);
    hist[b] += 1.0;
  }
  return hist;
}

double wasserstein1_hist(const std::vector<double>& a, const std::vector<double>& b,
                         double bin_width) {
  std::size_t n = std::max(a.size(), b.size());
  double sum_a = 0, sum_b = 0;
  for (double v : a) sum_a += v;
  for (double v : b) sum_b += v;
  if (sum_a <= 0 || sum_b <= 0) fail_validation("wasserstein1: empty histogram");
  double cum = 0, dist = 0;
  for (std::size_t i = 0; i < n; ++i) {
    double pa = i < a.size() ? a[i] / sum_a : 0;
    double pb = i < b.size() ? b[i] / sum_b : 0;
    cum += pa - pb;
    dist += std::abs(cum) * bin_width;
  }
  return dist;
}

double mmd(const std::vector<std::vector<double>>& set_a,
           const std::vector<std::vector<double>>& set_b, double sigma, double bin_width) {
  if (set_a.empty() || set_b.empty()) fail_validation("mmd: empty set");
  if (sigma <= 0) fail_validation("mmd: sigma must be positive");
  auto kernel = [&](const std::vector<double>& p, const std::vector<double>& q) {
    double w = wasserstein1_hist(p, q, bin_width);
    return std::exp(-w * w / (2 * sigma * sigma));
  };
  double kaa = 0, kbb = 0, kab = 0;
  for (const auto& p : set_a)
    for (const auto& q : set_a) kaa += kernel(p, q);
  for (const auto& p : set_b)
    for (const auto& q : set_b) kbb += kernel(p, q);
  for (const auto& p : set_a)
    for (const auto& q : set_b) kab += kernel(p, q);
  double m = static_cast<double>(set_a.size()), n = static_cast<double>(set_b.size());
  return kaa / (m * m) + kbb / (n * n) - 2 * kab / (m * n);
}

double median_heuristic_sigma(const std::vector<std::vector<double>>& reference,
                              double bin_width) {
  std::vector<double> dists;
  for (std::size_t i = 0; i < reference.size(); ++i)
    for (std::size_t j = i + 1; j < reference.size(); ++j)
      dists.push_back(wasserstein1_hist(reference[i], reference[j], bin_width));
  if (dists.empty()) return 1.0;
  std::sort(dists.begin(), dists.end());
  double med = dists[dists.size() / 2];
  return med > 1e-12 ? med : 1.0;
}

double frechet_normal(const std::vector<double>& feat_a, const std::vector<double>& feat_b) {
  if (feat_a.size() < 2 || feat_b.size() < 2)
    fail_validation("frechet_normal: need at least two samples per side");
  auto moments = [](const std::vector<double>& v) {
    double mean = 0;
    for (double x : v) mean += x;
    mean /= v.size();
    double var = 0;
    for (double x : v) var += (x - mean) * (x - mean);
    var /= v.size();
    return std::pair<double, double>(mean, std::sqrt(var));
  };
  auto [ma, sa] = moments(feat_a);
  auto [mb, sb] = moments(feat_b);
  return (ma - mb) * (ma - mb) + (sa - sb) * (sa - sb);
}

namespace {

std::vector<double> dijkstra(const PlainGraph& g,
                             const std::vector<std::vector<std::pair<int, double>>>& adj,
                             int source) {
  std::vector<double> dist(g.nodes.size(), std::numeric_limits<double>::infinity());
  using Item = std::pair<double, int>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
  dist[source] = 0;
  heap.push({0, source});
  while (!heap.empty()) {
    auto [d, u] = heap.top();
    heap.pop();
    if (d > dist[u]) continue;
    for (auto [v, w] : adj[u])
      if (d + w < dist[v]) {
        dist[v] = d + w;
        heap.push({dist[v], v});
      }
  }
  return dist;
}

}  // namespace

FeatureSample urban_features(const PlainGraph& g, double region_radius, int n_probes, Rng& rng) {
  if (g.nodes.empty()) fail_validation("urban_features: empty graph");
  FeatureSample f;
  const int n = g.node_count();

  f.connectivity = n ? 2.0 * g.edge_count() / n : 0;

  auto chains = extract_chains(g);
  if (!chains.empty()) {
    double total = 0;
    for (const auto& c : chains) {
      double len = 0;
      for (std::size_t i = 0; i + 1 < c.nodes.size(); ++i)
        len += dist(g.nodes[c.nodes[i]], g.nodes[c.nodes[i + 1]]);
      total += len;
    }
    f.length = total / chains.size();
  }

  if (!g.edges.empty()) {
    double total = 0;
    for (auto [a, b] : g.edges) {
      Vec2 d = g.nodes[b] - g.nodes[a];
      double ang = std::atan2(d.y, d.x);
      ang = std::fmod(ang, M_PI);
      if (ang < 0) ang += M_PI;
      ang = std::fmod(ang, M_PI / 2);
      total += ang;
    }
    f.orientation = total / g.edge_count();
  }

  // density and reach from random probe points
  std::vector<std::vector<int>> nbrs(n);
  for (auto [a, b] : g.edges) {
    nbrs[a].push_back(b);
    nbrs[b].push_back(a);
  }
  double density_sum = 0, reach_sum = 0;
  for (int p = 0; p < n_probes; ++p) {
    Vec2 probe{rng.uniform(g.bbox.min_x, g.bbox.max_x), rng.uniform(g.bbox.min_y, g.bbox.max_y)};
    std::vector<bool> inside(n, false);
    int count = 0, nearest = -1;
    double best = std::numeric_limits<double>::infinity();
    for (int v = 0; v < n; ++v) {
      double d = dist(g.nodes[v], probe);
      if (d <= region_radius) {
        inside[v] = true;
        count++;
      }
      if (d < best) {
        best = d;
        nearest = v;
      }
    }
    density_sum += count;
    if (nearest >= 0 && inside[nearest]) {
      std::vector<bool> visited(n, false);
      std::queue<int> q;
      q.push(nearest);
      visited[nearest] = true;
      while (!q.empty()) {
        int u = q.front();
        q.pop();
        for (int v : nbrs[u])
          if (inside[v] && !visited[v]) {
            visited[v] = true;
            q.push(v);
          }
      }
      int edges_in = 0;
      for (auto [a, b] : g.edges) edges_in += (visited[a] && visited[b]);
      reach_sum += edges_in;
    }
  }
  if (n_probes > 0) {
    f.density = density_sum / n_probes;
    f.reach = reach_sum / n_probes;
  }

  // convenience: mean Dijkstra distance over connected node pairs; all pairs
  // when few enough, otherwise a seeded sample
  std::vector<std::vector<std::pair<int, double>>> wadj(n);
  for (auto [a, b] : g.edges) {
    double w = dist(g.nodes[a], g.nodes[b]);
    wadj[a].push_back({b, w});
    wadj[b].push_back({a, w});
  }
  auto comp = connected_components(g);
  std::unordered_map<int, long> comp_size;
  for (int c : comp) comp_size[c]++;
  long total_pairs = 0;
  for (auto& [c, sz] : comp_size) {
    (void)c;
    total_pairs += sz * (sz - 1) / 2;
  }
  if (total_pairs == 0) {
    f.convenience_ok = false;
  } else if (total_pairs <= n_probes) {
    double sum = 0;
    long cnt = 0;
    for (int u = 0; u < n; ++u) {
      auto d = dijkstra(g, wadj, u);
      for (int v = u + 1; v < n; ++v)
        if (std::isfinite(d[v])) {
          sum += d[v];
          cnt++;
        }
    }
    f.convenience = cnt ? sum / cnt : 0;
    f.convenience_ok = cnt > 0;
  } else {
    double sum = 0;
    int got = 0;
    for (int attempt = 0; attempt < 50 * n_probes && got < n_probes; ++attempt) {
      int u = rng.uniform_int(n), v = rng.uniform_int(n);
      if (u == v || comp[u] != comp[v]) continue;
      auto d = dijkstra(g, wadj, u);
      if (!std::isfinite(d[v])) continue;
      sum += d[v];
      got++;
    }
    f.convenience = got ? sum / got : 0;
    f.convenience_ok = got > 0;
  }
  return f;
}

namespace {

// Uniform-grid nearest neighbor; exact via expanding ring search.
class GridIndex {
 public:
  explicit GridIndex(const std::vector<Vec2>& pts) : pts_(pts) {
    BBox bb = compute_bbox(pts);
    double span = std::max({bb.width(), bb.height(), 1e-9});
    cell_ = span / std::max(1.0, std::sqrt(static_cast<double>(pts.size())));
    for (std::size_t i = 0; i < pts.size(); ++i) cells_[key(pts[i])].push_back(static_cast<int>(i));
  }

  double nearest_sq(Vec2 q) const {
    long long cx = static_cast<long long>(std::floor(q.x / cell_));
    long long cy = static_cast<long long>(std::floor(q.y / cell_));
    double best = std::numeric_limits<double>::infinity();
    for (int ring = 0; ring < (1 << 20); ++ring) {
      for (long long dx = -ring; dx <= ring; ++dx)
        for (long long dy = -ring; dy <= ring; ++dy) {
          if (std::max(std::abs(dx), std::abs(dy)) != ring) continue;
          auto it = cells_.find(key_cell(cx + dx, cy + dy));
          if (it == cells_.end()) continue;
          for (int i : it->second) {
            double d2 =
                (pts_[i].x - q.x) * (pts_[i].x - q.x) + (pts_[i].y - q.y) * (pts_[i].y - q.y);
            best = std::min(best, d2);
          }
        }
      // candidates beyond ring r are at least (r)*cell away from q's cell
      if (std::isfinite(best) && static_cast<double>(ring) * cell_ >= std::sqrt(best)) break;
    }
    return best;
  }

 private:
  std::uint64_t key(Vec2 p) const {
    return key_cell(static_cast<long long>(std::floor(p.x / cell_)),
                    static_cast<long long>(std::floor(p.y / cell_)));
  }
  static std::uint64_t key_cell(long long cx, long long cy) {
    return static_cast<std::uint64_t>(cx) * 0x9e3779b97f4a7c15ULL ^ static_cast<std::uint64_t>(cy);
  }
  const std::vector<Vec2>& pts_;
  double cell_ = 1;
  std::unordered_map<std::uint64_t, std::vector<int>> cells_;
};

}  // namespace

double chamfer(const std::vector<Vec2>& a, const std::vector<Vec2>& b) {
  if (a.empty() || b.empty()) fail_validation("chamfer: empty point set");
  GridIndex ia(a), ib(b);
  double ab = 0, ba = 0;
  for (const auto& p : a) ab += ib.nearest_sq(p);
  for (const auto& p : b) ba += ia.nearest_sq(p);
  return ab / a.size() + ba / b.size();
}

DiversityReport diversity_report(const std::vector<std::vector<Vec2>>& samples,
                                 const std::vector<std::vector<Vec2>>& reference) {
  if (samples.empty()) fail_validation("diversity_report: no samples");
  DiversityReport r;
  if (!reference.empty()) {
    double sum = 0;
    for (const auto& s : samples) {
      double best = std::numeric_limits<double>::infinity();
      for (const auto& ref : reference) best = std::min(best, chamfer(s, ref));
      sum += best;
    }
    r.chamfer_to_gt = 1e4 * sum / samples.size();
  }
  if (samples.size() >= 2) {
    double sum = 0;
    long cnt = 0;
    for (std::size_t i = 0; i < samples.size(); ++i)
      for (std::size_t j = i + 1; j < samples.size(); ++j) {
        sum += chamfer(samples[i], samples[j]);
        cnt++;
      }
    r.chamfer_internal = 1e4 * sum / cnt;
  }
  return r;
}

std::vector<Vec2> normalized_points(const PlainGraph& g, double fov_m) {
  std::vector<Vec2> pts;
  pts.reserve(g.nodes.size());
  const double half = fov_m / 2;
  for (const auto& p : g.nodes) pts.push_back({p.x / half - 1.0, p.y / half - 1.0});
  return pts;
}

int dead_end_count(const PlainGraph& g, double fov_m, double margin_fraction) {
  auto deg = node_degrees(g);
  const double margin = fov_m * margin_fraction;
  int count = 0;
  for (int v = 0; v < g.node_count(); ++v) {
    if (deg[v] != 1) continue;
    const Vec2& p = g.nodes[v];
    if (p.x > margin && p.x < fov_m - margin && p.y > margin && p.y < fov_m - margin) count++;
  }
  return count;
}

Json MetricsReport::to_json() const {
  Json j;
  j["mmd"] = {{"degree", mmd_degree}, {"spectrum", mmd_spectrum}};
  Json fr = Json::object();
  for (const auto& [name, value] : frechet) fr[name] = value;
  j["frechet"] = fr;
  j["chamfer"] = {{"to_gt", chamfer_to_gt}, {"internal", chamfer_internal}};
  j["n_samples"] = n_samples;
  j["n_reference"] = n_reference;
  j["meta"] = meta;
  return j;
}

MetricsReport compute_report(const std::vector<PlainGraph>& samples,
                             const std::vector<PlainGraph>& reference, double fov_m,
                             const MetricsConfig& cfg) {
  if (samples.empty() || reference.empty())
    fail_validation("compute_report: empty sample or reference set");
  MetricsReport rep;
  rep.n_samples = static_cast<int>(samples.size());
  rep.n_reference = static_cast<int>(reference.size());

  auto hists = [&](const std::vector<PlainGraph>& maps, bool spectrum) {
    std::vector<std::vector<double>> out;
    for (const auto& g : maps)
      out.push_back(spectrum ? laplacian_spectrum_hist(g, cfg.spectrum_bins) : degree_hist(g));
    return out;
  };
  auto deg_s = hists(samples, false), deg_r = hists(reference, false);
  double sigma_deg = cfg.sigma_degree > 0 ? cfg.sigma_degree : median_heuristic_sigma(deg_r, 1.0);
  rep.mmd_degree = mmd(deg_s, deg_r, sigma_deg, 1.0);

  const double spec_w = 2.0 / cfg.spectrum_bins;
  auto spec_s = hists(samples, true), spec_r = hists(reference, true);
  double sigma_spec =
      cfg.sigma_spectrum > 0 ? cfg.sigma_spectrum : median_heuristic_sigma(spec_r, spec_w);
  rep.mmd_spectrum = mmd(spec_s, spec_r, sigma_spec, spec_w);

  auto features = [&](const std::vector<PlainGraph>& maps, std::uint64_t salt) {
    std::vector<FeatureSample> out;
    for (std::size_t i = 0; i < maps.size(); ++i) {
      Rng rng(derive_seed(cfg.seed, salt, i));
      out.push_back(urban_features(maps[i], cfg.region_radius, cfg.n_probes, rng));
    }
    return out;
  };
  auto fs = features(samples, 0xFA), fr = features(reference, 0xFB);
  auto collect = [](const std::vector<FeatureSample>& v, auto getter, bool only_ok) {
    std::vector<double> out;
    for (const auto& f : v)
      if (!only_ok || f.convenience_ok) out.push_back(getter(f));
    return out;
  };
  auto add_frechet = [&](const std::string& name, auto getter, bool only_ok = false) {
    auto a = collect(fs, getter, only_ok);
    auto b = collect(fr, getter, only_ok);
    if (a.size() >= 2 && b.size() >= 2)
      rep.frechet.push_back({name, frechet_normal(a, b)});
    else
      rep.meta[name + "_omitted"] = true;
  };
  add_frechet("connectivity", [](const FeatureSample& f) { return f.connectivity; });
  add_frechet("density", [](const FeatureSample& f) { return f.density; });
  add_frechet("reach", [](const FeatureSample& f) { return f.reach; });
  add_frechet(
      "convenience", [](const FeatureSample& f) { return f.convenience; }, true);
  add_frechet("length", [](const FeatureSample& f) { return f.length; });
  add_frechet("orientation", [](const FeatureSample& f) { return f.orientation; });

  std::vector<std::vector<Vec2>> pts_s, pts_r;
  for (const auto& g : samples) pts_s.push_back(normalized_points(g, fov_m));
  for (const auto& g : reference) pts_r.push_back(normalized_points(g, fov_m));
  auto div = diversity_report(pts_s, pts_r);
  rep.chamfer_to_gt = div.chamfer_to_gt;
  rep.chamfer_internal = div.chamfer_internal;

  rep.meta["seed"] = cfg.seed;
  rep.meta["sigma_degree"] = sigma_deg;
  rep.meta["sigma_spectrum"] = sigma_spec;
  rep.meta["region_radius"] = cfg.region_radius;
  rep.meta["n_probes"] = cfg.n_probes;
  rep.meta["spectrum_bins"] = cfg.spectrum_bins;
  return rep;
}

}  // namespace lanegraph
