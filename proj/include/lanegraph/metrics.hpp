#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "lanegraph/json_io.hpp"
#include "lanegraph/map_model.hpp"
#include "lanegraph/rng.hpp"

namespace lanegraph {

// Per-map scalar features for urban-planning fidelity.
struct FeatureSample {
  double length = 0;        // mean lane (chain) length, meters
  double orientation = 0;   // mean segment angle folded to [0, pi/2)
  double connectivity = 0;  // mean node degree
  double density = 0;       // mean node count within a region
  double reach = 0;         // mean accessible edges within a region
  double convenience = 0;   // mean Dijkstra shortest-path length, meters
  bool convenience_ok = true;
};

struct MetricsConfig {
  double region_radius = 20.0;
  int n_probes = 32;
  int spectrum_bins = 200;
  std::uint64_t seed = 0;
  double sigma_degree = 0;    // 0 = median heuristic over the reference set
  double sigma_spectrum = 0;  // 0 = median heuristic
};

struct MetricsReport {
  double mmd_degree = 0;
  double mmd_spectrum = 0;
  std::vector<std::pair<std::string, double>> frechet;  // per feature name
  double chamfer_to_gt = 0;    // x 1e4
  double chamfer_internal = 0; // x 1e4
  int n_samples = 0;
  int n_reference = 0;
  Json meta;
  Json to_json() const;
};

// Degree histogram over 0..max_degree (raw counts).
std::vector<double> degree_hist(const PlainGraph& g);

// Eigenvalues of the normalized Laplacian binned over [0,2]; isolated nodes
// contribute eigenvalue 1.
std::vector<double> laplacian_spectrum_hist(const PlainGraph& g, int bins);
std::vector<double> laplacian_eigenvalues(const PlainGraph& g);

// First Wasserstein distance between two histograms (normalized internally).
double wasserstein1_hist(const std::vector<double>& a, const std::vector<double>& b,
                         double bin_width);

// Squared maximum mean discrepancy with kernel exp(-W1^2 / (2 sigma^2));
// biased V-statistic.
double mmd(const std::vector<std::vector<double>>& set_a,
           const std::vector<std::vector<double>>& set_b, double sigma, double bin_width);

double median_heuristic_sigma(const std::vector<std::vector<double>>& reference, double bin_width);

// Squared Frechet distance between fitted 1D normals.
double frechet_normal(const std::vector<double>& feat_a, const std::vector<double>& feat_b);

FeatureSample urban_features(const PlainGraph& g, double region_radius, int n_probes, Rng& rng);

// Symmetric Chamfer distance (mean squared nearest-neighbor both ways).
double chamfer(const std::vector<Vec2>& a, const std::vector<Vec2>& b);

struct DiversityReport {
  double chamfer_to_gt = 0;    // x 1e4
  double chamfer_internal = 0; // x 1e4
};
DiversityReport diversity_report(const std::vector<std::vector<Vec2>>& samples,
                                 const std::vector<std::vector<Vec2>>& reference);

// All control points of a map scaled into [-1,1]^2 for Chamfer comparisons.
std::vector<Vec2> normalized_points(const PlainGraph& g, double fov_m);

MetricsReport compute_report(const std::vector<PlainGraph>& samples,
                             const std::vector<PlainGraph>& reference, double fov_m,
                             const MetricsConfig& cfg);

// Interior dead ends: degree-1 nodes farther than margin from the fov border.
int dead_end_count(const PlainGraph& g, double fov_m, double margin_fraction = 0.05);

}  // namespace lanegraph
