#pragma once

#include <cstdint>
#include <set>
#include <vector>

#include "lanegraph/map_model.hpp"

namespace lanegraph {

struct PatchConfig {
  double fov_m = 200.0;
  int max_local_W = 8;
  double curvature_tol = 0.025;  // radians; calibrated against the synthetic corpus
  std::uint64_t seed = 0;

  void check() const;
};

struct DecimateResult {
  std::vector<Vec2> polyline;
  double hausdorff = 0;  // distance from the input polyline to the output
};

// Removes interior points whose turning angle is below tol, iterated to a
// fixed point so the result is idempotent. Endpoints are always kept.
DecimateResult decimate(const std::vector<Vec2>& polyline, double curvature_tol);

// Runs decimate over every chain of the graph and rebuilds it.
struct GraphDecimation {
  PlainGraph graph;
  int removed = 0;
  int original = 0;
  double max_hausdorff = 0;
  double removal_fraction() const { return original ? double(removed) / original : 0.0; }
};
GraphDecimation decimate_graph(const PlainGraph& g, double curvature_tol);

// Nodes of degree != 2, plus one promoted node per pure degree-2 cycle.
std::set<int> extract_keypoints(const PlainGraph& g);

// DFS visitation order. Start node uniform by seed; neighbors ascending;
// remaining components entered at their smallest unvisited index.
std::vector<int> dfs_order(const std::vector<std::vector<std::uint8_t>>& adj, std::uint64_t seed);
std::vector<int> dfs_order_from(const std::vector<std::vector<std::uint8_t>>& adj, int start);

HierGraph build_hierarchical(const PlainGraph& g, const PatchConfig& cfg);

// Axis-aligned square crops at random centers; boundary edges are clipped
// with new endpoint nodes; empty patches are rejected and resampled.
std::vector<PlainGraph> sample_patches(const PlainGraph& map, const PatchConfig& cfg, int n);

struct NormTransform {
  double fov_m = 0;
  // meters -> [-1,1]^2 over the fov square anchored at the origin corner
  Vec2 forward(Vec2 p) const { return {2.0 * p.x / fov_m - 1.0, 2.0 * p.y / fov_m - 1.0}; }
  Vec2 inverse(Vec2 p) const { return {(p.x + 1.0) * fov_m / 2.0, (p.y + 1.0) * fov_m / 2.0}; }
};

struct NormalizedHier {
  HierGraph graph;
  NormTransform transform;
};

// Maps all coordinates of the fov square onto [-1,1]^2. Errors when a
// coordinate falls outside the square.
NormalizedHier normalize(const HierGraph& h, double fov_m);
HierGraph denormalize(const HierGraph& h, const NormTransform& t);

}  // namespace lanegraph
