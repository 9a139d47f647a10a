#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "lanegraph/json_io.hpp"
#include "lanegraph/map_model.hpp"
#include "lanegraph/preprocess.hpp"

namespace lanegraph {

struct CityConfig {
  double size_m = 1000;
  double block_m = 50;
  double jitter = 0.1;       // grid node offset as a fraction of block size
  double curve_prob = 0.95;  // probability a road segment is an arc
  double light_prob = 0.3;   // probability an intersection is signalized
  std::uint64_t seed = 0;

  void check() const;
};

struct CityMap {
  PlainGraph graph;
  std::vector<Lane> lanes;
};

// Perturbed grid city with dense lane polylines (one control point per ~2m).
// Straight segments are exactly collinear so decimation can thin them; arcs
// keep enough curvature to survive the default tolerance.
CityMap generate_city(const CityConfig& cfg);

struct CorpusConfig {
  CityConfig city;
  PatchConfig patch;
  int n_cities = 2;
  int patches_per_city = 50;
};

struct CorpusStats {
  int n_train = 0, n_val = 0;
  double plain_nodes_mean = 0, plain_edges_mean = 0;
  int plain_nodes_max = 0, plain_edges_max = 0;
  double global_nodes_mean = 0, global_edges_mean = 0;
  int global_nodes_max = 0, global_edges_max = 0;
  int local_nodes_max = 0;
  double sparsity_ratio = 0;  // non-edges per edge in the global graph
  double removal_fraction_mean = 0;
  Json to_json() const;
};

// Generates cities, samples fov patches, decimates, builds hierarchical
// graphs and writes train/ and val/ JSON files plus stats.json. The 90/10
// split is by patch index hash so corpus growth keeps membership stable.
CorpusStats build_corpus(const CorpusConfig& cfg, const std::string& out_dir);

// Deterministic split decision used by build_corpus.
bool is_validation_patch(std::uint64_t city_index, std::uint64_t patch_index);

}  // namespace lanegraph
