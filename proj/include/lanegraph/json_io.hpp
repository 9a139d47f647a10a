#pragma once

#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "lanegraph/map_model.hpp"

namespace lanegraph {

using Json = nlohmann::ordered_json;

// One lane annotation as stored in map files.
struct Lane {
  std::vector<int> path;
  bool traffic_light = false;
};

Json plain_to_json(const PlainGraph& g, double fov_m, const std::vector<Lane>* lanes = nullptr);
PlainGraph plain_from_json(const Json& j, double* fov_m = nullptr, std::vector<Lane>* lanes = nullptr);

Json hier_to_json(const HierGraph& h);
HierGraph hier_from_json(const Json& j);

using AnyMap = std::variant<PlainGraph, HierGraph>;
bool json_is_hier(const Json& j);

Json load_json_file(const std::string& path);
void save_json_file(const std::string& path, const Json& j);
AnyMap load_map_file(const std::string& path);

// Reconstructs lane annotations (chains with their traffic-light flag).
std::vector<Lane> lanes_from_graph(const PlainGraph& g);

// Applies lane annotations onto per-edge flags.
void apply_lane_lights(PlainGraph& g, const std::vector<Lane>& lanes);

std::string edge_key(const Edge& e);
Edge parse_edge_key(const std::string& key);

}  // namespace lanegraph
