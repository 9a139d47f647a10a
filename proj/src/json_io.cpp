#include "lanegraph/json_io.hpp"

#include <fstream>
#include <map>

#include "lanegraph/error.hpp"
#include "lanegraph/graph_utils.hpp"

namespace lanegraph {

std::string edge_key(const Edge& e) { return std::to_string(e.first) + "-" + std::to_string(e.second); }

Edge parse_edge_key(const std::string& key) {
  auto dash = key.find('-');
  if (dash == std::string::npos) fail_io("malformed edge key: " + key);
  try {
    return {std::stoi(key.substr(0, dash)), std::stoi(key.substr(dash + 1))};
  } catch (const std::exception&) {
    fail_io("malformed edge key: " + key);
  }
}

namespace {

Json nodes_to_json(const std::vector<Vec2>& nodes) {
  Json arr = Json::array();
  for (const auto& p : nodes) arr.push_back(Json::array({p.x, p.y}));
  return arr;
}

std::vector<Vec2> nodes_from_json(const Json& arr) {
  std::vector<Vec2> out;
  for (const auto& p : arr) out.push_back({p.at(0).get<double>(), p.at(1).get<double>()});
  return out;
}

Json edges_to_json(const std::vector<Edge>& edges) {
  Json arr = Json::array();
  for (auto [a, b] : edges) arr.push_back(Json::array({a, b}));
  return arr;
}

std::vector<Edge> edges_from_json(const Json& arr) {
  std::vector<Edge> out;
  for (const auto& e : arr) out.push_back({e.at(0).get<int>(), e.at(1).get<int>()});
  return out;
}

}  // namespace

Json plain_to_json(const PlainGraph& g, double fov_m, const std::vector<Lane>* lanes) {
  Json j;
  j["fov_m"] = fov_m;
  j["nodes"] = nodes_to_json(g.nodes);
  j["edges"] = edges_to_json(g.edges);
  std::vector<Lane> derived;
  if (!lanes && g.has_light()) {
    derived = lanes_from_graph(g);
    lanes = &derived;
  }
  if (lanes) {
    Json arr = Json::array();
    for (const auto& lane : *lanes) {
      Json lj;
      lj["path"] = lane.path;
      lj["traffic_light"] = lane.traffic_light;
      arr.push_back(lj);
    }
    j["lanes"] = arr;
  }
  return j;
}

PlainGraph plain_from_json(const Json& j, double* fov_m, std::vector<Lane>* lanes_out) {
  PlainGraph g;
  g.nodes = nodes_from_json(j.at("nodes"));
  g.edges = edges_from_json(j.at("edges"));
  double fov = j.value("fov_m", 0.0);
  if (fov_m) *fov_m = fov;
  g.bbox = fov > 0 ? BBox{0, 0, fov, fov} : compute_bbox(g.nodes);
  if (j.contains("lanes")) {
    std::vector<Lane> lanes;
    for (const auto& lj : j.at("lanes")) {
      Lane lane;
      lane.path = lj.at("path").get<std::vector<int>>();
      lane.traffic_light = lj.value("traffic_light", false);
      lanes.push_back(std::move(lane));
    }
    apply_lane_lights(g, lanes);
    if (lanes_out) *lanes_out = std::move(lanes);
  }
  return g;
}

Json hier_to_json(const HierGraph& h) {
  Json j;
  j["fov_m"] = h.fov_m;
  PlainGraph flat = flatten(h);
  j["nodes"] = nodes_to_json(flat.nodes);
  j["edges"] = edges_to_json(flat.edges);
  j["global_nodes"] = nodes_to_json(h.global_nodes);
  j["global_adj"] = edges_to_json(h.edge_list());
  Json lp = Json::object();
  for (const auto& [e, path] : h.local_paths) {
    Json pj;
    pj["coords"] = nodes_to_json(path.coords);
    pj["mask"] = path.mask;
    lp[edge_key(e)] = pj;
  }
  j["local_paths"] = lp;
  Json sem = Json::object();
  for (const auto& [e, flag] : h.semantics) {
    Json sj;
    sj["traffic_light"] = flag != 0;
    sem[edge_key(e)] = sj;
  }
  j["semantics"] = sem;
  j["W"] = h.W;
  j["order"] = h.order;
  return j;
}

HierGraph hier_from_json(const Json& j) {
  HierGraph h;
  h.fov_m = j.value("fov_m", 0.0);
  h.global_nodes = nodes_from_json(j.at("global_nodes"));
  const int n = h.node_count();
  h.global_adj.assign(n, std::vector<std::uint8_t>(n, 0));
  for (auto e : edges_from_json(j.at("global_adj"))) {
    if (e.first < 0 || e.second < 0 || e.first >= n || e.second >= n)
      fail_io("global_adj index out of range");
    h.global_adj[e.first][e.second] = 1;
    h.global_adj[e.second][e.first] = 1;
  }
  h.W = j.value("W", 0);
  if (j.contains("local_paths")) {
    for (const auto& [key, pj] : j.at("local_paths").items()) {
      LocalPath lp;
      lp.coords = nodes_from_json(pj.at("coords"));
      lp.mask = pj.at("mask").get<std::vector<std::uint8_t>>();
      h.local_paths[parse_edge_key(key)] = std::move(lp);
    }
  }
  if (j.contains("semantics")) {
    for (const auto& [key, sj] : j.at("semantics").items())
      h.semantics[parse_edge_key(key)] = sj.at("traffic_light").get<bool>() ? 1 : 0;
  }
  h.order = j.value("order", std::vector<int>{});
  return h;
}

bool json_is_hier(const Json& j) { return j.contains("global_nodes"); }

Json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail_io("cannot open " + path);
  Json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    fail_io("parse error in " + path + ": " + e.what());
  }
  return j;
}

void save_json_file(const std::string& path, const Json& j) {
  std::ofstream out(path);
  if (!out) fail_io("cannot write " + path);
  out << j.dump() << "\n";
  if (!out) fail_io("write failed: " + path);
}

AnyMap load_map_file(const std::string& path) {
  Json j = load_json_file(path);
  if (json_is_hier(j)) return hier_from_json(j);
  return plain_from_json(j);
}

std::vector<Lane> lanes_from_graph(const PlainGraph& g) {
  std::vector<Lane> lanes;
  for (const auto& c : extract_chains(g)) {
    Lane lane;
    lane.path = c.nodes;
    lane.traffic_light = c.light;
    lanes.push_back(std::move(lane));
  }
  return lanes;
}

void apply_lane_lights(PlainGraph& g, const std::vector<Lane>& lanes) {
  bool any = false;
  for (const auto& lane : lanes) any = any || lane.traffic_light;
  if (!any) return;
  std::map<Edge, int> edge_index;
  for (int e = 0; e < g.edge_count(); ++e) {
    auto [a, b] = g.edges[e];
    edge_index[{std::min(a, b), std::max(a, b)}] = e;
  }
  g.edge_light.assign(g.edges.size(), 0);
  for (const auto& lane : lanes) {
    if (!lane.traffic_light) continue;
    for (std::size_t i = 0; i + 1 < lane.path.size(); ++i) {
      int a = lane.path[i], b = lane.path[i + 1];
      auto it = edge_index.find({std::min(a, b), std::max(a, b)});
      if (it != edge_index.end()) g.edge_light[it->second] = 1;
    }
  }
}

}  // namespace lanegraph
