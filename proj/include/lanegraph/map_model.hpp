#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

namespace lanegraph {

struct Vec2 {
  double x = 0;
  double y = 0;
};

inline Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
inline Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
inline Vec2 operator*(double s, Vec2 a) { return {s * a.x, s * a.y}; }
inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
inline double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }
inline double norm(Vec2 a) { return std::sqrt(a.x * a.x + a.y * a.y); }
inline double dist(Vec2 a, Vec2 b) { return norm(a - b); }

struct BBox {
  double min_x = 0, min_y = 0, max_x = 0, max_y = 0;
  double width() const { return max_x - min_x; }
  double height() const { return max_y - min_y; }
  bool contains(Vec2 p, double eps = 0.0) const {
    return p.x >= min_x - eps && p.x <= max_x + eps && p.y >= min_y - eps && p.y <= max_y + eps;
  }
};

using Edge = std::pair<int, int>;

// Undirected spatial graph over all control points, coordinates in meters.
// edge_light is optional lane semantics carried per edge (empty = absent).
struct PlainGraph {
  std::vector<Vec2> nodes;
  std::vector<Edge> edges;
  BBox bbox;
  std::vector<std::uint8_t> edge_light;

  int node_count() const { return static_cast<int>(nodes.size()); }
  int edge_count() const { return static_cast<int>(edges.size()); }
  bool has_light() const { return edge_light.size() == edges.size() && !edges.empty(); }
};

// Padded interior control points of one global edge. coords/mask both have
// length W; mask is a prefix of 1s marking the valid slots.
struct LocalPath {
  std::vector<Vec2> coords;
  std::vector<std::uint8_t> mask;
  int valid_count() const {
    int n = 0;
    for (auto m : mask) n += (m != 0);
    return n;
  }
};

// Two-level map: key-point graph plus per-edge interior paths and semantics.
// order[k] is the global node generated at step k. Local paths run from the
// earlier-ordered endpoint to the later one.
struct HierGraph {
  std::vector<Vec2> global_nodes;
  std::vector<std::vector<std::uint8_t>> global_adj;
  std::map<Edge, LocalPath> local_paths;
  std::map<Edge, std::uint8_t> semantics;  // traffic_light flag per edge
  int W = 0;
  std::vector<int> order;
  double fov_m = 0;

  int node_count() const { return static_cast<int>(global_nodes.size()); }
  int edge_count() const {
    int n = 0;
    for (std::size_t i = 0; i < global_adj.size(); ++i)
      for (std::size_t j = i + 1; j < global_adj.size(); ++j) n += (global_adj[i][j] != 0);
    return n;
  }
  std::vector<Edge> edge_list() const {
    std::vector<Edge> out;
    for (int i = 0; i < node_count(); ++i)
      for (int j = i + 1; j < node_count(); ++j)
        if (global_adj[i][j]) out.push_back({i, j});
    return out;
  }
};

// Stroke sequence: each step moves the pen by (dx, dy) and states what the
// next point is (1 = starts a new lane, 2 = continues this lane, 3 = done).
struct SeqStep {
  double dx = 0;
  double dy = 0;
  int q = 2;
};

struct SequenceRep {
  std::vector<SeqStep> steps;
  Vec2 origin;
};

struct ValidationReport {
  std::vector<std::string> violations;
  bool ok() const { return violations.empty(); }
  std::string joined() const {
    std::string s;
    for (const auto& v : violations) {
      if (!s.empty()) s += "; ";
      s += v;
    }
    return s;
  }
};

ValidationReport validate(const PlainGraph& g);
ValidationReport validate(const HierGraph& h);
ValidationReport validate(const SequenceRep& s);

// Coincident nodes closer than this are merged when flattening.
inline constexpr double kMergeTolerance = 1e-6;

// Expands every global edge into endpoint -> interior points -> endpoint and
// merges coincident nodes. Throws a validation Error on invalid input.
PlainGraph flatten(const HierGraph& h);

enum class OriginRule { ascending_xy };

// Decomposes the graph into lane paths (maximal chains between key points),
// orders them by ascending start coordinate and emits the stroke sequence.
SequenceRep to_sequence(const PlainGraph& g, OriginRule rule = OriginRule::ascending_xy);

// Cumulative-sum reconstruction of the points visited by a sequence.
std::vector<Vec2> sequence_points(const SequenceRep& s);

BBox compute_bbox(const std::vector<Vec2>& nodes);

}  // namespace lanegraph
