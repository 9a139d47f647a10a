#pragma once

#include <set>
#include <vector>

#include "lanegraph/map_model.hpp"

namespace lanegraph {

std::vector<int> node_degrees(const PlainGraph& g);
std::vector<std::vector<int>> adjacency_lists(const PlainGraph& g);

// Key points: nodes of degree != 2, plus one promoted node per pure
// degree-2 cycle (its coordinate-lexicographically smallest node).
std::set<int> key_point_set(const PlainGraph& g);

// A maximal chain between key points: node indices including both endpoints.
// A pure cycle shows up as a chain whose two endpoints are the same promoted
// key point.
struct Chain {
  std::vector<int> nodes;
  std::vector<int> edge_indices;  // parallel to the node steps
  bool light = false;             // any member edge carries the flag
};

// Decomposes all edges into chains between key points. Deterministic: chains
// are discovered from the lowest key point index outward, neighbors ascending.
std::vector<Chain> extract_chains(const PlainGraph& g);
std::vector<Chain> extract_chains(const PlainGraph& g, const std::set<int>& key_points);

std::vector<int> connected_components(const PlainGraph& g);  // component id per node

// Union-find over a spatial hash: groups points closer than tol. Returns the
// representative (lowest member index) per point.
std::vector<int> coincident_groups(const std::vector<Vec2>& pts, double tol);

// Collapses coincident nodes (within tol), drops self-loops and duplicate
// edges that the merge produces.
PlainGraph merge_coincident(const PlainGraph& g, double tol);

}  // namespace lanegraph
