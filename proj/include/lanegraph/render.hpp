#pragma once

#include <string>

#include "lanegraph/map_model.hpp"

namespace lanegraph {

struct RenderOptions {
  double width_px = 800;
  bool show_nodes = true;
  bool legend = true;
  double fov_m = 0;  // 0 = use the map's own fov / bbox
};

// Deterministic SVG 1.1 bytes: lanes as polylines, global nodes as dots,
// traffic-light-controlled edges highlighted, legend and scale bar.
std::string render_svg(const HierGraph& h, const RenderOptions& opt = {});
std::string render_svg(const PlainGraph& g, double fov_m, const RenderOptions& opt = {});

}  // namespace lanegraph
