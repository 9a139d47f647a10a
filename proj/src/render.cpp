#include "lanegraph/render.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "lanegraph/error.hpp"
#include "lanegraph/graph_utils.hpp"

namespace lanegraph {

namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.3f", v);
  return buf;
}

constexpr const char* kLaneColor = "#2c3e50";
constexpr const char* kLightColor = "#e74c3c";
constexpr const char* kNodeColor = "#2980b9";

class SvgBuilder {
 public:
  SvgBuilder(double fov, double width_px) : fov_(fov), scale_(width_px / fov), width_(width_px) {}

  // map frame: y up; svg frame: y down
  double sx(double x) const { return x * scale_; }
  double sy(double y) const { return (fov_ - y) * scale_; }

  void polyline(const std::vector<Vec2>& pts, const char* color, double stroke, const char* cls) {
    body_ += "<polyline points=\"";
    for (std::size_t i = 0; i < pts.size(); ++i) {
      if (i) body_ += " ";
      body_ += fmt(sx(clampx(pts[i].x))) + "," + fmt(sy(clampx(pts[i].y)));
    }
    body_ += "\" fill=\"none\" stroke=\"";
    body_ += color;
    body_ += "\" stroke-width=\"" + fmt(stroke) + "\"";
    if (cls && *cls) {
      body_ += " class=\"";
      body_ += cls;
      body_ += "\"";
    }
    body_ += "/>\n";
  }

  void dot(Vec2 p, double r, const char* color) {
    body_ += "<circle cx=\"" + fmt(sx(clampx(p.x))) + "\" cy=\"" + fmt(sy(clampx(p.y))) +
             "\" r=\"" + fmt(r) + "\" fill=\"";
    body_ += color;
    body_ += "\"/>\n";
  }

  void legend_and_scale(bool lights_present) {
    double bar_m = std::pow(10.0, std::floor(std::log10(fov_ / 4)));
    double x0 = 10, y0 = width_ - 12;
    body_ += "<line x1=\"" + fmt(x0) + "\" y1=\"" + fmt(y0) + "\" x2=\"" + fmt(x0 + bar_m * scale_) +
             "\" y2=\"" + fmt(y0) + "\" stroke=\"#000\" stroke-width=\"2\"/>\n";
    body_ += "<text x=\"" + fmt(x0) + "\" y=\"" + fmt(y0 - 4) + "\" font-size=\"11\">" +
             fmt(bar_m) + " m</text>\n";
    double ly = 18;
    body_ += "<text x=\"10\" y=\"" + fmt(ly) + "\" font-size=\"11\" fill=\"" + std::string(kLaneColor) +
             "\">lane</text>\n";
    if (lights_present)
      body_ += "<text x=\"50\" y=\"" + fmt(ly) + "\" font-size=\"11\" fill=\"" +
               std::string(kLightColor) + "\">traffic light</text>\n";
  }

  std::string finish() const {
    std::string out = "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    out += "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" + fmt(width_) +
           "\" height=\"" + fmt(width_) + "\" viewBox=\"0 0 " + fmt(width_) + " " + fmt(width_) +
           "\">\n<rect width=\"100%\" height=\"100%\" fill=\"#fdfdfd\"/>\n";
    out += body_;
    out += "</svg>\n";
    return out;
  }

 private:
  double clampx(double v) const { return std::clamp(v, 0.0, fov_); }
  double fov_, scale_, width_;
  std::string body_;
};

}  // namespace

std::string render_svg(const HierGraph& h, const RenderOptions& opt) {
  auto report = validate(h);
  if (!report.ok()) fail_validation("render: invalid map: " + report.joined());
  double fov = opt.fov_m > 0 ? opt.fov_m : (h.fov_m > 0 ? h.fov_m : 1.0);
  SvgBuilder svg(fov, opt.width_px);

  std::vector<int> pos(h.node_count());
  for (int k = 0; k < h.node_count(); ++k) pos[h.order[k]] = k;
  bool lights_present = false;
  for (auto e : h.edge_list()) {
    std::vector<Vec2> pts;
    int from = e.first, to = e.second;
    if (pos[from] > pos[to]) std::swap(from, to);
    pts.push_back(h.global_nodes[from]);
    auto it = h.local_paths.find(e);
    if (it != h.local_paths.end()) {
      for (int w = 0; w < h.W; ++w) {
        if (!it->second.mask[w]) break;
        pts.push_back(it->second.coords[w]);
      }
    }
    pts.push_back(h.global_nodes[to]);
    auto sem = h.semantics.find(e);
    bool light = sem != h.semantics.end() && sem->second;
    lights_present = lights_present || light;
    svg.polyline(pts, light ? kLightColor : kLaneColor, light ? 2.5 : 1.5, light ? "tl" : "");
  }
  if (opt.show_nodes)
    for (const auto& p : h.global_nodes) svg.dot(p, 3.0, kNodeColor);
  if (opt.legend) svg.legend_and_scale(lights_present);
  return svg.finish();
}

std::string render_svg(const PlainGraph& g, double fov_m, const RenderOptions& opt) {
  auto report = validate(g);
  if (!report.ok()) fail_validation("render: invalid map: " + report.joined());
  double fov = opt.fov_m > 0 ? opt.fov_m : (fov_m > 0 ? fov_m : std::max(g.bbox.width(), 1.0));
  SvgBuilder svg(fov, opt.width_px);
  bool lights_present = false;
  const bool lights = g.has_light();
  for (int e = 0; e < g.edge_count(); ++e) {
    auto [a, b] = g.edges[e];
    bool light = lights && g.edge_light[e];
    lights_present = lights_present || light;
    svg.polyline({g.nodes[a], g.nodes[b]}, light ? kLightColor : kLaneColor, light ? 2.5 : 1.2,
                 light ? "tl" : "");
  }
  if (opt.show_nodes) {
    auto deg = node_degrees(g);
    for (int v = 0; v < g.node_count(); ++v)
      if (deg[v] != 2) svg.dot(g.nodes[v], 2.5, kNodeColor);
  }
  if (opt.legend) svg.legend_and_scale(lights_present);
  return svg.finish();
}

}  // namespace lanegraph
