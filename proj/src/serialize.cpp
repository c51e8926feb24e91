#include "polyfield/serialize.hpp"

#include <cstdio>
#include <sstream>

namespace polyfield {

using nlohmann::json;

void to_json(json& j, const Vec2& p) { j = json::array({p.x, p.y}); }

void from_json(const json& j, Vec2& p) {
  if (!j.is_array() || j.size() != 2) throw GeometryError("point must be an array [x, y]");
  p = {j.at(0).get<double>(), j.at(1).get<double>()};
}

void to_json(json& j, const Contour& c) { j = json{{"vertices", c.vertices()}}; }

void from_json(const json& j, Contour& c) { c = Contour(j.at("vertices").get<std::vector<Vec2>>()); }

void to_json(json& j, const Chain& c) { j = json{{"vertices", c.vertices}}; }

void from_json(const json& j, Chain& c) {
  c.vertices = j.at("vertices").get<std::vector<Vec2>>();
  if (c.vertices.size() < 2) throw GeometryError("chain needs at least 2 vertices");
}

void to_json(json& j, const Window& w) {
  if (w.kind() == Window::Kind::disk) {
    j = json{{"kind", "disk"}, {"center", w.center()}, {"radius", w.radius()}};
  } else {
    j = json{{"kind", "polygon"}, {"vertices", w.vertices()}};
  }
}

void from_json(const json& j, Window& w) {
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "disk") {
    w = Window::disk(j.at("center").get<Vec2>(), j.at("radius").get<double>());
  } else if (kind == "polygon") {
    w = Window::polygon(j.at("vertices").get<std::vector<Vec2>>());
  } else {
    throw GeometryError("unknown window kind '" + kind + "'");
  }
}

void to_json(json& j, const PolygonalConfiguration& c) { j = json{{"contours", c.contours}}; }

void from_json(const json& j, PolygonalConfiguration& c) {
  c.contours = j.at("contours").get<std::vector<Contour>>();
}

void to_json(json& j, const FreeConfiguration& c) { j = json{{"contours", c.contours}, {"chains", c.chains}}; }

void from_json(const json& j, FreeConfiguration& c) {
  c.contours = j.at("contours").get<std::vector<Contour>>();
  c.chains = j.contains("chains") ? j.at("chains").get<std::vector<Chain>>() : std::vector<Chain>{};
}

namespace {

void put(std::ostringstream& os, double v) {
  char buf[64];
  // -0.000000 and 0.000000 would differ between otherwise equal inputs.
  std::snprintf(buf, sizeof buf, "%.6f", v == 0.0 ? 0.0 : v);
  os << buf;
}

void put_point(std::ostringstream& os, Vec2 p) {
  put(os, p.x);
  os << ' ';
  put(os, -p.y);
}

void put_polyline(std::ostringstream& os, const std::vector<Vec2>& v, bool closed) {
  for (std::size_t i = 0; i < v.size(); ++i) {
    os << (i == 0 ? 'M' : 'L');
    put_point(os, v[i]);
  }
  if (closed) os << 'Z';
}

}  // namespace

std::string render_svg(const FreeConfiguration& config, const Window& window, const SvgOptions& opts) {
  const BBox bb = window.bbox();
  const double w = bb.hi.x - bb.lo.x, h = bb.hi.y - bb.lo.y;
  const double pad = 0.02 * std::max(w, h);
  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"";
  put(os, opts.width_px);
  os << "\" height=\"";
  put(os, opts.width_px * (h + 2 * pad) / (w + 2 * pad));
  // SVG y points down; points are written as (x, -y).
  os << "\" viewBox=\"";
  put(os, bb.lo.x - pad);
  os << ' ';
  put(os, -bb.hi.y - pad);
  os << ' ';
  put(os, w + 2 * pad);
  os << ' ';
  put(os, h + 2 * pad);
  os << "\">\n";

  os << "<path class=\"window\" fill=\"none\" stroke=\"#888888\" stroke-width=\"";
  put(os, opts.stroke_width);
  os << "\" d=\"";
  const auto outline = window.kind() == Window::Kind::disk ? window.outline(opts.disk_outline_vertices)
                                                           : window.vertices();
  put_polyline(os, outline, true);
  os << "\"/>\n";

  if (!config.contours.empty()) {
    os << "<path class=\"contours\" fill=\"" << opts.fill << "\" fill-rule=\"evenodd\" stroke=\"" << opts.stroke
       << "\" stroke-width=\"";
    put(os, opts.stroke_width);
    os << "\" d=\"";
    for (const auto& c : config.contours) put_polyline(os, c.vertices(), true);
    os << "\"/>\n";
  }
  if (!config.chains.empty()) {
    os << "<path class=\"chains\" fill=\"none\" stroke=\"" << opts.stroke << "\" stroke-width=\"";
    put(os, opts.stroke_width);
    os << "\" d=\"";
    for (const auto& c : config.chains) put_polyline(os, c.vertices, false);
    os << "\"/>\n";
  }
  os << "</svg>\n";
  return os.str();
}

std::string render_svg(const PolygonalConfiguration& config, const Window& window, const SvgOptions& opts) {
  return render_svg(FreeConfiguration{config.contours, {}}, window, opts);
}

}  // namespace polyfield
