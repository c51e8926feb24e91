#pragma once

#include <string>

#include <json.hpp>

#include "polyfield/geometry.hpp"

namespace polyfield {

// JSON vertex-list schema:
//   point         [x, y]
//   contour       {"vertices": [[x, y], ...]}        closing vertex not repeated
//   chain         {"vertices": [[x, y], ...]}
//   window        {"kind": "disk", "center": [x, y], "radius": r}
//                 {"kind": "polygon", "vertices": [[x, y], ...]}
//   configuration {"contours": [...]} plus "chains": [...] for free boundary
// Readers throw nlohmann::json exceptions on malformed input and
// polyfield::GeometryError on invalid geometry.

void to_json(nlohmann::json& j, const Vec2& p);
void from_json(const nlohmann::json& j, Vec2& p);
void to_json(nlohmann::json& j, const Contour& c);
void from_json(const nlohmann::json& j, Contour& c);
void to_json(nlohmann::json& j, const Chain& c);
void from_json(const nlohmann::json& j, Chain& c);
void to_json(nlohmann::json& j, const Window& w);
void from_json(const nlohmann::json& j, Window& w);
void to_json(nlohmann::json& j, const PolygonalConfiguration& c);
void from_json(const nlohmann::json& j, PolygonalConfiguration& c);
void to_json(nlohmann::json& j, const FreeConfiguration& c);
void from_json(const nlohmann::json& j, FreeConfiguration& c);

struct SvgOptions {
  /// Output width in pixels; the height follows the window's aspect ratio.
  double width_px = 600.0;
  std::string fill = "#222222";
  std::string stroke = "#000000";
  double stroke_width = 0.02;
  /// Vertices used to outline a disk window.
  std::size_t disk_outline_vertices = 256;
};

/// SVG in window coordinates (y up). Contours form one even-odd filled path,
/// so black regions follow nesting parity; chains are drawn unfilled.
/// Coordinates are printed with six decimals and the output depends only on
/// the input.
std::string render_svg(const FreeConfiguration& config, const Window& window, const SvgOptions& opts = {});
std::string render_svg(const PolygonalConfiguration& config, const Window& window, const SvgOptions& opts = {});

}  // namespace polyfield
