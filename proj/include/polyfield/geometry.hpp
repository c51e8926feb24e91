#pragma once

#include <array>
#include <cmath>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "polyfield/rng.hpp"

namespace polyfield {

inline constexpr double kPi = 3.14159265358979323846;

/// Absolute tolerance for co-linearity, coincidence and boundary clearance.
inline constexpr double kGeomEps = 1e-9;

class GeometryError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  constexpr Vec2 operator+(Vec2 o) const { return {x + o.x, y + o.y}; }
  constexpr Vec2 operator-(Vec2 o) const { return {x - o.x, y - o.y}; }
  constexpr Vec2 operator*(double s) const { return {x * s, y * s}; }
  constexpr Vec2 operator/(double s) const { return {x / s, y / s}; }
  constexpr Vec2 operator-() const { return {-x, -y}; }
  Vec2& operator+=(Vec2 o) { x += o.x; y += o.y; return *this; }
  Vec2& operator-=(Vec2 o) { x -= o.x; y -= o.y; return *this; }
  constexpr bool operator==(const Vec2&) const = default;
};

constexpr Vec2 operator*(double s, Vec2 v) { return v * s; }
constexpr double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
constexpr double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }
inline double norm(Vec2 a) { return std::hypot(a.x, a.y); }
inline double dist(Vec2 a, Vec2 b) { return norm(a - b); }
inline Vec2 normalized(Vec2 a) { return a / norm(a); }
constexpr Vec2 perp(Vec2 a) { return {-a.y, a.x}; }
inline Vec2 rotate(Vec2 a, double angle) {
  const double c = std::cos(angle), s = std::sin(angle);
  return {c * a.x - s * a.y, s * a.x + c * a.y};
}
inline Vec2 unit_at(double angle) { return {std::cos(angle), std::sin(angle)}; }

struct BBox {
  Vec2 lo{1e300, 1e300};
  Vec2 hi{-1e300, -1e300};

  void add(Vec2 p) {
    lo = {std::min(lo.x, p.x), std::min(lo.y, p.y)};
    hi = {std::max(hi.x, p.x), std::max(hi.y, p.y)};
  }
  void add(const BBox& b) { add(b.lo); add(b.hi); }
  BBox inflated(double r) const { return {{lo.x - r, lo.y - r}, {hi.x + r, hi.y + r}}; }
  bool overlaps(const BBox& o) const {
    return lo.x <= o.hi.x && o.lo.x <= hi.x && lo.y <= o.hi.y && o.lo.y <= hi.y;
  }
  bool empty() const { return lo.x > hi.x; }
};

struct Segment {
  Vec2 a;
  Vec2 b;
  double length() const { return dist(a, b); }
  BBox bbox() const { BBox bb; bb.add(a); bb.add(b); return bb; }
};

/// Euclidean distance from p to segment s.
double point_segment_distance(Vec2 p, const Segment& s);
/// Closest point of segment s to p.
Vec2 closest_point_on_segment(Vec2 p, const Segment& s);
/// Euclidean distance between two segments (0 if they meet).
double segment_distance(const Segment& s, const Segment& t);
/// True when the closed segments share at least one point, up to `eps`.
bool segments_touch(const Segment& s, const Segment& t, double eps = kGeomEps);
/// Parameter u in [0, max_t] where the ray p + u d first meets segment s, if any.
std::optional<double> ray_segment_hit(Vec2 p, Vec2 d, const Segment& s, double max_t);
/// Smallest positive u with |p + u d - c| = r (d unit), if the ray meets the circle.
std::optional<double> ray_circle_hit(Vec2 p, Vec2 d, Vec2 c, double r);

/// Straight line (phi, rho): phi in [0, pi), normal n = (sin phi, cos phi),
/// points p with dot(p, n) = rho. The foot point rho * n is orthogonal to the
/// direction (cos phi, -sin phi).
struct Line {
  double phi = 0.0;
  double rho = 0.0;

  Vec2 normal() const { return {std::sin(phi), std::cos(phi)}; }
  Vec2 direction() const { return {std::cos(phi), -std::sin(phi)}; }
  Vec2 foot() const { return normal() * rho; }
  Vec2 point_at(double s) const { return foot() + direction() * s; }
  double signed_distance(Vec2 p) const { return dot(p, normal()) - rho; }
  /// Arc-length coordinate of the orthogonal projection of p.
  double coordinate(Vec2 p) const { return dot(p, direction()); }

  static Line through(Vec2 a, Vec2 b);
  static Line from_normal(Vec2 unit_normal, double offset);
};

struct LineIntersection {
  bool near_parallel = false;
  Vec2 point{};
};

/// Intersection of two lines. Pairs with |phi1 - phi2| (mod pi) below
/// `angle_tol` are reported as near-parallel and carry no point.
LineIntersection intersect(const Line& l1, const Line& l2, double angle_tol = kGeomEps);

/// Closed simple polygon, vertices in traversal order (no repeated closing vertex).
class Contour {
 public:
  Contour() = default;
  explicit Contour(std::vector<Vec2> vertices);

  const std::vector<Vec2>& vertices() const { return vertices_; }
  std::size_t size() const { return vertices_.size(); }
  const Vec2& operator[](std::size_t i) const { return vertices_[i]; }
  Segment edge(std::size_t i) const { return {vertices_[i], vertices_[(i + 1) % vertices_.size()]}; }

  double length() const;
  double signed_area() const;
  double area() const { return std::abs(signed_area()); }
  double diameter() const;
  Vec2 centroid() const;
  BBox bbox() const;
  /// Even-odd point inclusion (boundary points unspecified).
  bool contains(Vec2 p) const;
  /// Distance from p to the polygon boundary.
  double boundary_distance(Vec2 p) const;
  bool is_simple(double eps = kGeomEps) const;
  bool has_colinear_adjacent_edges(double eps = kGeomEps) const;
  /// Same polygon with clockwise orientation.
  Contour clockwise() const;
  Contour translated(Vec2 t) const;
  Contour rotated(double angle, Vec2 about = {}) const;

  /// Regular n-gon inscribed in the circle (center, radius), counter-clockwise.
  static Contour regular(Vec2 center, double radius, std::size_t n, double phase = 0.0);

 private:
  std::vector<Vec2> vertices_;
};

/// Open polyline; used for boundary-terminated pieces of free-boundary fields.
struct Chain {
  std::vector<Vec2> vertices;
  double length() const;
};

struct PolygonalConfiguration {
  std::vector<Contour> contours;
  double length() const;
};

/// Free-boundary configuration: closed contours plus chains whose two end
/// vertices lie on the window boundary.
struct FreeConfiguration {
  std::vector<Contour> contours;
  std::vector<Chain> chains;
  double length() const;
};

/// Convex observation window: a disk or a convex polygon.
class Window {
 public:
  enum class Kind { disk, polygon };

  static Window disk(Vec2 center, double radius);
  static Window polygon(std::vector<Vec2> vertices);
  static Window square(Vec2 center, double side);

  Kind kind() const { return kind_; }
  Vec2 center() const { return center_; }
  double radius() const { return radius_; }
  const std::vector<Vec2>& vertices() const { return vertices_; }

  double area() const;
  double perimeter() const;
  /// Radius of a disk around center() containing the window.
  double bounding_radius() const { return bounding_radius_; }
  BBox bbox() const;
  /// p lies in the interior with distance to the boundary > clearance.
  bool contains(Vec2 p, double clearance = 0.0) const;
  /// Distance from an interior point to the boundary (negative outside).
  double boundary_clearance(Vec2 p) const;
  /// Entry and exit points of the line, ordered along line.direction().
  std::optional<std::pair<Vec2, Vec2>> chord(const Line& l) const;
  /// Distance along unit ray d from interior point p to the boundary.
  double exit_distance(Vec2 p, Vec2 d) const;
  /// Boundary as a closed polygon (disks discretised with n vertices).
  std::vector<Vec2> outline(std::size_t n = 256) const;
  Window rotated(double angle, Vec2 about = {}) const;

 private:
  Kind kind_ = Kind::disk;
  Vec2 center_{};
  double radius_ = 0.0;
  double bounding_radius_ = 0.0;
  std::vector<Vec2> vertices_;
};

/// True when the polygonal curve meets the closed window.
bool curve_hits(std::span<const Vec2> polyline, bool closed, const Window& w);
inline bool curve_hits(const Contour& c, const Window& w) { return curve_hits(c.vertices(), true, w); }

/// The two closed polygonal curves share a point (up to kGeomEps).
bool curves_intersect(const Contour& a, const Contour& b);
/// The open regions enclosed by the contours overlap: the curves meet or
/// one contains a vertex of the other.
bool interiors_overlap(const Contour& a, const Contour& b);

/// mu-mass of the set of lines meeting a convex region (its perimeter).
double measure_lines_hitting(const Window& region);
/// One line from mu restricted to lines meeting the region, normalised.
Line sample_hitting_line(const Window& region, Rng& rng);
/// Restriction to the region of a Poisson line process with intensity mu.
std::vector<Line> sample_poisson_lines(const Window& region, Rng& rng);

struct AdmissibilityOptions {
  double eps = kGeomEps;
};

/// Empty-boundary admissibility: strictly inside, degree-2 vertices,
/// non-crossing edges, no two co-linear edges.
bool is_admissible(const PolygonalConfiguration& config, const Window& window,
                   const AdmissibilityOptions& opts = {});
/// Free-boundary admissibility: as above, plus chains whose end vertices are
/// degree-1 boundary vertices.
bool is_admissible(const FreeConfiguration& config, const Window& window,
                   const AdmissibilityOptions& opts = {});

/// Area of polygon interior intersected with a disk.
double polygon_disk_intersection_area(std::span<const Vec2> polygon, Vec2 center, double radius);
/// Area of polygon interior intersected with a convex polygon (any orientation).
double polygon_convex_intersection_area(std::span<const Vec2> polygon, std::span<const Vec2> convex);
/// Area of Int(contour) intersected with the window.
double intersection_area(const Contour& c, const Window& w);

/// Point set given as a polyline; closed polylines include the closing edge.
struct PointSet {
  std::span<const Vec2> vertices;
  bool closed = true;
};

/// Hausdorff distance between two polylines. Each side is densified with
/// spacing `spacing` (default: joint diameter / 512) and measured exactly
/// against the other side's segments.
double hausdorff_distance(PointSet a, PointSet b, double spacing = 0.0);
double hausdorff_distance(const Contour& a, const Contour& b, double spacing = 0.0);

/// Hausdorff distance between a polygon and the circle S(center, radius).
double hausdorff_to_circle(const Contour& c, Vec2 center, double radius, double spacing = 0.0);

struct CircleFit {
  Vec2 center{};
  double distance = 0.0;
};

/// Center minimising the Hausdorff distance between the contour and a circle
/// of the given radius: Nelder-Mead from the centroid plus a coarse grid.
CircleFit best_circle_fit(const Contour& c, double radius);

}  // namespace polyfield
