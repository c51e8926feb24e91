#include "polyfield/geometry.hpp"

#include <algorithm>
#include <limits>
#include <numeric>

#include "polyfield/spatial.hpp"

namespace polyfield {

double point_segment_distance(Vec2 p, const Segment& s) {
  return dist(p, closest_point_on_segment(p, s));
}

Vec2 closest_point_on_segment(Vec2 p, const Segment& s) {
  const Vec2 ab = s.b - s.a;
  const double len2 = dot(ab, ab);
  if (len2 == 0.0) return s.a;
  const double t = std::clamp(dot(p - s.a, ab) / len2, 0.0, 1.0);
  return s.a + ab * t;
}

namespace {

int orientation_sign(Vec2 a, Vec2 b, Vec2 c) {
  const double v = cross(b - a, c - a);
  return (v > 0.0) - (v < 0.0);
}

bool proper_crossing(const Segment& s, const Segment& t) {
  const int o1 = orientation_sign(s.a, s.b, t.a);
  const int o2 = orientation_sign(s.a, s.b, t.b);
  const int o3 = orientation_sign(t.a, t.b, s.a);
  const int o4 = orientation_sign(t.a, t.b, s.b);
  return o1 * o2 < 0 && o3 * o4 < 0;
}

}  // namespace

double segment_distance(const Segment& s, const Segment& t) {
  if (proper_crossing(s, t)) return 0.0;
  return std::min({point_segment_distance(s.a, t), point_segment_distance(s.b, t),
                   point_segment_distance(t.a, s), point_segment_distance(t.b, s)});
}

bool segments_touch(const Segment& s, const Segment& t, double eps) {
  return segment_distance(s, t) <= eps;
}

std::optional<double> ray_segment_hit(Vec2 p, Vec2 d, const Segment& s, double max_t) {
  const Vec2 e = s.b - s.a;
  const double denom = cross(d, e);
  if (std::abs(denom) < 1e-300) return std::nullopt;
  const Vec2 ap = s.a - p;
  const double u = cross(ap, e) / denom;
  const double v = cross(ap, d) / denom;
  if (u < 0.0 || u > max_t || v < 0.0 || v > 1.0) return std::nullopt;
  return u;
}

std::optional<double> ray_circle_hit(Vec2 p, Vec2 d, Vec2 c, double r) {
  const Vec2 m = p - c;
  const double b = dot(d, m);
  const double cc = dot(m, m) - r * r;
  const double disc = b * b - cc;
  if (disc < 0.0) return std::nullopt;
  const double sq = std::sqrt(disc);
  const double u1 = -b - sq;
  const double u2 = -b + sq;
  if (u1 > 1e-12) return u1;
  if (u2 > 1e-12) return u2;
  return std::nullopt;
}

Line Line::from_normal(Vec2 n, double offset) {
  if (n.x < 0.0 || (n.x == 0.0 && n.y < 0.0)) {
    n = -n;
    offset = -offset;
  }
  double phi = std::atan2(n.x, n.y);
  if (phi >= kPi) phi = 0.0;
  return {phi, offset};
}

Line Line::through(Vec2 a, Vec2 b) {
  const double len = dist(a, b);
  if (!(len > 0.0)) throw GeometryError("Line::through: coincident points");
  const Vec2 n = perp((b - a) / len);
  return from_normal(n, dot(a, n));
}

LineIntersection intersect(const Line& l1, const Line& l2, double angle_tol) {
  double delta = std::abs(l1.phi - l2.phi);
  delta = std::min(delta, kPi - delta);
  if (delta < angle_tol) return {true, {}};
  const Vec2 n1 = l1.normal(), n2 = l2.normal();
  const double det = n1.x * n2.y - n1.y * n2.x;
  return {false, {(l1.rho * n2.y - l2.rho * n1.y) / det, (n1.x * l2.rho - n2.x * l1.rho) / det}};
}

// ---------------------------------------------------------------------------
// Contour

Contour::Contour(std::vector<Vec2> vertices) : vertices_(std::move(vertices)) {
  if (vertices_.size() < 3) throw GeometryError("Contour needs at least 3 vertices");
}

double Contour::length() const {
  double s = 0.0;
  for (std::size_t i = 0; i < vertices_.size(); ++i) s += edge(i).length();
  return s;
}

double Contour::signed_area() const {
  double s = 0.0;
  for (std::size_t i = 0; i < vertices_.size(); ++i) {
    s += cross(vertices_[i], vertices_[(i + 1) % vertices_.size()]);
  }
  return 0.5 * s;
}

namespace {

std::vector<Vec2> convex_hull(std::vector<Vec2> pts) {
  std::sort(pts.begin(), pts.end(), [](Vec2 a, Vec2 b) { return a.x < b.x || (a.x == b.x && a.y < b.y); });
  if (pts.size() < 3) return pts;
  std::vector<Vec2> hull(2 * pts.size());
  std::size_t k = 0;
  for (const auto& p : pts) {
    while (k >= 2 && cross(hull[k - 1] - hull[k - 2], p - hull[k - 2]) <= 0) --k;
    hull[k++] = p;
  }
  for (std::size_t i = pts.size() - 1, t = k + 1; i-- > 0;) {
    while (k >= t && cross(hull[k - 1] - hull[k - 2], pts[i] - hull[k - 2]) <= 0) --k;
    hull[k++] = pts[i];
  }
  hull.resize(k - 1);
  return hull;
}

}  // namespace

double Contour::diameter() const {
  const auto hull = convex_hull(vertices_);
  double best = 0.0;
  for (std::size_t i = 0; i < hull.size(); ++i) {
    for (std::size_t j = i + 1; j < hull.size(); ++j) best = std::max(best, dist(hull[i], hull[j]));
  }
  return best;
}

Vec2 Contour::centroid() const {
  double a = 0.0;
  Vec2 c{};
  const std::size_t n = vertices_.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2 p = vertices_[i], q = vertices_[(i + 1) % n];
    const double w = cross(p, q);
    a += w;
    c += (p + q) * w;
  }
  if (std::abs(a) < 1e-300) {
    Vec2 m{};
    for (const auto& p : vertices_) m += p;
    return m / static_cast<double>(n);
  }
  return c / (3.0 * a);
}

BBox Contour::bbox() const {
  BBox b;
  for (const auto& p : vertices_) b.add(p);
  return b;
}

bool Contour::contains(Vec2 p) const {
  bool inside = false;
  const std::size_t n = vertices_.size();
  for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
    const Vec2 a = vertices_[i], b = vertices_[j];
    if ((a.y > p.y) != (b.y > p.y)) {
      const double x = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
      if (p.x < x) inside = !inside;
    }
  }
  return inside;
}

double Contour::boundary_distance(Vec2 p) const {
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < vertices_.size(); ++i) best = std::min(best, point_segment_distance(p, edge(i)));
  return best;
}

bool Contour::is_simple(double eps) const {
  const std::size_t n = vertices_.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Segment e = edge(i);
    if (e.length() <= eps) return false;
    // Adjacent edges may only share their common vertex: reject folds.
    const Segment f = edge((i + 1) % n);
    const Vec2 u = e.b - e.a, v = f.b - f.a;
    if (std::abs(cross(u, v)) <= eps * norm(u) * norm(v) && dot(u, v) < 0.0) return false;
    for (std::size_t j = i + 2; j < n; ++j) {
      if (i == 0 && j == n - 1) continue;
      if (segments_touch(e, edge(j), eps)) return false;
    }
  }
  return true;
}

bool Contour::has_colinear_adjacent_edges(double eps) const {
  const std::size_t n = vertices_.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2 a = vertices_[(i + n - 1) % n], b = vertices_[i], c = vertices_[(i + 1) % n];
    const double ab = dist(a, b);
    if (ab == 0.0) return true;
    if (std::abs(cross(b - a, c - a)) / ab <= eps) return true;
  }
  return false;
}

Contour Contour::clockwise() const {
  if (signed_area() <= 0.0) return *this;
  std::vector<Vec2> v(vertices_.rbegin(), vertices_.rend());
  return Contour(std::move(v));
}

Contour Contour::translated(Vec2 t) const {
  std::vector<Vec2> v = vertices_;
  for (auto& p : v) p += t;
  return Contour(std::move(v));
}

Contour Contour::rotated(double angle, Vec2 about) const {
  std::vector<Vec2> v = vertices_;
  for (auto& p : v) p = about + rotate(p - about, angle);
  return Contour(std::move(v));
}

Contour Contour::regular(Vec2 center, double radius, std::size_t n, double phase) {
  std::vector<Vec2> v;
  v.reserve(n);
  for (std::size_t k = 0; k < n; ++k) v.push_back(center + unit_at(phase + 2.0 * kPi * k / n) * radius);
  return Contour(std::move(v));
}

double Chain::length() const {
  double s = 0.0;
  for (std::size_t i = 1; i < vertices.size(); ++i) s += dist(vertices[i - 1], vertices[i]);
  return s;
}

double PolygonalConfiguration::length() const {
  double s = 0.0;
  for (const auto& c : contours) s += c.length();
  return s;
}

double FreeConfiguration::length() const {
  double s = 0.0;
  for (const auto& c : contours) s += c.length();
  for (const auto& c : chains) s += c.length();
  return s;
}

// ---------------------------------------------------------------------------
// Window

Window Window::disk(Vec2 center, double radius) {
  if (!(radius > 0.0) || !std::isfinite(radius)) throw GeometryError("disk window needs a positive radius");
  Window w;
  w.kind_ = Kind::disk;
  w.center_ = center;
  w.radius_ = radius;
  w.bounding_radius_ = radius;
  return w;
}

Window Window::polygon(std::vector<Vec2> vertices) {
  if (vertices.size() < 3) throw GeometryError("polygon window needs at least 3 vertices");
  double a = 0.0;
  for (std::size_t i = 0; i < vertices.size(); ++i) a += cross(vertices[i], vertices[(i + 1) % vertices.size()]);
  if (std::abs(a) <= 2.0 * kGeomEps) throw GeometryError("polygon window is degenerate");
  if (a < 0.0) std::reverse(vertices.begin(), vertices.end());
  const std::size_t n = vertices.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2 p = vertices[i], q = vertices[(i + 1) % n], r = vertices[(i + 2) % n];
    if (cross(q - p, r - q) < -kGeomEps) throw GeometryError("polygon window is not convex");
  }
  Window w;
  w.kind_ = Kind::polygon;
  Vec2 c{};
  for (const auto& p : vertices) c += p;
  w.center_ = c / static_cast<double>(n);
  for (const auto& p : vertices) w.bounding_radius_ = std::max(w.bounding_radius_, dist(p, w.center_));
  w.radius_ = w.bounding_radius_;
  w.vertices_ = std::move(vertices);
  return w;
}

Window Window::square(Vec2 center, double side) {
  if (!(side > 0.0)) throw GeometryError("square window needs a positive side");
  const double h = 0.5 * side;
  return polygon({{center.x - h, center.y - h}, {center.x + h, center.y - h},
                  {center.x + h, center.y + h}, {center.x - h, center.y + h}});
}

double Window::area() const {
  if (kind_ == Kind::disk) return kPi * radius_ * radius_;
  double a = 0.0;
  for (std::size_t i = 0; i < vertices_.size(); ++i) a += cross(vertices_[i], vertices_[(i + 1) % vertices_.size()]);
  return 0.5 * a;
}

double Window::perimeter() const {
  if (kind_ == Kind::disk) return 2.0 * kPi * radius_;
  double s = 0.0;
  for (std::size_t i = 0; i < vertices_.size(); ++i) s += dist(vertices_[i], vertices_[(i + 1) % vertices_.size()]);
  return s;
}

BBox Window::bbox() const {
  BBox b;
  if (kind_ == Kind::disk) {
    b.add(center_ - Vec2{radius_, radius_});
    b.add(center_ + Vec2{radius_, radius_});
  } else {
    for (const auto& p : vertices_) b.add(p);
  }
  return b;
}

double Window::boundary_clearance(Vec2 p) const {
  if (kind_ == Kind::disk) return radius_ - dist(p, center_);
  double best = std::numeric_limits<double>::infinity();
  const std::size_t n = vertices_.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2 a = vertices_[i], b = vertices_[(i + 1) % n];
    best = std::min(best, cross(b - a, p - a) / dist(a, b));
  }
  return best;
}

bool Window::contains(Vec2 p, double clearance) const { return boundary_clearance(p) > clearance; }

std::optional<std::pair<Vec2, Vec2>> Window::chord(const Line& l) const {
  const Vec2 d = l.direction();
  if (kind_ == Kind::disk) {
    const double s = l.signed_distance(center_);
    if (std::abs(s) >= radius_) return std::nullopt;
    const Vec2 mid = center_ - l.normal() * s;
    const double half = std::sqrt(radius_ * radius_ - s * s);
    return std::make_pair(mid - d * half, mid + d * half);
  }
  const Vec2 f = l.foot();
  double lo = -std::numeric_limits<double>::infinity();
  double hi = std::numeric_limits<double>::infinity();
  const std::size_t n = vertices_.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2 a = vertices_[i], e = vertices_[(i + 1) % n] - a;
    const double c0 = cross(e, f - a);
    const double c1 = cross(e, d);
    if (std::abs(c1) < 1e-300) {
      if (c0 <= 0.0) return std::nullopt;
      continue;
    }
    const double t = -c0 / c1;
    if (c1 > 0.0) lo = std::max(lo, t);
    else hi = std::min(hi, t);
  }
  if (!(hi > lo)) return std::nullopt;
  return std::make_pair(f + d * lo, f + d * hi);
}

double Window::exit_distance(Vec2 p, Vec2 d) const {
  if (kind_ == Kind::disk) {
    auto u = ray_circle_hit(p, d, center_, radius_);
    return u ? *u : 0.0;
  }
  double best = std::numeric_limits<double>::infinity();
  const std::size_t n = vertices_.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2 a = vertices_[i], e = vertices_[(i + 1) % n] - a;
    const double c1 = cross(e, d);
    if (c1 >= 0.0) continue;
    const double t = -cross(e, p - a) / c1;
    best = std::min(best, std::max(t, 0.0));
  }
  return best;
}

std::vector<Vec2> Window::outline(std::size_t n) const {
  if (kind_ == Kind::polygon) return vertices_;
  std::vector<Vec2> v;
  v.reserve(n);
  for (std::size_t k = 0; k < n; ++k) v.push_back(center_ + unit_at(2.0 * kPi * k / n) * radius_);
  return v;
}

Window Window::rotated(double angle, Vec2 about) const {
  if (kind_ == Kind::disk) return disk(about + rotate(center_ - about, angle), radius_);
  std::vector<Vec2> v = vertices_;
  for (auto& p : v) p = about + rotate(p - about, angle);
  return polygon(std::move(v));
}

bool curve_hits(std::span<const Vec2> polyline, bool closed, const Window& w) {
  const std::size_t n = polyline.size();
  if (n == 0) return false;
  for (const auto& p : polyline) {
    if (w.boundary_clearance(p) >= 0.0) return true;
  }
  const std::size_t edges = closed ? n : n - 1;
  for (std::size_t i = 0; i < edges; ++i) {
    const Segment e{polyline[i], polyline[(i + 1) % n]};
    if (w.kind() == Window::Kind::disk) {
      if (point_segment_distance(w.center(), e) <= w.radius()) return true;
      continue;
    }
    const auto& v = w.vertices();
    for (std::size_t k = 0; k < v.size(); ++k) {
      if (segment_distance(e, Segment{v[k], v[(k + 1) % v.size()]}) == 0.0) return true;
    }
  }
  return false;
}

// ---------------------------------------------------------------------------
// Line process

bool curves_intersect(const Contour& a, const Contour& b) {
  if (!a.bbox().inflated(kGeomEps).overlaps(b.bbox())) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const Segment e = a.edge(i);
    const BBox eb = e.bbox().inflated(kGeomEps);
    for (std::size_t j = 0; j < b.size(); ++j) {
      const Segment f = b.edge(j);
      if (eb.overlaps(f.bbox()) && segments_touch(e, f)) return true;
    }
  }
  return false;
}

bool interiors_overlap(const Contour& a, const Contour& b) {
  if (!a.bbox().overlaps(b.bbox())) return false;
  if (curves_intersect(a, b)) return true;
  return b.contains(a[0]) || a.contains(b[0]);
}

double measure_lines_hitting(const Window& region) {
  if (!(region.area() > 0.0)) throw GeometryError("measure_lines_hitting: degenerate region");
  return region.perimeter();
}

Line sample_hitting_line(const Window& region, Rng& rng) {
  const Vec2 c = region.center();
  const double r = region.bounding_radius();
  for (;;) {
    const double phi = kPi * rng.uniform();
    const Vec2 n{std::sin(phi), std::cos(phi)};
    const Line l{phi, dot(c, n) + rng.uniform(-r, r)};
    if (region.kind() == Window::Kind::disk || region.chord(l)) return l;
  }
}

std::vector<Line> sample_poisson_lines(const Window& region, Rng& rng) {
  const auto n = rng.poisson(measure_lines_hitting(region));
  std::vector<Line> lines;
  lines.reserve(n);
  for (std::uint64_t i = 0; i < n; ++i) lines.push_back(sample_hitting_line(region, rng));
  return lines;
}

// ---------------------------------------------------------------------------
// Admissibility

namespace {

struct EdgeRef {
  Segment seg;
  std::uint32_t piece;  // contour or chain index (chains offset by contour count)
  std::uint32_t index;  // edge index within the piece
  std::uint32_t piece_edges;
  bool closed;
};

bool edges_adjacent(const EdgeRef& a, const EdgeRef& b) {
  if (a.piece != b.piece) return false;
  const std::uint32_t i = a.index, j = b.index, n = a.piece_edges;
  if (i + 1 == j || j + 1 == i) return true;
  return a.closed && ((i == 0 && j == n - 1) || (j == 0 && i == n - 1));
}

bool check_edges(const std::vector<EdgeRef>& edges, double eps) {
  // Non-crossing and vertex-disjointness (P2, P3).
  SegmentIndex index(1.0);
  double total = 0.0;
  for (const auto& e : edges) total += e.seg.length();
  if (!edges.empty()) index = SegmentIndex(std::max(total / static_cast<double>(edges.size()), 1e-3));
  for (std::uint32_t k = 0; k < edges.size(); ++k) index.add(edges[k].seg, k);
  std::vector<std::uint32_t> cand;
  for (std::uint32_t k = 0; k < edges.size(); ++k) {
    const auto& e = edges[k];
    if (e.seg.length() <= eps) return false;
    index.query(e.seg.bbox().inflated(eps), cand);
    for (auto j : cand) {
      if (j <= k) continue;
      const auto& f = edges[j];
      if (edges_adjacent(e, f)) {
        const Vec2 u = e.seg.b - e.seg.a, v = f.seg.b - f.seg.a;
        if (std::abs(cross(u, v)) <= eps * norm(u) * norm(v) && dot(u, v) < 0.0) return false;
        continue;
      }
      if (segments_touch(e.seg, f.seg, eps)) return false;
    }
  }
  // No two edges on a common line (P4).
  std::vector<Line> lines;
  lines.reserve(edges.size());
  for (const auto& e : edges) lines.push_back(Line::through(e.seg.a, e.seg.b));
  std::vector<std::size_t> order(lines.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](auto a, auto b) { return lines[a].phi < lines[b].phi; });
  const double angle_tol = 1e-9;
  auto same_line = [&](const Line& a, const Line& b) {
    double d = std::abs(a.phi - b.phi);
    double rho_b = b.rho;
    if (d > kPi / 2) { d = kPi - d; rho_b = -rho_b; }
    return d < angle_tol && std::abs(a.rho - rho_b) < eps;
  };
  for (std::size_t i = 0; i < order.size(); ++i) {
    for (std::size_t j = i + 1; j < order.size(); ++j) {
      if (lines[order[j]].phi - lines[order[i]].phi >= angle_tol) break;
      if (same_line(lines[order[i]], lines[order[j]])) return false;
    }
  }
  // Wrap-around near phi = 0 / pi.
  for (std::size_t i = 0; i < order.size() && lines[order[i]].phi < angle_tol; ++i) {
    for (std::size_t j = order.size(); j-- > 0 && lines[order[j]].phi > kPi - angle_tol;) {
      if (order[i] != order[j] && same_line(lines[order[i]], lines[order[j]])) return false;
    }
  }
  return true;
}

void push_contour_edges(const Contour& c, std::uint32_t piece, std::vector<EdgeRef>& out) {
  const auto n = static_cast<std::uint32_t>(c.size());
  for (std::uint32_t i = 0; i < n; ++i) out.push_back({c.edge(i), piece, i, n, true});
}

}  // namespace

bool is_admissible(const PolygonalConfiguration& config, const Window& window, const AdmissibilityOptions& opts) {
  std::vector<EdgeRef> edges;
  std::uint32_t piece = 0;
  for (const auto& c : config.contours) {
    if (c.size() < 3) return false;
    for (const auto& v : c.vertices()) {
      if (!window.contains(v, opts.eps)) return false;
    }
    push_contour_edges(c, piece++, edges);
  }
  return check_edges(edges, opts.eps);
}

bool is_admissible(const FreeConfiguration& config, const Window& window, const AdmissibilityOptions& opts) {
  const double boundary_tol = 1e-7;
  std::vector<EdgeRef> edges;
  std::uint32_t piece = 0;
  for (const auto& c : config.contours) {
    if (c.size() < 3) return false;
    for (const auto& v : c.vertices()) {
      if (!window.contains(v, opts.eps)) return false;
    }
    push_contour_edges(c, piece++, edges);
  }
  for (const auto& ch : config.chains) {
    const auto& v = ch.vertices;
    if (v.size() < 2) return false;
    if (std::abs(window.boundary_clearance(v.front())) > boundary_tol) return false;
    if (std::abs(window.boundary_clearance(v.back())) > boundary_tol) return false;
    for (std::size_t i = 1; i + 1 < v.size(); ++i) {
      if (!window.contains(v[i], opts.eps)) return false;
    }
    const auto n = static_cast<std::uint32_t>(v.size() - 1);
    for (std::uint32_t i = 0; i < n; ++i) edges.push_back({{v[i], v[i + 1]}, piece, i, n, false});
    ++piece;
  }
  return check_edges(edges, opts.eps);
}

// ---------------------------------------------------------------------------
// Areas

namespace {

// Signed area of triangle (0, a, b) intersected with the disk of radius r at 0.
double triangle_disk_area(Vec2 a, Vec2 b, double r) {
  const Vec2 d = b - a;
  const double A = dot(d, d);
  if (A == 0.0) return 0.0;
  const double B = dot(a, d);
  const double C = dot(a, a) - r * r;
  const double disc = B * B - A * C;
  std::array<double, 4> ts{0.0, 0.0, 0.0, 1.0};
  std::size_t nt = 1;
  if (disc > 0.0) {
    const double sq = std::sqrt(disc);
    for (double t : {(-B - sq) / A, (-B + sq) / A}) {
      if (t > 0.0 && t < 1.0) ts[nt++] = t;
    }
  }
  ts[nt++] = 1.0;
  double area = 0.0;
  for (std::size_t k = 0; k + 1 < nt; ++k) {
    const Vec2 p = a + d * ts[k], q = a + d * ts[k + 1];
    const Vec2 m = (p + q) * 0.5;
    if (dot(m, m) <= r * r) {
      area += 0.5 * cross(p, q);
    } else {
      area += 0.5 * r * r * std::atan2(cross(p, q), dot(p, q));
    }
  }
  return area;
}

}  // namespace

double polygon_disk_intersection_area(std::span<const Vec2> polygon, Vec2 center, double radius) {
  double s = 0.0;
  const std::size_t n = polygon.size();
  for (std::size_t i = 0; i < n; ++i) {
    s += triangle_disk_area(polygon[i] - center, polygon[(i + 1) % n] - center, radius);
  }
  return std::abs(s);
}

double polygon_convex_intersection_area(std::span<const Vec2> polygon, std::span<const Vec2> convex) {
  // Sutherland-Hodgman against each (counter-clockwise) clip edge.
  std::vector<Vec2> clip(convex.begin(), convex.end());
  double ca = 0.0;
  for (std::size_t i = 0; i < clip.size(); ++i) ca += cross(clip[i], clip[(i + 1) % clip.size()]);
  if (ca < 0.0) std::reverse(clip.begin(), clip.end());
  std::vector<Vec2> out(polygon.begin(), polygon.end());
  std::vector<Vec2> in;
  for (std::size_t i = 0; i < clip.size() && !out.empty(); ++i) {
    const Vec2 a = clip[i], e = clip[(i + 1) % clip.size()] - a;
    in.swap(out);
    out.clear();
    auto side = [&](Vec2 p) { return cross(e, p - a); };
    for (std::size_t k = 0; k < in.size(); ++k) {
      const Vec2 p = in[k], q = in[(k + 1) % in.size()];
      const double sp = side(p), sq = side(q);
      if (sp >= 0.0) out.push_back(p);
      if ((sp >= 0.0) != (sq >= 0.0)) out.push_back(p + (q - p) * (sp / (sp - sq)));
    }
  }
  double s = 0.0;
  for (std::size_t i = 0; i < out.size(); ++i) s += cross(out[i], out[(i + 1) % out.size()]);
  return 0.5 * std::abs(s);
}

double intersection_area(const Contour& c, const Window& w) {
  if (w.kind() == Window::Kind::disk) return polygon_disk_intersection_area(c.vertices(), w.center(), w.radius());
  return polygon_convex_intersection_area(c.vertices(), w.vertices());
}

// ---------------------------------------------------------------------------
// Hausdorff distance and circle fitting

namespace {

std::vector<Segment> segments_of(PointSet s) {
  std::vector<Segment> out;
  const std::size_t n = s.vertices.size();
  if (n == 1) {
    out.push_back({s.vertices[0], s.vertices[0]});
    return out;
  }
  for (std::size_t i = 0; i + 1 < n; ++i) out.push_back({s.vertices[i], s.vertices[i + 1]});
  if (s.closed && n > 2) out.push_back({s.vertices[n - 1], s.vertices[0]});
  return out;
}

std::vector<Vec2> densify(const std::vector<Segment>& segs, double spacing) {
  std::vector<Vec2> pts;
  for (const auto& s : segs) {
    const auto k = static_cast<std::size_t>(std::ceil(s.length() / spacing));
    const std::size_t steps = std::max<std::size_t>(k, 1);
    for (std::size_t i = 0; i < steps; ++i) pts.push_back(s.a + (s.b - s.a) * (static_cast<double>(i) / steps));
  }
  if (!segs.empty()) pts.push_back(segs.back().b);
  return pts;
}

double directed(const std::vector<Vec2>& pts, const std::vector<Segment>& segs) {
  double worst = 0.0;
  for (const auto& p : pts) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& s : segs) {
      best = std::min(best, point_segment_distance(p, s));
      if (best <= worst) break;
    }
    worst = std::max(worst, best);
  }
  return worst;
}

double default_spacing(std::span<const Vec2> a, std::span<const Vec2> b) {
  BBox bb;
  for (const auto& p : a) bb.add(p);
  for (const auto& p : b) bb.add(p);
  const double diam = norm(bb.hi - bb.lo);
  return diam > 0.0 ? diam / 512.0 : 1.0;
}

}  // namespace

double hausdorff_distance(PointSet a, PointSet b, double spacing) {
  if (a.vertices.empty() || b.vertices.empty()) throw GeometryError("hausdorff_distance: empty input");
  if (!(spacing > 0.0)) spacing = default_spacing(a.vertices, b.vertices);
  const auto sa = segments_of(a), sb = segments_of(b);
  return std::max(directed(densify(sa, spacing), sb), directed(densify(sb, spacing), sa));
}

double hausdorff_distance(const Contour& a, const Contour& b, double spacing) {
  return hausdorff_distance(PointSet{a.vertices(), true}, PointSet{b.vertices(), true}, spacing);
}

double hausdorff_to_circle(const Contour& c, Vec2 center, double radius, double spacing) {
  if (!(radius > 0.0)) throw GeometryError("hausdorff_to_circle: radius must be positive");
  if (!(spacing > 0.0)) spacing = std::max(c.diameter(), 2.0 * radius) / 512.0;
  const auto segs = segments_of(PointSet{c.vertices(), true});
  double worst = 0.0;
  for (const auto& p : densify(segs, spacing)) worst = std::max(worst, std::abs(dist(p, center) - radius));
  const auto n = static_cast<std::size_t>(std::max(64.0, std::ceil(2.0 * kPi * radius / spacing)));
  std::vector<Vec2> circle;
  circle.reserve(n);
  for (std::size_t k = 0; k < n; ++k) circle.push_back(center + unit_at(2.0 * kPi * k / n) * radius);
  return std::max(worst, directed(circle, segs));
}

namespace {

template <class F>
std::pair<Vec2, double> nelder_mead(F&& f, Vec2 start, double step, int max_iter, double tol) {
  std::array<Vec2, 3> x{start, start + Vec2{step, 0.0}, start + Vec2{0.0, step}};
  std::array<double, 3> fx{f(x[0]), f(x[1]), f(x[2])};
  for (int it = 0; it < max_iter; ++it) {
    std::array<int, 3> o{0, 1, 2};
    std::sort(o.begin(), o.end(), [&](int a, int b) { return fx[a] < fx[b]; });
    const int best = o[0], mid = o[1], worst = o[2];
    if (std::abs(fx[worst] - fx[best]) < tol && dist(x[worst], x[best]) < tol) break;
    const Vec2 c = (x[best] + x[mid]) * 0.5;
    const Vec2 xr = c + (c - x[worst]);
    const double fr = f(xr);
    if (fr < fx[best]) {
      const Vec2 xe = c + (c - x[worst]) * 2.0;
      const double fe = f(xe);
      if (fe < fr) { x[worst] = xe; fx[worst] = fe; }
      else { x[worst] = xr; fx[worst] = fr; }
    } else if (fr < fx[mid]) {
      x[worst] = xr;
      fx[worst] = fr;
    } else {
      const Vec2 xc = c + (x[worst] - c) * 0.5;
      const double fc = f(xc);
      if (fc < fx[worst]) {
        x[worst] = xc;
        fx[worst] = fc;
      } else {
        for (int k : {mid, worst}) {
          x[k] = x[best] + (x[k] - x[best]) * 0.5;
          fx[k] = f(x[k]);
        }
      }
    }
  }
  int b = 0;
  for (int k = 1; k < 3; ++k) if (fx[k] < fx[b]) b = k;
  return {x[b], fx[b]};
}

}  // namespace

CircleFit best_circle_fit(const Contour& c, double radius) {
  if (!(radius > 0.0)) throw GeometryError("best_circle_fit: radius must be positive");
  if (!(c.diameter() > kGeomEps) || !(c.area() > 0.0)) throw GeometryError("best_circle_fit: degenerate contour");
  const double spacing = std::max(c.diameter(), 2.0 * radius) / 512.0;
  auto f = [&](Vec2 x) { return hausdorff_to_circle(c, x, radius, spacing); };
  const Vec2 start = c.centroid();
  const double scale = std::max(c.diameter(), radius);
  auto [x0, f0] = nelder_mead(f, start, 0.05 * scale, 300, 1e-9 * scale);
  // Coarse grid over the contour's bounding box guards against poor local minima.
  const BBox bb = c.bbox();
  Vec2 gbest = start;
  double gval = std::numeric_limits<double>::infinity();
  const int g = 8;
  for (int i = 0; i <= g; ++i) {
    for (int j = 0; j <= g; ++j) {
      const Vec2 p{bb.lo.x + (bb.hi.x - bb.lo.x) * i / g, bb.lo.y + (bb.hi.y - bb.lo.y) * j / g};
      const double v = f(p);
      if (v < gval) { gval = v; gbest = p; }
    }
  }
  if (gval < f0) {
    auto [x1, f1] = nelder_mead(f, gbest, 0.05 * scale, 300, 1e-9 * scale);
    if (f1 < f0) { x0 = x1; f0 = f1; }
  }
  return {x0, f0};
}

}  // namespace polyfield
