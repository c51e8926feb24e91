#include "polyfield/observables.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace polyfield {

namespace {

bool bbox_inside(const BBox& inner, const BBox& outer) {
  return outer.lo.x <= inner.lo.x && outer.lo.y <= inner.lo.y && inner.hi.x <= outer.hi.x &&
         inner.hi.y <= outer.hi.y;
}

// Disjoint contours: a encloses b iff a contains any vertex of b.
bool encloses(const Contour& a, const BBox& abox, const Contour& b, const BBox& bbox) {
  return bbox_inside(bbox, abox) && a.contains(b[0]);
}

}  // namespace

Colouring::Colouring(const PolygonalConfiguration& config) : config_(&config), depth_(config.contours.size(), 0) {
  const auto& cs = config.contours;
  std::vector<BBox> boxes;
  boxes.reserve(cs.size());
  for (const auto& c : cs) boxes.push_back(c.bbox());
  for (std::size_t i = 0; i < cs.size(); ++i) {
    for (std::size_t j = 0; j < cs.size(); ++j) {
      if (i != j && encloses(cs[j], boxes[j], cs[i], boxes[i])) ++depth_[i];
    }
  }
}

bool Colouring::black(Vec2 p) const {
  int n = 0;
  for (const auto& c : config_->contours) n += c.contains(p) ? 1 : 0;
  return n % 2 == 1;
}

double magnetisation(const PolygonalConfiguration& config, const Window& U) {
  const Colouring col(config);
  double black = 0.0;
  for (std::size_t i = 0; i < config.contours.size(); ++i) {
    const double a = intersection_area(config.contours[i], U);
    black += col.depth(i) % 2 == 0 ? a : -a;
  }
  return 2.0 * black - U.area();
}

double magnetisation_change(std::span<const Contour* const> current, const Contour& added, const Window& U) {
  const BBox abox = added.bbox();
  int outer = 0;
  std::vector<const Contour*> inner;
  std::vector<BBox> inner_boxes;
  for (const Contour* c : current) {
    const BBox cb = c->bbox();
    if (encloses(*c, cb, added, abox)) {
      ++outer;
    } else if (encloses(added, abox, *c, cb)) {
      inner.push_back(c);
      inner_boxes.push_back(cb);
    }
  }
  // Integral over Int(added) of (-1)^(contours inside added enclosing x).
  double signed_area = intersection_area(added, U);
  for (std::size_t i = 0; i < inner.size(); ++i) {
    int r = 1;
    for (std::size_t j = 0; j < inner.size(); ++j) {
      if (i != j && encloses(*inner[j], inner_boxes[j], *inner[i], inner_boxes[i])) ++r;
    }
    signed_area += (r % 2 == 0 ? 2.0 : -2.0) * intersection_area(*inner[i], U);
  }
  return (outer % 2 == 0 ? 2.0 : -2.0) * signed_area;
}

LargeContours large_contours(const PolygonalConfiguration& config, double alpha, const Window& region) {
  if (!(alpha > 0.0)) throw std::invalid_argument("large_contours: alpha must be positive");
  LargeContours out;
  for (std::size_t i = 0; i < config.contours.size(); ++i) {
    const Contour& c = config.contours[i];
    if (c.diameter() > alpha && curve_hits(c, region)) {
      out.indices.push_back(i);
      out.total_length += c.length();
    }
  }
  return out;
}

LargeContours large_contours(const PolygonalConfiguration& config, double alpha, double L) {
  return large_contours(config, alpha, Window::disk({0.0, 0.0}, L));
}

double distance_to_circle(const Contour& c, double L) {
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < c.size(); ++i) {
    const Segment e = c.edge(i);
    const double near = point_segment_distance({0.0, 0.0}, e);
    const double far = std::max(norm(e.a), norm(e.b));
    double d = 0.0;
    if (near > L) d = near - L;
    else if (far < L) d = L - far;
    best = std::min(best, d);
  }
  return best;
}

bool check_no_boundary_large(const PolygonalConfiguration& config, double alpha, double L) {
  if (!(alpha > 0.0) || 6.0 * alpha >= L) throw std::invalid_argument("check_no_boundary_large: need 0 < 6 alpha < L");
  for (const auto& c : config.contours) {
    if (c.diameter() > alpha && distance_to_circle(c, L) < 6.0 * alpha) return false;
  }
  return true;
}

double wulff_radius(double a, double m_beta, double L) { return L * std::sqrt(a / (2.0 * kPi * std::abs(m_beta))); }

WulffReport wulff_report(const PolygonalConfiguration& config, double a, double m_beta, double L, double c_large) {
  if (!(m_beta < 0.0) || !(a > 0.0) || !(a < 2.0 * kPi * std::abs(m_beta))) {
    throw std::invalid_argument("wulff_report: need m_beta < 0 and 0 < a < 2 pi |m_beta|");
  }
  if (!(L > 1.0) || !(c_large > 0.0)) throw std::invalid_argument("wulff_report: need L > 1 and c_large > 0");
  WulffReport r;
  r.a = a;
  r.m_beta = m_beta;
  r.L = L;
  r.c_large = c_large;
  r.large_threshold = c_large * std::log(L);
  const Window disk = Window::disk({0.0, 0.0}, L);
  r.magnetisation = magnetisation(config, disk);
  r.target_magnetisation = m_beta * kPi * L * L + a * L * L;
  r.meets_target = r.magnetisation >= r.target_magnetisation;
  r.wulff_radius = wulff_radius(a, m_beta, L);
  r.hausdorff_to_circle = std::numeric_limits<double>::quiet_NaN();
  std::optional<std::size_t> unique;
  for (std::size_t i = 0; i < config.contours.size(); ++i) {
    if (config.contours[i].diameter() > r.large_threshold) {
      ++r.n_large_contours;
      unique = i;
    }
  }
  if (r.n_large_contours == 1) {
    r.theta_large = config.contours[*unique];
    const CircleFit fit = best_circle_fit(*r.theta_large, r.wulff_radius);
    r.circle_center = fit.center;
    r.hausdorff_to_circle = fit.distance;
  }
  return r;
}

}  // namespace polyfield
