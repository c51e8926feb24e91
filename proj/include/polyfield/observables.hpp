#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "polyfield/geometry.hpp"

namespace polyfield {

/// Parity colouring of a configuration of disjoint contours: the unbounded
/// component is white and the colour flips across every contour.
class Colouring {
 public:
  explicit Colouring(const PolygonalConfiguration& config);

  /// Number of contours enclosing contour i.
  int depth(std::size_t i) const { return depth_[i]; }
  const std::vector<int>& depths() const { return depth_; }
  /// Black iff an odd number of contours enclose p.
  bool black(Vec2 p) const;

 private:
  const PolygonalConfiguration* config_;
  std::vector<int> depth_;
};

/// Black area minus white area inside U.
double magnetisation(const PolygonalConfiguration& config, const Window& U);

/// M_U(current + added) - M_U(current) for a contour disjoint from every
/// contour of `current`.
double magnetisation_change(std::span<const Contour* const> current, const Contour& added, const Window& U);

struct LargeContours {
  std::vector<std::size_t> indices;
  double total_length = 0.0;
};

/// Contours of diameter > alpha meeting `region`, with their total length.
LargeContours large_contours(const PolygonalConfiguration& config, double alpha, const Window& region);
/// Region defaults to the disk of radius L about the origin.
LargeContours large_contours(const PolygonalConfiguration& config, double alpha, double L);

/// Distance from the contour to the circle of radius L about the origin.
double distance_to_circle(const Contour& c, double L);

/// True when no alpha-large contour comes within 6 alpha of the circle of
/// radius L. Throws when 6 alpha >= L.
bool check_no_boundary_large(const PolygonalConfiguration& config, double alpha, double L);

struct WulffReport {
  double a = 0.0;
  double m_beta = 0.0;
  double L = 0.0;
  double c_large = 0.0;
  /// Diameter above which a contour counts as large: c_large log L.
  double large_threshold = 0.0;
  double magnetisation = 0.0;
  /// M[beta] pi L^2 + a L^2.
  double target_magnetisation = 0.0;
  bool meets_target = false;
  std::size_t n_large_contours = 0;
  std::optional<Contour> theta_large;
  Vec2 circle_center{};
  /// NaN unless exactly one large contour exists.
  double hausdorff_to_circle = 0.0;
  double wulff_radius = 0.0;
};

/// L sqrt(a / (2 pi |m_beta|)).
double wulff_radius(double a, double m_beta, double L);

/// Metrics of a configuration in the disk of radius L against the droplet
/// prediction. Throws unless m_beta < 0 and 0 < a < 2 pi |m_beta|.
WulffReport wulff_report(const PolygonalConfiguration& config, double a, double m_beta, double L, double c_large);

}  // namespace polyfield
