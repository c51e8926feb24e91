#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "polyfield/geometry.hpp"

namespace polyfield {

struct SkeletonSegment {
  /// Lattice endpoints.
  Vec2 I;
  Vec2 E;
  /// Witness: contour index into gamma and the two points on it. The covered
  /// subpath runs clockwise from I_on to E_on.
  std::size_t contour = 0;
  Vec2 I_on;
  Vec2 E_on;
};

struct Skeleton {
  double alpha = 0.0;
  double delta = 0.0;
  double L = 0.0;
  std::vector<SkeletonSegment> segments;

  /// Sum of |I_i - E_i|.
  double length() const;
  /// Number of initial and end points.
  std::size_t vertex_count() const { return 2 * segments.size(); }
};

struct SkeletonOptions {
  /// Arc-length spacing of candidate start points; 0 picks min(delta / 4, 1 / 4).
  double candidate_spacing = 0.0;
  /// Bisection steps pulling a chosen start towards the covered set.
  int refine_steps = 40;
};

/// Greedy (alpha, delta)-skeleton of a family of alpha-large contours lying in
/// B(L - 1/sqrt 2). Start with the lattice point nearest to vertex 0 of
/// gamma[0]; then repeatedly take the admissible start closest to the covered
/// subpaths. A start on a contour already in use must lie within
/// alpha + delta + sqrt 2 of an earlier initial point. Ties go to the smaller
/// (contour index, arc position). Throws std::invalid_argument unless
/// alpha >= 4 delta > 0 and every contour is alpha-large and inside.
Skeleton extract_skeleton(std::span<const Contour> gamma, double alpha, double delta, double L,
                          const SkeletonOptions& opts = {});

struct SkeletonVerdict {
  bool s1 = true;
  bool s2 = true;
  bool s3 = true;
  bool s4 = true;
  bool s5 = true;
  /// Lattice vertices pairwise distinct and inside B(L).
  bool vertices = true;
  /// First failure, empty when all checks pass.
  std::string failure;

  bool ok() const { return s1 && s2 && s3 && s4 && s5 && vertices; }
};

/// Checks the skeleton against gamma with its own geometry code.
SkeletonVerdict verify_skeleton(const Skeleton& skeleton, std::span<const Contour> gamma);

/// Slack budget constants, fitted once on a 300-case calibration corpus
/// (c1 near 2 sqrt(pi); c2 = 1.5 against a largest observed need of 1.11).
inline constexpr double kIsoperimetricC1 = 4.0;
inline constexpr double kIsoperimetricC2 = 1.5;

struct IsoperimetricReport {
  /// Black area enclosed by gamma under the parity colouring.
  double area = 0.0;
  double skeleton_length = 0.0;
  /// 2 sqrt(pi A).
  double lower_bound = 0.0;
  double slack = 0.0;
  /// c1 (delta / alpha) sqrt(A) + c2 alpha.
  double budget = 0.0;
  bool within_budget = true;
};

IsoperimetricReport isoperimetric_check(const Skeleton& skeleton, std::span<const Contour> gamma,
                                        double c1 = kIsoperimetricC1, double c2 = kIsoperimetricC2);

}  // namespace polyfield
