#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "polyfield/geometry.hpp"

using namespace polyfield;

namespace {

Contour square(Vec2 c, double side) {
  const double h = side / 2;
  return Contour({{c.x - h, c.y - h}, {c.x + h, c.y - h}, {c.x + h, c.y + h}, {c.x - h, c.y + h}});
}

}  // namespace

TEST_CASE("contour measurements") {
  const Contour s = square({0, 0}, 2);
  CHECK(s.length() == doctest::Approx(8.0));
  CHECK(s.area() == doctest::Approx(4.0));
  CHECK(s.signed_area() > 0);
  CHECK(s.clockwise().signed_area() < 0);
  CHECK(s.diameter() == doctest::Approx(2 * std::sqrt(2.0)));
  CHECK(s.contains({0.5, 0.5}));
  CHECK_FALSE(s.contains({1.5, 0}));
  CHECK(s.boundary_distance({0, 0}) == doctest::Approx(1.0));
  CHECK_THROWS_AS(Contour({{0, 0}, {1, 0}}), GeometryError);
}

TEST_CASE("line parametrisation") {
  const Line l = Line::through({0, 1}, {2, 1});
  CHECK(l.signed_distance({5, 1}) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(std::abs(l.rho) == doctest::Approx(1.0));
  const Line v = Line::through({3, -1}, {3, 4});
  const auto x = intersect(l, v);
  REQUIRE_FALSE(x.near_parallel);
  CHECK(x.point.x == doctest::Approx(3.0));
  CHECK(x.point.y == doctest::Approx(1.0));
  CHECK(intersect(l, Line::through({0, 2}, {1, 2})).near_parallel);
}

TEST_CASE("mu-measure of lines hitting a convex set is its perimeter") {
  for (double r : {0.5, 1.0, 2.0}) CHECK(measure_lines_hitting(Window::disk({1, -2}, r)) == doctest::Approx(2 * kPi * r));
  CHECK(measure_lines_hitting(Window::square({0, 0}, 3)) == doctest::Approx(12.0));
}

TEST_CASE("sampled hitting lines meet the region") {
  Rng rng(3);
  const Window w = Window::square({2, 2}, 1.5);
  for (int i = 0; i < 1000; ++i) CHECK(w.chord(sample_hitting_line(w, rng)).has_value());
}

TEST_CASE("windows") {
  const Window d = Window::disk({0, 0}, 2);
  CHECK(d.area() == doctest::Approx(4 * kPi));
  CHECK(d.contains({1.9, 0}));
  CHECK_FALSE(d.contains({1.9, 0}, 0.2));
  CHECK(d.exit_distance({0, 0}, {0, 1}) == doctest::Approx(2.0));
  CHECK_THROWS_AS(Window::polygon({{0, 0}, {2, 0}, {1, 0.2}, {2, 2}, {0, 2}}), GeometryError);
  const Window sq = Window::square({0, 0}, 2);
  CHECK(sq.area() == doctest::Approx(4.0));
  CHECK(sq.boundary_clearance({0.5, 0}) == doctest::Approx(0.5));
}

TEST_CASE("admissibility") {
  const Window w = Window::disk({0, 0}, 5);
  CHECK(is_admissible(PolygonalConfiguration{}, w));
  CHECK(is_admissible(PolygonalConfiguration{{Contour({{0, 0}, {1, 0}, {0, 1}})}}, w));
  SUBCASE("contour leaving the window") {
    CHECK_FALSE(is_admissible(PolygonalConfiguration{{square({4.5, 0}, 2)}}, w));
  }
  SUBCASE("crossing contours") {
    CHECK_FALSE(is_admissible(PolygonalConfiguration{{square({0, 0}, 2), square({1, 0}, 2)}}, w));
  }
  SUBCASE("nested contours are fine") {
    CHECK(is_admissible(PolygonalConfiguration{{square({0, 0}, 4), square({0, 0}, 1)}}, w));
  }
  SUBCASE("co-linear adjacent edges") {
    CHECK_FALSE(is_admissible(PolygonalConfiguration{{Contour({{0, 0}, {1, 0}, {2, 0}, {1, 1}})}}, w));
  }
  SUBCASE("self-crossing polygon") {
    CHECK_FALSE(is_admissible(PolygonalConfiguration{{Contour({{0, 0}, {1, 1}, {1, 0}, {0, 1}})}}, w));
  }
}

TEST_CASE("overlap predicates") {
  const Contour big = square({0, 0}, 4), small = square({0, 0}, 1), far = square({10, 0}, 1);
  CHECK_FALSE(curves_intersect(big, small));
  CHECK(interiors_overlap(big, small));
  CHECK_FALSE(interiors_overlap(big, far));
  CHECK(curves_intersect(big, square({2, 0}, 1)));
}

TEST_CASE("intersection areas") {
  const Contour s = square({0, 0}, 1);
  CHECK(intersection_area(s, Window::disk({0, 0}, 5)) == doctest::Approx(1.0));
  // Unit square against the half-disk-sized region to the right of x = 0.
  CHECK(intersection_area(square({0, 0}, 2), Window::square({1, 0}, 2)) == doctest::Approx(2.0));
  const Contour disk_like = Contour::regular({0, 0}, 3, 2048);
  CHECK(intersection_area(disk_like, Window::disk({0, 0}, 1)) == doctest::Approx(kPi).epsilon(1e-4));
}

TEST_CASE("hausdorff distances") {
  const Contour a = square({0, 0}, 2), b = square({0.5, 0}, 2);
  CHECK(hausdorff_distance(a, b) == doctest::Approx(0.5).epsilon(1e-3));
  CHECK(hausdorff_distance(a, a) == doctest::Approx(0.0));
  const Contour c = Contour::regular({1, 1}, 2, 512);
  CHECK(hausdorff_to_circle(c, {1, 1}, 2) < 1e-3);
  CHECK(hausdorff_to_circle(c, {1, 1}, 3) == doctest::Approx(1.0).epsilon(1e-3));
  const CircleFit fit = best_circle_fit(c, 2);
  CHECK(fit.distance < 1e-3);
  CHECK(fit.center.x == doctest::Approx(1.0).epsilon(1e-2));
}

TEST_CASE("rigid motions") {
  const Contour s = square({1, 0}, 1);
  const Contour r = s.rotated(kPi / 2);
  CHECK(r.centroid().x == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(r.centroid().y == doctest::Approx(1.0));
  CHECK(s.translated({2, 3}).centroid().x == doctest::Approx(3.0));
}

TEST_CASE("line measure of the unit square by quadrature over (phi, rho)") {
  const Window sq = Window::square({0, 0}, 1);
  const int n = 1000;
  const double rmax = 1.0, dphi = kPi / n, drho = 2 * rmax / n;
  double mass = 0.0;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const Line l{(i + 0.5) * dphi, -rmax + (j + 0.5) * drho};
      if (sq.chord(l)) mass += dphi * drho;
    }
  }
  CHECK(mass == doctest::Approx(4.0).epsilon(5e-3));
}

TEST_CASE("hitting lines of a centred disk have uniform direction") {
  Rng rng(12);
  const Window d = Window::disk({0, 0}, 1.5);
  std::vector<double> phi;
  for (int i = 0; i < 20000; ++i) phi.push_back(sample_hitting_line(d, rng).phi);
  std::sort(phi.begin(), phi.end());
  double ks = 0.0;
  const double n = static_cast<double>(phi.size());
  for (std::size_t i = 0; i < phi.size(); ++i) {
    const double f = phi[i] / kPi;
    ks = std::max({ks, (i + 1) / n - f, f - i / n});
  }
  // Kolmogorov critical value at level 0.001.
  CHECK(ks < 1.95 / std::sqrt(n));
}

TEST_CASE("intersection area agrees with dense point sampling") {
  Rng rng(31);
  for (int rep = 0; rep < 5; ++rep) {
    std::vector<Vec2> v;
    const int m = 9;
    for (int k = 0; k < m; ++k) v.push_back(unit_at(2 * kPi * k / m) * rng.uniform(0.5, 1.5));
    const Contour c(std::move(v));
    const Window w = rep % 2 ? Window::disk({rng.uniform(-1, 1), 0.3}, 1.1)
                             : Window::polygon({{-0.4, -1.2}, {1.6, -0.8}, {1.2, 1.4}, {-0.8, 0.9}});
    const int g = 600;
    const double h = 3.2 / g;
    double sampled = 0.0;
    for (int i = 0; i < g; ++i) {
      for (int j = 0; j < g; ++j) {
        const Vec2 p{-1.6 + (i + 0.5) * h, -1.6 + (j + 0.5) * h};
        if (c.contains(p) && w.contains(p)) sampled += h * h;
      }
    }
    CHECK(intersection_area(c, w) == doctest::Approx(sampled).epsilon(0.01));
  }
}

TEST_CASE("distances from a regular 64-gon to circles") {
  const double R = 3.0;
  const Contour c = Contour::regular({0, 0}, R, 64);
  CHECK(hausdorff_to_circle(c, {0, 0}, R) <= R * (1 - std::cos(kPi / 64)) + 1e-9);
  // No centre brings a radius-2R circle closer than R.
  const CircleFit fit = best_circle_fit(c, 2 * R);
  CHECK(fit.distance >= R - 1e-6);
  double grid_best = std::numeric_limits<double>::infinity();
  for (int i = -10; i <= 10; ++i) {
    for (int j = -10; j <= 10; ++j) grid_best = std::min(grid_best, hausdorff_to_circle(c, {0.2 * i, 0.2 * j}, 2 * R));
  }
  CHECK(grid_best >= R - 1e-6);
  CHECK(fit.distance <= grid_best + 1e-6);
}
