#include <doctest.h>

#include <cmath>

#include "polyfield/skeleton.hpp"

using namespace polyfield;

namespace {

Contour quarter_turn(const Contour& c) {
  std::vector<Vec2> v;
  for (Vec2 p : c.vertices()) v.push_back({-p.y, p.x});
  return Contour(std::move(v));
}

Contour star(Rng& rng, Vec2 c, double r, int n) {
  std::vector<Vec2> v;
  for (int i = 0; i < n; ++i) v.push_back(c + unit_at(2 * kPi * i / n) * (r * (1 + 0.4 * (rng.uniform() - 0.5))));
  return Contour(std::move(v));
}

}  // namespace

TEST_CASE("skeleton of a circle") {
  const std::vector<Contour> g{Contour::regular({0.3, -0.2}, 12, 400)};
  const Skeleton sk = extract_skeleton(g, 4.0, 1.0, 20.0);
  const auto v = verify_skeleton(sk, g);
  CHECK_MESSAGE(v.ok(), v.failure);
  CHECK(sk.segments.size() >= 6);
  for (const auto& s : sk.segments) {
    CHECK(s.I.x == std::round(s.I.x));
    CHECK(s.E.y == std::round(s.E.y));
  }
  const auto iso = isoperimetric_check(sk, g);
  CHECK(iso.area == doctest::Approx(g[0].area()));
  CHECK(iso.within_budget);
  // Skeleton length is close to the perimeter.
  CHECK(std::abs(iso.slack) < iso.budget);
}

TEST_CASE("two disks of half area still exceed the isoperimetric bound") {
  const double r = 8.0;
  const std::vector<Contour> g{Contour::regular({-15, 0}, r, 300), Contour::regular({15, 0}, r, 300)};
  const Skeleton sk = extract_skeleton(g, 4.0, 1.0, 30.0);
  CHECK(verify_skeleton(sk, g).ok());
  const auto iso = isoperimetric_check(sk, g);
  CHECK(iso.area == doctest::Approx(2 * g[0].area()));
  CHECK(iso.skeleton_length >= iso.lower_bound - iso.budget);
  CHECK(2 * 2 * std::sqrt(kPi * iso.area / 2) > iso.lower_bound);
}

TEST_CASE("empty family") {
  const Skeleton sk = extract_skeleton({}, 4.0, 1.0, 10.0);
  CHECK(sk.segments.empty());
  CHECK(verify_skeleton(sk, {}).ok());
  const auto iso = isoperimetric_check(sk, {});
  CHECK(iso.within_budget);
  CHECK(iso.area == 0.0);
}

TEST_CASE("preconditions") {
  const std::vector<Contour> g{Contour::regular({0, 0}, 5, 100)};
  CHECK_THROWS_AS(extract_skeleton(g, 4.0, 2.0, 20.0), std::invalid_argument);   // alpha < 4 delta
  CHECK_THROWS_AS(extract_skeleton(g, 12.0, 1.0, 20.0), std::invalid_argument);  // not alpha-large
  CHECK_THROWS_AS(extract_skeleton(g, 4.0, 1.0, 5.2), std::invalid_argument);    // leaves B(L - 1/sqrt 2)
}

TEST_CASE("random star families pass the verifier") {
  Rng rng(77);
  for (int rep = 0; rep < 15; ++rep) {
    std::vector<Contour> g;
    for (int k = 0; k < 3; ++k) {
      const Contour c = star(rng, {rng.uniform(-14, 14), rng.uniform(-14, 14)}, rng.uniform(5, 9), 60);
      bool ok = true;
      for (const auto& d : g) ok = ok && !interiors_overlap(c, d);
      if (ok) g.push_back(c);
    }
    const Skeleton sk = extract_skeleton(g, 5.0, 1.2, 32.0);
    const auto v = verify_skeleton(sk, g);
    CHECK_MESSAGE(v.ok(), v.failure);
    CHECK(isoperimetric_check(sk, g).within_budget);
  }
}

TEST_CASE("verifier rejects a tampered skeleton") {
  const std::vector<Contour> g{Contour::regular({0, 0}, 10, 300)};
  Skeleton sk = extract_skeleton(g, 4.0, 1.0, 20.0);
  REQUIRE(sk.segments.size() > 3);
  sk.segments.pop_back();
  sk.segments.erase(sk.segments.begin() + 1);
  CHECK_FALSE(verify_skeleton(sk, g).ok());
  Skeleton moved = extract_skeleton(g, 4.0, 1.0, 20.0);
  moved.segments[0].I = moved.segments[0].I + Vec2{3, 0};
  CHECK_FALSE(verify_skeleton(moved, g).ok());
}

TEST_CASE("quarter-turn covariance about the origin") {
  Rng rng(5);
  for (int rep = 0; rep < 10; ++rep) {
    std::vector<Contour> g{star(rng, {rng.uniform(-5, 5), rng.uniform(-5, 5)}, rng.uniform(6, 10), 50)};
    std::vector<Contour> h{quarter_turn(g[0])};
    const Skeleton a = extract_skeleton(g, 4.0, 1.0, 20.0), b = extract_skeleton(h, 4.0, 1.0, 20.0);
    REQUIRE(a.segments.size() == b.segments.size());
    for (std::size_t i = 0; i < a.segments.size(); ++i) {
      const Vec2 I = a.segments[i].I, E = a.segments[i].E;
      CHECK(b.segments[i].I == Vec2{-I.y, I.x});
      CHECK(b.segments[i].E == Vec2{-E.y, E.x});
    }
  }
}
