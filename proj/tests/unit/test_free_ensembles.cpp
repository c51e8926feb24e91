#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "polyfield/free_ensembles.hpp"

using namespace polyfield;

TEST_CASE("enumeration on few lines") {
  const Window w = Window::disk({0, 0}, 5);
  SUBCASE("no lines gives only the empty configuration") {
    const auto r = enumerate_admissible_on_lines({}, w, BoundaryMode::empty);
    REQUIRE(r.configurations.size() == 1);
    CHECK(r.configurations[0].contours.empty());
  }
  SUBCASE("two lines cannot close a contour") {
    const std::vector<Line> lines{Line::through({0, 0}, {1, 0}), Line::through({0, 0}, {0, 1})};
    CHECK(enumerate_admissible_on_lines(lines, w, BoundaryMode::empty).configurations.empty());
  }
  SUBCASE("three lines with an inner triangle give that triangle") {
    const Vec2 a{0, 0}, b{2, 0}, c{0.5, 1.5};
    const std::vector<Line> lines{Line::through(a, b), Line::through(b, c), Line::through(c, a)};
    const auto r = enumerate_admissible_on_lines(lines, w, BoundaryMode::empty);
    REQUIRE(r.configurations.size() == 1);
    REQUIRE(r.configurations[0].contours.size() == 1);
    CHECK(r.configurations[0].contours[0].area() == doctest::Approx(1.5));
    CHECK(r.configurations[0].chains.empty());
  }
  SUBCASE("free boundary: one chord") {
    const std::vector<Line> lines{Line::through({0, 1}, {1, 1})};
    const auto r = enumerate_admissible_on_lines(lines, w, BoundaryMode::free);
    REQUIRE(r.configurations.size() == 1);
    REQUIRE(r.configurations[0].chains.size() == 1);
    CHECK(r.configurations[0].chains[0].length() == doctest::Approx(2 * std::sqrt(24.0)));
  }
  SUBCASE("free boundary: two crossing chords give the four corner paths") {
    // The two full chords would cross; each admissible configuration turns at
    // the crossing point and runs out to the boundary on both lines.
    const std::vector<Line> lines{Line::through({0, 0}, {1, 0}), Line::through({0, 0}, {0, 1})};
    const auto r = enumerate_admissible_on_lines(lines, w, BoundaryMode::free);
    CHECK(r.configurations.size() == 4);
    for (const auto& c : r.configurations) CHECK(c.length() == doctest::Approx(10.0));
  }
  SUBCASE("over the cap") {
    std::vector<Line> lines;
    for (int i = 0; i < 9; ++i) lines.push_back(Line{0.3 * i, 0.1 * i});
    CHECK_THROWS_AS(enumerate_admissible_on_lines(lines, w, BoundaryMode::empty, 8), std::length_error);
  }
}

TEST_CASE("enumeration oracle on random line sets") {
  Rng rng(11);
  const Window w = Window::disk({0, 0}, 1);
  for (int rep = 0; rep < 30; ++rep) {
    std::vector<Line> lines;
    const int n = 3 + rep % 3;
    for (int i = 0; i < n; ++i) lines.push_back(sample_hitting_line(w, rng));
    for (BoundaryMode mode : {BoundaryMode::empty, BoundaryMode::free}) {
      const auto r = enumerate_admissible_on_lines(lines, w, mode);
      std::set<std::vector<long long>> seen;
      for (const auto& c : r.configurations) {
        if (mode == BoundaryMode::empty) {
          CHECK(c.chains.empty());
          CHECK(is_admissible(PolygonalConfiguration{c.contours}, w));
        } else {
          CHECK(is_admissible(c, w));
        }
        // Every line carries exactly one interval: the edge count equals n.
        std::size_t edges = 0;
        for (const auto& k : c.contours) edges += k.size();
        for (const auto& ch : c.chains) edges += ch.vertices.size() - 1;
        CHECK(edges == static_cast<std::size_t>(n));
        std::vector<long long> key;
        for (const auto& k : c.contours) {
          for (Vec2 v : k.vertices()) key.push_back(std::llround(v.x * 1e6) * 7 + std::llround(v.y * 1e6));
        }
        for (const auto& ch : c.chains) {
          for (Vec2 v : ch.vertices) key.push_back(std::llround(v.x * 1e6) * 7 + std::llround(v.y * 1e6));
        }
        std::sort(key.begin(), key.end());
        CHECK(seen.insert(key).second);
      }
      double direct = 0.0;
      for (const auto& c : r.configurations) direct += std::exp(-2.0 * c.length());
      CHECK(configuration_weight_sum(lines, w, mode) == doctest::Approx(direct));
    }
  }
}

TEST_CASE("partition function on a tiny window is close to one") {
  Rng rng(5);
  const Window w = Window::disk({0, 0}, 0.01);
  const auto est = estimate_partition_function(w, BoundaryMode::free, 2000, rng);
  CHECK(est.estimate == doctest::Approx(std::exp(kPi * w.area())).epsilon(1e-3));
}

TEST_CASE("contour proposal density matches its sampler") {
  Rng rng(21);
  const Window anchor = Window::square({0, 0}, 1), window = Window::disk({0, 0}, 6);
  int closed = 0;
  for (int i = 0; i < 4000 && closed < 40; ++i) {
    const auto p = propose_free_contour(5.0, anchor, window, rng);
    if (!p) continue;
    ++closed;
    CHECK(p->contour.is_simple());
    CHECK(p->log_target_density == doctest::Approx(contour_log_target(p->contour, 5.0)));
    CHECK(contour_proposal_log_density(p->contour, 5.0, anchor, window) ==
          doctest::Approx(p->log_proposal_density).epsilon(1e-9));
  }
  CHECK(closed > 0);
}

TEST_CASE("free log target uses weight 2 + beta per unit length") {
  const Contour t({{0, 0}, {3, 0}, {0, 4}});
  CHECK(contour_log_target(t, 5.0) == doctest::Approx(-7.0 * 12.0));
}

TEST_CASE("free paths end on the target circle") {
  Rng rng(8);
  const PathFamilySpec spec{{0, 0}, {1.5, 0}, 0.5};
  int ok = 0;
  for (int i = 0; i < 20000; ++i) {
    const auto p = propose_free_path(spec, 2.5, nullptr, rng);
    if (!p) continue;
    ++ok;
    CHECK(dist(p->vertices.back(), spec.y) == doctest::Approx(0.5).epsilon(1e-6));
    CHECK(dist(p->vertices.front(), spec.x) == doctest::Approx(0.5).epsilon(1e-6));
  }
  CHECK(ok > 0);
}

TEST_CASE("empty-boundary weights never exceed free-boundary weights") {
  Rng rng(40);
  const Window w = Window::disk({0, 0}, 0.5);
  for (int rep = 0; rep < 300; ++rep) {
    const auto lines = sample_poisson_lines(w, rng);
    if (lines.size() > kEnumerationCap) continue;
    CHECK(configuration_weight_sum(lines, w, BoundaryMode::empty) <=
          configuration_weight_sum(lines, w, BoundaryMode::free) * (1 + 1e-12));
  }
}

TEST_CASE("two closure radii estimate the same free-measure integral") {
  // I = integral of exp(-len) over contours through the anchor, under the
  // tilted free measure; both proposals are unbiased for it.
  const double beta = 5.0;
  const Window anchor = Window::square({0, 0}, 1), window = Window::disk({0, 0}, 6);
  auto estimate = [&](double radius, std::uint64_t seed) {
    ContourProposalOptions o;
    o.closure_radius = radius;
    o.kill_rate = 1.5;
    Rng rng(seed);
    const int n = 200000;
    double s = 0, s2 = 0;
    for (int i = 0; i < n; ++i) {
      const auto p = propose_free_contour(beta, anchor, window, rng, o);
      const double v = p ? p->weight() * std::exp(-p->contour.length()) : 0.0;
      s += v;
      s2 += v * v;
    }
    const double m = s / n;
    return std::pair{m, std::sqrt((s2 / n - m * m) / n)};
  };
  const auto [a, sa] = estimate(0.1, 1);
  const auto [b, sb] = estimate(0.2, 2);
  CHECK(a > 0.0);
  CHECK(std::abs(a - b) <= 3 * std::sqrt(sa * sa + sb * sb));
}

TEST_CASE("free path success falls with the distance between the balls") {
  std::vector<int> successes;
  for (double d : {1.5, 2.0, 2.5}) {
    const PathFamilySpec spec{{0, 0}, {d, 0}, 0.5};
    int ok = 0;
    for (std::uint64_t i = 0; i < 20000; ++i) {
      Rng rng(derive_seed(17, Stream::walks, i));
      ok += propose_free_path(spec, 2.5, nullptr, rng).has_value();
    }
    successes.push_back(ok);
  }
  CHECK(successes[0] > successes[1]);
  CHECK(successes[1] > successes[2]);
  CHECK(successes[2] > 0);
}
