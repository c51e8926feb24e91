#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "polyfield/surface_tension.hpp"
#include "polyfield/walk.hpp"

using namespace polyfield;

TEST_CASE("tension domain is the square around [x, y]") {
  const Window d = tension_domain({0, 0}, {6, 0}, 1);
  CHECK(d.area() == doctest::Approx(64.0));
  CHECK(d.contains({-0.9, 3.9}));
  CHECK_FALSE(d.contains({-1.1, 0}));
  CHECK_FALSE(d.contains({3, 4.1}));
  const Window r = tension_domain({0, 0}, {0, 6}, 1);
  CHECK(r.contains({3.9, 6.9}));
  CHECK_THROWS(tension_domain({1, 1}, {1, 1}, 1));
}

TEST_CASE("fit recovers tau + c / lambda exactly from clean points") {
  std::vector<TensionEstimate> e;
  for (double l : {3.0, 6.0, 9.0, 12.0}) {
    TensionEstimate t;
    t.lambda = l;
    t.tau_lambda = 4.5 - 2.0 / l;
    t.tau_std_error = 0.05 * l / 12;
    e.push_back(t);
  }
  const auto fit = fit_tension(e);
  CHECK(fit.points == 4);
  CHECK(fit.tau == doctest::Approx(4.5));
  CHECK(fit.c == doctest::Approx(-2.0));
  CHECK(fit.chi2 == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(fit.tau_std_error > 0.0);
  e[1].tau_lambda = std::nan("");
  CHECK(std::isnan(fit_tension(e).residuals[1]));
}

TEST_CASE("input checks") {
  Rng rng(1);
  CHECK_THROWS(estimate_T({0, 0}, {6, 0}, 1, 2.0, TensionMode::infinite, rng));
  CHECK_THROWS(estimate_T({0, 0}, {1.5, 0}, 1, 5.0, TensionMode::infinite, rng));
  TensionOptions o;
  o.tilt = 7.5;
  CHECK_THROWS(estimate_T({0, 0}, {6, 0}, 1, 5.0, TensionMode::infinite, rng, o));
}

TEST_CASE("killed walk entries decrease with beta under common seeds") {
  // Unfolded kill: the kill distance is Exp(beta - 2) from the same uniform,
  // so each walk's entry count is monotone in beta.
  const Ball target{{5, 0}, 1};
  double prev = std::numeric_limits<double>::infinity();
  for (double beta : {2.5, 3.0, 4.0, 5.0}) {
    WalkParams p;
    p.kill_rate = beta - 2.0;
    p.target = target;
    double total = 0.0;
    std::vector<int> per;
    for (std::uint64_t i = 0; i < 3000; ++i) {
      Rng rng(derive_seed(4, Stream::walks, i));
      WalkState w = start_walk({0, 0}, 1.0, p, rng);
      run_walk(w, p, rng);
      total += w.entries;
    }
    CHECK(total <= prev);
    prev = total;
  }
}

TEST_CASE("finite mode never exceeds infinite mode walk by walk") {
  TensionOptions o;
  o.replicas = 2000;
  o.environment = false;
  o.keep_replicas = true;
  Rng a(17), b(17);
  const auto inf = estimate_T({0, 0}, {6, 0}, 1, 5.0, TensionMode::infinite, a, o);
  const auto fin = estimate_T({0, 0}, {6, 0}, 1, 5.0, TensionMode::finite, b, o);
  REQUIRE(inf.replica_values.size() == fin.replica_values.size());
  for (std::size_t i = 0; i < inf.replica_values.size(); ++i) CHECK(fin.replica_values[i] <= inf.replica_values[i]);
  CHECK(inf.successes > 0);
  CHECK(inf.tau_lambda > 0.0);
  CHECK(fin.T_hat <= inf.T_hat);
}

TEST_CASE("no success yields only an upper bound") {
  TensionOptions o;
  o.replicas = 5;
  o.environment = false;
  o.tilt = 0.0;
  o.homing = 0.0;
  Rng rng(3);
  const auto e = estimate_T({0, 0}, {40, 0}, 1, 5.0, TensionMode::infinite, rng, o);
  CHECK(e.upper_bound_only);
  CHECK(e.T_upper == doctest::Approx(4 * kPi * 3.0 / 5));
  CHECK(std::isnan(e.tau_lambda));
  CHECK(e.tau_lower == doctest::Approx(-std::log(e.T_upper) / 40.0));
}

TEST_CASE("start offset is uniform across the ball") {
  const double delta = 1.5;
  const Vec2 x{2, -1};
  Rng rng(31);
  std::vector<double> u;
  for (int i = 0; i < 20000; ++i) {
    const WalkState w = start_walk(x, delta, WalkParams{}, rng);
    u.push_back(cross(w.direction, w.position - x));
  }
  std::sort(u.begin(), u.end());
  double d = 0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    const double F = (u[i] + delta) / (2 * delta);
    d = std::max({d, std::abs(F - double(i) / u.size()), std::abs(F - double(i + 1) / u.size())});
  }
  CHECK(d < 1.63 / std::sqrt(double(u.size())));
}

TEST_CASE("empty space estimate clears the straight-shot bound") {
  // Lines within theta of the axis and offset below delta / 2 reach B(y, delta)
  // without turning; half of their starts head towards y.
  const double lambda = 4, delta = 1, beta = 5;
  const double theta = std::asin(delta / (2 * lambda));
  const double bound = 2 * delta * theta * std::exp(-(beta + 2) * lambda);
  TensionOptions o;
  o.replicas = 4000;
  o.environment = false;
  Rng rng(8);
  const auto e = estimate_T({0, 0}, {lambda, 0}, delta, beta, TensionMode::infinite, rng, o);
  CHECK(e.successes > 0);
  CHECK(e.T_hat >= bound);
}

TEST_CASE("tension at lambda 10 is finite and positive among obstacles") {
  TensionOptions o;
  o.replicas = 2000;
  o.walks_per_environment = 200;
  o.gibbs.pilot_proposals = 4000;
  Rng rng(12);
  const auto e = estimate_T({0, 0}, {10, 0}, 1.0, 5.0, TensionMode::infinite, rng, o);
  REQUIRE(e.successes > 0);
  CHECK(std::isfinite(e.tau_lambda));
  CHECK(e.tau_lambda > 0.0);
}
