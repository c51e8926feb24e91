#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "polyfield/arak.hpp"

using namespace polyfield;

TEST_CASE("typical angle lies in (0, pi) with mean pi / 2") {
  Rng rng(1);
  double sum = 0.0;
  const int n = 20000;
  for (int i = 0; i < n; ++i) {
    const double phi = sample_typical_angle(rng);
    REQUIRE(phi > 0.0);
    REQUIRE(phi < kPi);
    sum += phi;
  }
  // Var = pi^2 / 4 - 2 under density sin / 2.
  CHECK(std::abs(sum / n - kPi / 2) < 4 * std::sqrt((kPi * kPi / 4 - 2) / n));
}

TEST_CASE("velocity kernels") {
  CHECK(velocity_jump_rate(0.0) == doctest::Approx(2.0));
  CHECK(velocity_jump_rate(1.0) == doctest::Approx(2 * std::sqrt(2.0)));
  Rng rng(2);
  for (int i = 0; i < 1000; ++i) {
    const auto [a, b] = sample_velocity_pair(rng);
    CHECK(std::isfinite(a));
    CHECK(std::isfinite(b));
    const auto j = velocity_jump_kernel(0.3, rng);
    CHECK(j.waiting_time > 0.0);
    CHECK(std::isfinite(j.new_velocity));
  }
}

TEST_CASE("arak samples are admissible free-boundary configurations") {
  const Window w = Window::disk({0, 0}, 2);
  for (std::uint64_t s = 0; s < 20; ++s) {
    Rng rng(derive_seed(99, Stream::arak, s));
    const auto res = run_arak(w, rng);
    CHECK(is_admissible(res.configuration, w));
    CHECK(res.stats.events > 0);
  }
}

TEST_CASE("arak sampling is deterministic per seed") {
  const Window w = Window::square({0, 0}, 3);
  Rng a(7), b(7);
  const auto x = run_arak(w, a), y = run_arak(w, b);
  REQUIRE(x.configuration.contours.size() == y.configuration.contours.size());
  REQUIRE(x.configuration.chains.size() == y.configuration.chains.size());
  CHECK(x.configuration.length() == y.configuration.length());
}

TEST_CASE("event cap") {
  Rng rng(3);
  ArakOptions o;
  o.max_events = 5;
  CHECK_THROWS(run_arak(Window::disk({0, 0}, 6), rng, o));
}

TEST_CASE("length density is pi per unit area") {
  // Each segment is a piece of a mu-line, so E length in D = pi Area(D).
  const Window w = Window::disk({0, 0}, 3);
  double total = 0.0;
  const int reps = 300;
  for (int r = 0; r < reps; ++r) {
    Rng rng(derive_seed(5, Stream::arak, r));
    total += run_arak(w, rng).configuration.length();
  }
  CHECK(total / reps / w.area() == doctest::Approx(kPi).epsilon(0.05));
}

TEST_CASE("typical angle CDF at pi / 2 is one half") {
  Rng rng(4);
  const int n = 40000;
  int below = 0;
  for (int i = 0; i < n; ++i) below += sample_typical_angle(rng) < kPi / 2;
  CHECK(std::abs(below / double(n) - 0.5) < 3 * std::sqrt(0.25 / n));
}

TEST_CASE("velocity marginal has a t^-2 density tail") {
  // P(|v'| > t) ~ C / t for a density decaying like t^-2.
  Rng rng(6);
  const int n = 400000;
  std::vector<double> a;
  for (int i = 0; i < n; ++i) a.push_back(std::abs(sample_velocity_pair(rng).first));
  std::vector<double> x, y;
  for (double t : {4.0, 8.0, 16.0, 32.0, 64.0}) {
    const auto c = std::count_if(a.begin(), a.end(), [&](double v) { return v > t; });
    x.push_back(std::log(t));
    y.push_back(std::log(double(c) / n));
  }
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) mx += x[i] / x.size(), my += y[i] / y.size();
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < x.size(); ++i) sxy += (x[i] - mx) * (y[i] - my), sxx += (x[i] - mx) * (x[i] - mx);
  CHECK(sxy / sxx == doctest::Approx(-1.0).epsilon(0.1));
}

TEST_CASE("empirical jump rate matches q(v) and grows with |v|") {
  Rng rng(8);
  double prev = 0.0;
  for (double v : {0.0, 1.0, 2.0}) {
    const int n = 40000;
    double total = 0.0;
    for (int i = 0; i < n; ++i) total += velocity_jump_kernel(v, rng).waiting_time;
    const double rate = n / total;
    CHECK(rate == doctest::Approx(velocity_jump_rate(v)).epsilon(0.03));
    CHECK(rate > prev);
    prev = rate;
  }
}

TEST_CASE("rotating the window rotates the law") {
  // Time runs along x, so isotropy is a property of the dynamics rather than
  // of the parametrisation. Compare edge lengths in a square and in the same
  // square turned by pi / 5.
  const Window a = Window::square({0, 0}, 3), b = a.rotated(kPi / 5);
  auto edges = [](const Window& w, std::uint64_t seed) {
    std::vector<double> len;
    for (std::uint64_t r = 0; r < 400; ++r) {
      Rng rng(derive_seed(seed, Stream::arak, r));
      const auto res = run_arak(w, rng);
      for (const auto& c : res.configuration.contours) {
        for (std::size_t i = 0; i < c.size(); ++i) len.push_back(c.edge(i).length());
      }
      for (const auto& c : res.configuration.chains) {
        for (std::size_t i = 0; i + 1 < c.vertices.size(); ++i) len.push_back(dist(c.vertices[i], c.vertices[i + 1]));
      }
    }
    std::sort(len.begin(), len.end());
    return len;
  };
  const auto x = edges(a, 21), y = edges(b, 22);
  // Two-sample Kolmogorov distance.
  double d = 0.0;
  std::size_t i = 0, j = 0;
  while (i < x.size() && j < y.size()) {
    if (x[i] <= y[j]) ++i;
    else ++j;
    d = std::max(d, std::abs(double(i) / x.size() - double(j) / y.size()));
  }
  const double ne = double(x.size()) * y.size() / (x.size() + y.size());
  // Critical value at level 0.001.
  CHECK(d < 1.95 / std::sqrt(ne));
}
