#include "polyfield/surface_tension.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "polyfield/spatial.hpp"
#include "polyfield/walk.hpp"

namespace polyfield {

const char* to_string(TensionMode m) { return m == TensionMode::finite ? "finite" : "infinite"; }

std::optional<TensionMode> parse_tension_mode(const std::string& s) {
  if (s == "finite") return TensionMode::finite;
  if (s == "infinite") return TensionMode::infinite;
  return std::nullopt;
}

Window tension_domain(Vec2 x, Vec2 y, double delta) {
  const double lambda = dist(x, y);
  if (!(lambda > 0.0) || !(delta > 0.0)) throw std::invalid_argument("tension_domain: need x != y and delta > 0");
  const Vec2 u = (y - x) / lambda, n = perp(u);
  const double h = lambda / 2.0 + delta;
  const Vec2 mid = (x + y) * 0.5;
  return Window::polygon({mid - u * h - n * h, mid + u * h - n * h, mid + u * h + n * h, mid - u * h + n * h});
}

TensionEstimate estimate_T(Vec2 x, Vec2 y, double delta, double beta, TensionMode mode, Rng& rng,
                           const TensionOptions& opts) {
  const double lambda = dist(x, y);
  if (!(beta > 2.0)) throw std::invalid_argument("estimate_T: beta must exceed 2");
  if (!(delta > 0.0) || !(lambda > 2.0 * delta)) throw std::invalid_argument("estimate_T: need |x - y| > 2 delta > 0");
  if (opts.replicas == 0 || opts.walks_per_environment == 0) {
    throw std::invalid_argument("estimate_T: replicas and walks_per_environment must be positive");
  }
  const double tilt = opts.tilt < 0.0 ? beta + 1.0 : opts.tilt;
  if (!(tilt < beta + 2.0)) throw std::invalid_argument("estimate_T: tilt must stay below beta + 2");

  const std::uint64_t base = rng.engine()();
  const Window domain = tension_domain(x, y, delta);
  const Vec2 mid = (x + y) * 0.5;
  const double env_radius = std::sqrt(2.0) * (lambda / 2.0 + delta) + opts.environment_margin;

  FieldSpec field;
  field.beta = beta;
  field.window = Window::disk(mid, env_radius);
  GibbsOptions gopts = opts.gibbs;
  if (opts.environment && !gopts.birth_mass) {
    Rng pilot(derive_seed(base, Stream::proposals));
    gopts.birth_mass = estimate_birth_mass(beta, field.window, gopts.pilot_proposals, pilot, gopts.proposal);
  }

  WalkParams wp;
  wp.kill_rate = beta - 2.0;
  wp.kill_as_weight = true;
  wp.tilt = tilt;
  wp.tilt_axis = (y - x) / lambda;
  wp.homing = opts.homing;
  wp.homing_mix = opts.homing_mix;
  wp.target = Ball{y, delta};
  wp.max_entries = opts.max_entries;
  if (mode == TensionMode::finite) wp.domain = &domain;

  TensionEstimate est;
  est.lambda = lambda;
  est.delta = delta;
  est.beta = beta;
  est.mode = mode;
  est.replicas = opts.replicas;
  est.tilt = tilt;
  est.homing = opts.homing;
  const double scale = 4.0 * kPi * delta;

  // Group sums for the standard error: one group per environment, or per walk
  // when walks are independent.
  const std::size_t group = opts.environment ? opts.walks_per_environment : 1;
  double total = 0.0, group_sq = 0.0, group_sum = 0.0;
  std::size_t group_n = 0, groups = 0;
  SegmentIndex obstacles(1.0);
  for (std::size_t i = 0; i < opts.replicas; ++i) {
    if (opts.environment && i % opts.walks_per_environment == 0) {
      Rng env(derive_seed(base, Stream::environment, est.environments));
      const FieldSample fs = sample_field(field, env, gopts);
      obstacles.clear();
      for (const auto& c : fs.configuration.contours) {
        for (std::size_t k = 0; k < c.size(); ++k) obstacles.add(c.edge(k), 0);
      }
      wp.obstacles = &obstacles;
      ++est.environments;
    }
    Rng walk_rng(derive_seed(base, Stream::walks, i));
    WalkState w = start_walk(x, delta, wp, walk_rng);
    run_walk(w, wp, walk_rng);
    const double value = scale * w.weighted_entries;
    total += value;
    group_sum += value;
    if (w.entries > 0) ++est.successes;
    est.entries += static_cast<std::size_t>(w.entries);
    if (w.entry_cap_hit) ++est.cap_hits;
    if (opts.keep_replicas) est.replica_values.push_back(value);
    if (++group_n == group || i + 1 == opts.replicas) {
      group_sq += group_sum * group_sum;
      group_sum = 0.0;
      group_n = 0;
      ++groups;
    }
  }

  const double n = static_cast<double>(opts.replicas);
  est.T_hat = total / n;
  // Variance of a mean of group totals (equal group sizes up to the last).
  const double g = static_cast<double>(groups);
  if (groups > 1) {
    const double mean_group = total / g;
    const double var_group = std::max(group_sq / g - mean_group * mean_group, 0.0) * g / (g - 1.0);
    est.T_std_error = std::sqrt(var_group * g) / n;
  } else {
    est.T_std_error = std::numeric_limits<double>::quiet_NaN();
  }
  if (est.successes == 0) {
    est.upper_bound_only = true;
    est.T_upper = scale * 3.0 / n;
    est.tau_lower = -std::log(est.T_upper) / lambda;
    est.tau_lambda = std::numeric_limits<double>::quiet_NaN();
    est.tau_std_error = std::numeric_limits<double>::quiet_NaN();
  } else {
    est.tau_lambda = -std::log(est.T_hat) / lambda;
    est.tau_std_error = est.T_std_error / (est.T_hat * lambda);
  }
  return est;
}

TensionFit fit_tension(std::span<const TensionEstimate> estimates) {
  // Weighted least squares on the basis (1, 1 / lambda).
  double s00 = 0.0, s01 = 0.0, s11 = 0.0, b0 = 0.0, b1 = 0.0;
  TensionFit fit;
  auto usable = [](const TensionEstimate& e) { return std::isfinite(e.tau_lambda) && e.tau_std_error > 0.0; };
  for (const auto& e : estimates) {
    if (!usable(e)) continue;
    const double w = 1.0 / (e.tau_std_error * e.tau_std_error), u = 1.0 / e.lambda;
    s00 += w;
    s01 += w * u;
    s11 += w * u * u;
    b0 += w * e.tau_lambda;
    b1 += w * u * e.tau_lambda;
    ++fit.points;
  }
  fit.residuals.assign(estimates.size(), std::numeric_limits<double>::quiet_NaN());
  const double det = s00 * s11 - s01 * s01;
  if (fit.points < 2 || !(det > 0.0)) {
    fit.tau = fit.c = fit.tau_std_error = fit.c_std_error = fit.chi2 = std::numeric_limits<double>::quiet_NaN();
    return fit;
  }
  fit.tau = (s11 * b0 - s01 * b1) / det;
  fit.c = (s00 * b1 - s01 * b0) / det;
  fit.tau_std_error = std::sqrt(s11 / det);
  fit.c_std_error = std::sqrt(s00 / det);
  for (std::size_t i = 0; i < estimates.size(); ++i) {
    const auto& e = estimates[i];
    if (!usable(e)) continue;
    fit.residuals[i] = e.tau_lambda - (fit.tau + fit.c / e.lambda);
    fit.chi2 += fit.residuals[i] * fit.residuals[i] / (e.tau_std_error * e.tau_std_error);
  }
  return fit;
}

TensionCurve tension_curve(std::span<const double> lambdas, double delta, double beta, TensionMode mode, Rng& rng,
                           const TensionOptions& opts) {
  for (std::size_t i = 1; i < lambdas.size(); ++i) {
    if (!(lambdas[i] > lambdas[i - 1])) throw std::invalid_argument("tension_curve: lambdas must increase");
  }
  TensionCurve curve;
  for (double lambda : lambdas) {
    Rng child = rng.split();
    curve.estimates.push_back(estimate_T({0.0, 0.0}, {lambda, 0.0}, delta, beta, mode, child, opts));
  }
  curve.fit = fit_tension(curve.estimates);
  return curve;
}

}  // namespace polyfield
