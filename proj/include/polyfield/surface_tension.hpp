#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "polyfield/geometry.hpp"
#include "polyfield/gibbs.hpp"
#include "polyfield/rng.hpp"

namespace polyfield {

enum class TensionMode { infinite, finite };

const char* to_string(TensionMode m);
std::optional<TensionMode> parse_tension_mode(const std::string& s);

struct TensionOptions {
  /// Number of walks.
  std::size_t replicas = 20000;
  /// Walks sharing one field draw.
  std::size_t walks_per_environment = 200;
  /// Draw obstacle fields; false runs the walks in empty space.
  bool environment = true;
  /// The environment is sampled in a disk about the midpoint of [x, y] of
  /// radius sqrt(2) (|x - y| / 2 + delta) + margin, which contains the
  /// finite-mode square. Beyond it the walk meets no contours.
  double environment_margin = 3.0;
  GibbsOptions gibbs;
  /// Segment-length tilt towards y; negative picks beta + 1. Must stay below beta + 2.
  double tilt = -1.0;
  double homing = 2.0;
  double homing_mix = 0.2;
  int max_entries = 32;
  /// Keep the per-walk contributions in the estimate.
  bool keep_replicas = false;
};

struct TensionEstimate {
  double lambda = 0.0;
  double delta = 0.0;
  double beta = 0.0;
  TensionMode mode = TensionMode::infinite;
  double T_hat = 0.0;
  /// Standard error from per-environment means; NaN with a single environment.
  double T_std_error = 0.0;
  /// -log(T_hat) / lambda; NaN when no walk entered the target.
  double tau_lambda = 0.0;
  /// Delta-method standard error of tau_lambda.
  double tau_std_error = 0.0;
  std::size_t replicas = 0;
  std::size_t environments = 0;
  /// Walks with at least one entry.
  std::size_t successes = 0;
  std::size_t entries = 0;
  /// Walks stopped at max_entries (the estimate is then biased low).
  std::size_t cap_hits = 0;
  /// No successes: only the rule-of-three bound 4 pi delta * 3 / replicas is
  /// reported. It is a proper bound for untilted walks only.
  bool upper_bound_only = false;
  double T_upper = 0.0;
  double tau_lower = 0.0;
  double tilt = 0.0;
  double homing = 0.0;
  /// 4 pi delta times the weighted entry count of each walk, in walk order.
  std::vector<double> replica_values;
};

/// Square of side |x - y| + 2 delta with two sides parallel to [x, y] and the
/// other two at distance delta beyond x and y.
Window tension_domain(Vec2 x, Vec2 y, double delta);

/// T(x <-> y; delta) = 4 pi delta E[inward crossings of the circle about y]
/// for the walk started on the circle about x, killed at rate beta - 2, on
/// self-contact and on contact with an independent field draw; finite mode
/// also kills on the boundary of tension_domain. Walks are importance
/// sampled (length tilt and homing turns) with the kill carried as weight.
/// Walk i and environment e use derive_seed streams from one draw of `rng`,
/// so both modes share trajectories under the same `rng` state.
TensionEstimate estimate_T(Vec2 x, Vec2 y, double delta, double beta, TensionMode mode, Rng& rng,
                           const TensionOptions& opts = {});

struct TensionFit {
  double tau = 0.0;
  double c = 0.0;
  double tau_std_error = 0.0;
  double c_std_error = 0.0;
  double chi2 = 0.0;
  /// tau_lambda - (tau + c / lambda) per estimate; NaN for estimates left out.
  std::vector<double> residuals;
  std::size_t points = 0;
};

/// Weighted least squares of tau_lambda = tau + c / lambda over estimates
/// with finite tau_lambda and positive standard error.
TensionFit fit_tension(std::span<const TensionEstimate> estimates);

struct TensionCurve {
  std::vector<TensionEstimate> estimates;
  TensionFit fit;
};

/// Estimates along x = 0, y = lambda e_x for increasing lambdas.
TensionCurve tension_curve(std::span<const double> lambdas, double delta, double beta, TensionMode mode, Rng& rng,
                           const TensionOptions& opts = {});

}  // namespace polyfield
