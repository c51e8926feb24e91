#pragma once

#include <cstddef>
#include <utility>

#include "polyfield/geometry.hpp"
#include "polyfield/rng.hpp"

namespace polyfield {

/// Angle between two lines of a Poisson line process: density sin(phi)/2 on
/// (0, pi), by inversion phi = arccos(1 - 2U).
double sample_typical_angle(Rng& rng);

/// Velocities of the two particles emitted at an interior birth site, with
/// joint density |v' - v''| (1 + v'^2)^{-3/2} (1 + v''^2)^{-3/2} / (2 pi).
std::pair<double, double> sample_velocity_pair(Rng& rng);

/// Total velocity-jump rate per unit time: integral of |u - v| (1 + u^2)^{-3/2} du.
inline double velocity_jump_rate(double v) { return 2.0 * std::sqrt(1.0 + v * v); }

struct VelocityJump {
  double waiting_time = 0.0;
  double new_velocity = 0.0;
};

/// Waiting time ~ Exp(q(v)); the new trajectory direction is the old one
/// turned by a typical angle (mod pi).
VelocityJump velocity_jump_kernel(double v, Rng& rng);

struct ArakOptions {
  std::size_t max_events = 10'000'000;
};

struct ArakStats {
  std::size_t interior_births = 0;
  std::size_t boundary_births = 0;
  std::size_t velocity_jumps = 0;
  std::size_t collisions = 0;
  std::size_t boundary_deaths = 0;
  std::size_t events = 0;
  /// A collision point was shared by more than two particles.
  bool triple_collision = false;
};

struct ArakResult {
  FreeConfiguration configuration;
  ArakStats stats;
};

/// Free-boundary Arak process in a convex window, traced by a particle
/// system in time-space with time along the x axis.
ArakResult run_arak(const Window& window, Rng& rng, const ArakOptions& opts = {});

}  // namespace polyfield
