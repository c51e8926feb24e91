#pragma once

#include <limits>
#include <optional>
#include <vector>

#include "polyfield/geometry.hpp"
#include "polyfield/rng.hpp"
#include "polyfield/spatial.hpp"

namespace polyfield {

struct Ball {
  Vec2 center;
  double radius = 0.0;
};

enum class WalkStatus {
  alive,
  killed_rate,
  killed_self,
  killed_obstacle,
  killed_boundary,
  killed_length,
  succeeded,
};

const char* to_string(WalkStatus s);

enum class WalkEvent { none, start, update, entry, exit, terminal };

/// Direction-updating walk: speed 1, direction updates at rate 4 per unit
/// length with turn angle density |sin phi| / 4 on (0, 2 pi).
struct WalkParams {
  double kill_rate = 0.0;
  /// Fold killing into the segment-length law and carry it in log_weight
  /// instead of terminating the walk.
  bool kill_as_weight = false;
  /// Exponential tilt of segment lengths toward `tilt_axis`: segments with
  /// heading angle t are drawn at rate 4 + k - tilt cos t (k the folded kill).
  double tilt = 0.0;
  Vec2 tilt_axis{1.0, 0.0};
  /// Homing proposal: at an update the new heading is drawn, with
  /// probability 1 - homing_mix, from a von Mises law of this concentration
  /// centred on the direction to the target; otherwise from the turn kernel.
  /// The likelihood ratio goes into log_weight. 0 disables.
  double homing = 0.0;
  double homing_mix = 0.2;
  bool self_avoiding = true;
  const Window* domain = nullptr;          // finite mode: killed on the boundary
  const SegmentIndex* obstacles = nullptr; // killed on contact
  std::optional<Ball> target;              // entries into the ball are counted
  bool stop_on_entry = false;
  int max_entries = 32;
  double max_length = std::numeric_limits<double>::infinity();
};

struct WalkState {
  Vec2 position;
  Vec2 direction;
  /// Update points; trace.front() is the start, trace.back() the origin of
  /// the current segment.
  std::vector<Vec2> trace;
  WalkStatus status = WalkStatus::alive;
  WalkEvent last_event = WalkEvent::none;
  double length = 0.0;
  double to_update = 0.0;
  double to_kill = std::numeric_limits<double>::infinity();
  double segment_rate = 4.0;
  double log_weight = 0.0;
  int entries = 0;
  double weighted_entries = 0.0;
  bool inside_target = false;
  bool entry_cap_hit = false;
};

/// Turn angle with density |sin phi| / 4 on (0, 2 pi).
double sample_turn_angle(Rng& rng);

/// Von Mises angle with mean mu and concentration kappa > 0.
double sample_von_mises(double mu, double kappa, Rng& rng);
double von_mises_density(double x, double mu, double kappa);

/// Walk at `start` heading along unit `direction`; draws the first residuals.
WalkState make_walk(Vec2 start, Vec2 direction, const WalkParams& params, Rng& rng);

/// Start rule on a ball: a mu-line hitting B(x, delta), one of its two circle
/// points with probability 1/2, heading outward along the line.
WalkState start_walk(Vec2 x, double delta, const WalkParams& params, Rng& rng);

/// Advance to the next event (direction update, kill, self-hit, obstacle,
/// boundary, length cap, target entry or exit).
void step_walk(WalkState& state, const WalkParams& params, Rng& rng);

/// Run until the walk terminates.
void run_walk(WalkState& state, const WalkParams& params, Rng& rng);

}  // namespace polyfield
