#include "polyfield/walk.hpp"

#include <algorithm>
#include <cmath>

namespace polyfield {

const char* to_string(WalkStatus s) {
  switch (s) {
    case WalkStatus::alive: return "alive";
    case WalkStatus::killed_rate: return "killed_rate";
    case WalkStatus::killed_self: return "killed_self";
    case WalkStatus::killed_obstacle: return "killed_obstacle";
    case WalkStatus::killed_boundary: return "killed_boundary";
    case WalkStatus::killed_length: return "killed_length";
    case WalkStatus::succeeded: return "succeeded";
  }
  return "unknown";
}

double sample_turn_angle(Rng& rng) {
  const double phi = std::acos(1.0 - 2.0 * rng.uniform());
  return rng.bernoulli(0.5) ? phi + kPi : phi;
}

double sample_von_mises(double mu, double kappa, Rng& rng) {
  // Best and Fisher (1979).
  const double tau = 1.0 + std::sqrt(1.0 + 4.0 * kappa * kappa);
  const double rho = (tau - std::sqrt(2.0 * tau)) / (2.0 * kappa);
  const double r = (1.0 + rho * rho) / (2.0 * rho);
  for (;;) {
    const double z = std::cos(kPi * rng.uniform());
    const double f = (1.0 + r * z) / (r + z);
    const double c = kappa * (r - f);
    const double u2 = rng.uniform();
    if (c * (2.0 - c) - u2 > 0.0 || std::log(c / u2) + 1.0 - c >= 0.0) {
      const double x = std::acos(std::clamp(f, -1.0, 1.0));
      return rng.bernoulli(0.5) ? mu + x : mu - x;
    }
  }
}

double von_mises_density(double x, double mu, double kappa) {
  return std::exp(kappa * (std::cos(x - mu) - 1.0)) / (2.0 * kPi * std::cyl_bessel_i(0.0, kappa) * std::exp(-kappa));
}

namespace {

constexpr double kCircleEps = 1e-9;

double folded_kill(const WalkParams& p) { return p.kill_as_weight ? p.kill_rate : 0.0; }

void draw_segment(WalkState& s, const WalkParams& p, Rng& rng) {
  s.segment_rate = 4.0 + folded_kill(p) - p.tilt * dot(s.direction, p.tilt_axis);
  if (!(s.segment_rate > 0.0)) throw std::invalid_argument("walk tilt exceeds the segment rate");
  s.to_update = rng.exponential(s.segment_rate);
}

// Distance along the ray to the next crossing of the target circle.
std::optional<double> circle_crossing(Vec2 p, Vec2 d, const Ball& b, bool inside) {
  const Vec2 m = p - b.center;
  const double bb = dot(d, m);
  const double cc = dot(m, m) - b.radius * b.radius;
  const double disc = bb * bb - cc;
  if (disc < 0.0) return std::nullopt;
  const double sq = std::sqrt(disc);
  const double u1 = -bb - sq, u2 = -bb + sq;
  if (inside) {
    if (u2 > kCircleEps) return u2;
    return std::nullopt;
  }
  if (u1 > kCircleEps) return u1;
  return std::nullopt;
}

}  // namespace

WalkState make_walk(Vec2 start, Vec2 direction, const WalkParams& params, Rng& rng) {
  WalkState s;
  s.position = start;
  s.direction = direction;
  s.trace.push_back(start);
  s.last_event = WalkEvent::start;
  if (params.kill_rate > 0.0 && !params.kill_as_weight) s.to_kill = rng.exponential(params.kill_rate);
  draw_segment(s, params, rng);
  if (params.target) s.inside_target = dist(start, params.target->center) < params.target->radius - kCircleEps;
  return s;
}

WalkState start_walk(Vec2 x, double delta, const WalkParams& params, Rng& rng) {
  if (!(delta > 0.0)) throw std::invalid_argument("start_walk: delta must be positive");
  const double phi = kPi * rng.uniform();
  const Line l{phi, dot(x, Vec2{std::sin(phi), std::cos(phi)}) + rng.uniform(-delta, delta)};
  const auto chord = Window::disk(x, delta).chord(l);
  const bool first = rng.bernoulli(0.5);
  Vec2 p = x + l.normal() * (l.rho - dot(x, l.normal()));
  if (chord) p = first ? chord->first : chord->second;
  Vec2 d = l.direction();
  if (dot(d, p - x) < 0.0) d = -d;
  return make_walk(p, d, params, rng);
}

void step_walk(WalkState& s, const WalkParams& params, Rng& rng) {
  if (s.status != WalkStatus::alive) return;
  const Vec2 p = s.position, d = s.direction;

  enum class Ev { update, kill, cap, boundary, self, obstacle, entry, exit };
  double t = s.to_update;
  Ev ev = Ev::update;
  if (s.to_kill < t) { t = s.to_kill; ev = Ev::kill; }
  if (params.max_length - s.length < t) { t = std::max(params.max_length - s.length, 0.0); ev = Ev::cap; }
  if (params.domain) {
    const double b = params.domain->exit_distance(p, d);
    if (b < t) { t = b; ev = Ev::boundary; }
  }
  if (params.self_avoiding && s.trace.size() >= 3) {
    for (std::size_t i = 0; i + 2 < s.trace.size(); ++i) {
      const Segment seg{s.trace[i], s.trace[i + 1]};
      if (auto h = ray_segment_hit(p, d, seg, t); h && *h < t) { t = *h; ev = Ev::self; }
    }
  }
  if (params.obstacles && params.obstacles->size() > 0) {
    thread_local std::vector<std::uint32_t> cand;
    params.obstacles->query(Segment{p, p + d * t}.bbox().inflated(kGeomEps), cand);
    for (auto id : cand) {
      if (auto h = ray_segment_hit(p, d, params.obstacles->segment(id), t); h && *h < t) {
        t = *h;
        ev = Ev::obstacle;
      }
    }
  }
  if (params.target) {
    if (auto h = circle_crossing(p, d, *params.target, s.inside_target); h && *h < t) {
      t = *h;
      ev = s.inside_target ? Ev::exit : Ev::entry;
    }
  }

  s.position = p + d * t;
  s.length += t;
  s.to_update -= t;
  s.to_kill -= t;
  s.log_weight += (s.segment_rate - 4.0 - folded_kill(params)) * t;

  auto terminate = [&](WalkStatus st) {
    s.status = st;
    s.last_event = WalkEvent::terminal;
    s.trace.push_back(s.position);
  };

  switch (ev) {
    case Ev::update:
      s.trace.push_back(s.position);
      if (params.homing > 0.0 && params.target) {
        const double heading = std::atan2(d.y, d.x);
        const Vec2 to = params.target->center - s.position;
        const double aim = std::atan2(to.y, to.x);
        const double next = rng.bernoulli(params.homing_mix) ? heading + sample_turn_angle(rng)
                                                             : sample_von_mises(aim, params.homing, rng);
        const double turn = std::abs(std::sin(next - heading));
        const double q = (1.0 - params.homing_mix) * von_mises_density(next, aim, params.homing) +
                         params.homing_mix * turn / 4.0;
        s.log_weight += std::log(turn / (s.segment_rate * q));
        s.direction = unit_at(next);
      } else {
        s.log_weight += std::log(4.0 / s.segment_rate);
        s.direction = rotate(d, sample_turn_angle(rng));
      }
      draw_segment(s, params, rng);
      s.last_event = WalkEvent::update;
      break;
    case Ev::kill: terminate(WalkStatus::killed_rate); break;
    case Ev::cap: terminate(WalkStatus::killed_length); break;
    case Ev::boundary: terminate(WalkStatus::killed_boundary); break;
    case Ev::self: terminate(WalkStatus::killed_self); break;
    case Ev::obstacle: terminate(WalkStatus::killed_obstacle); break;
    case Ev::entry:
      s.inside_target = true;
      ++s.entries;
      s.weighted_entries += std::exp(s.log_weight);
      s.last_event = WalkEvent::entry;
      if (params.stop_on_entry) {
        terminate(WalkStatus::succeeded);
      } else if (s.entries >= params.max_entries) {
        s.entry_cap_hit = true;
        terminate(WalkStatus::succeeded);
      }
      break;
    case Ev::exit:
      s.inside_target = false;
      s.last_event = WalkEvent::exit;
      break;
  }
}

void run_walk(WalkState& s, const WalkParams& params, Rng& rng) {
  while (s.status == WalkStatus::alive) step_walk(s, params, rng);
}

}  // namespace polyfield
