#include "polyfield/arak.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <queue>
#include <stdexcept>
#include <vector>

namespace polyfield {

double sample_typical_angle(Rng& rng) { return std::acos(1.0 - 2.0 * rng.uniform()); }

namespace {

// Direction angle of a trajectory in (-pi/2, pi/2) relative to the time axis.
double wrap_direction(double psi) {
  psi = std::fmod(psi + kPi / 2.0, kPi);
  if (psi < 0.0) psi += kPi;
  return psi - kPi / 2.0;
}

}  // namespace

std::pair<double, double> sample_velocity_pair(Rng& rng) {
  // In direction angles the pair density is |sin(psi' - psi'')| / (2 pi):
  // psi' uniform, psi'' - psi' a typical angle.
  const double psi1 = rng.uniform(-kPi / 2.0, kPi / 2.0);
  const double psi2 = wrap_direction(psi1 + sample_typical_angle(rng));
  if (rng.bernoulli(0.5)) return {std::tan(psi2), std::tan(psi1)};
  return {std::tan(psi1), std::tan(psi2)};
}

VelocityJump velocity_jump_kernel(double v, Rng& rng) {
  VelocityJump j;
  j.waiting_time = rng.exponential(velocity_jump_rate(v));
  j.new_velocity = std::tan(wrap_direction(std::atan(v) + sample_typical_angle(rng)));
  return j;
}

namespace {

constexpr int kBoundary = -1;
constexpr double kTimeEps = 1e-12;

struct Particle {
  double t0 = 0.0;
  double y0 = 0.0;
  double v = 0.0;
  double jump_at = 0.0;
  double exit_at = 0.0;
  double next_v = 0.0;
  unsigned version = 0;
  bool alive = true;
  int start_node = kBoundary;
  int end_node = kBoundary;
  std::vector<Vec2> path;

  double y(double t) const { return y0 + v * (t - t0); }
  double next_own() const { return std::min(jump_at, exit_at); }
};

enum class Kind { jump, exit, collision };

struct Event {
  double t;
  Kind kind;
  int a;
  int b;
  unsigned va;
  unsigned vb;
  bool operator>(const Event& o) const { return t > o.t; }
};

struct Birth {
  double t;
  double y;
  bool interior;
  double v = 0.0;       // boundary births
  double exit_t = 0.0;  // boundary births: chord exit time
};

class Simulator {
 public:
  Simulator(const Window& w, Rng& rng, const ArakOptions& opts) : window_(w), rng_(rng), opts_(opts) {}

  ArakResult run() {
    draw_births();
    std::size_t next_birth = 0;
    while (next_birth < births_.size() || !queue_.empty()) {
      const double tb = next_birth < births_.size() ? births_[next_birth].t : kInf;
      const double te = queue_.empty() ? kInf : queue_.top().t;
      if (++result_.stats.events > opts_.max_events) throw std::runtime_error("run_arak: event limit exceeded");
      if (tb <= te) {
        birth(births_[next_birth++]);
        continue;
      }
      const Event e = queue_.top();
      queue_.pop();
      if (!current(e)) {
        --result_.stats.events;
        continue;
      }
      switch (e.kind) {
        case Kind::jump: jump(e.a, e.t); break;
        case Kind::exit: exit(e.a, e.t); break;
        case Kind::collision: collide(e.a, e.b, e.t); break;
      }
    }
    assemble();
    return std::move(result_);
  }

 private:
  static constexpr double kInf = std::numeric_limits<double>::infinity();

  void draw_births() {
    const BBox box = window_.bbox();
    const auto n = rng_.poisson(kPi * window_.area());
    for (std::uint64_t i = 0; i < n; ++i) {
      Vec2 p;
      do {
        p = {rng_.uniform(box.lo.x, box.hi.x), rng_.uniform(box.lo.y, box.hi.y)};
      } while (!window_.contains(p));
      births_.push_back({p.x, p.y, true});
    }
    for (const Line& l : sample_poisson_lines(window_, rng_)) {
      auto ch = window_.chord(l);
      if (!ch) continue;
      Vec2 a = ch->first, b = ch->second;
      if (a.x > b.x) std::swap(a, b);
      if (b.x - a.x < kTimeEps) continue;  // parallel to the space axis: mu-null
      births_.push_back({a.x, a.y, false, (b.y - a.y) / (b.x - a.x), b.x});
    }
    std::sort(births_.begin(), births_.end(), [](const Birth& x, const Birth& y) { return x.t < y.t; });
  }

  bool current(const Event& e) const {
    const Particle& a = parts_[e.a];
    if (!a.alive || a.version != e.va) return false;
    if (e.kind != Kind::collision) return true;
    const Particle& b = parts_[e.b];
    return b.alive && b.version == e.vb;
  }

  double exit_time(const Particle& p, double t) const {
    const Vec2 pos{t, p.y(t)};
    const Vec2 d = normalized(Vec2{1.0, p.v});
    return t + window_.exit_distance(pos, d) * d.x;
  }

  int spawn(double t, double y, double v, int start_node, double exit_at) {
    Particle p;
    p.t0 = t;
    p.y0 = y;
    p.v = v;
    p.start_node = start_node;
    p.path.push_back({t, y});
    const VelocityJump j = velocity_jump_kernel(v, rng_);
    p.jump_at = t + j.waiting_time;
    p.next_v = j.new_velocity;
    p.exit_at = exit_at;
    parts_.push_back(std::move(p));
    const int id = static_cast<int>(parts_.size()) - 1;
    alive_.push_back(id);
    return id;
  }

  void schedule(int id, double now) {
    const Particle& p = parts_[id];
    if (p.jump_at < p.exit_at) {
      queue_.push({p.jump_at, Kind::jump, id, -1, p.version, 0});
    } else {
      queue_.push({p.exit_at, Kind::exit, id, -1, p.version, 0});
    }
    for (int other : alive_) {
      if (other == id) continue;
      const Particle& q = parts_[other];
      const double dv = p.v - q.v;
      if (std::abs(dv) < 1e-15) continue;
      const double t = (q.y0 - q.v * q.t0 - p.y0 + p.v * p.t0) / dv;
      if (!(t > now + kTimeEps)) continue;
      if (t >= p.next_own() || t >= q.next_own()) continue;
      queue_.push({t, Kind::collision, id, other, p.version, q.version});
    }
  }

  void birth(const Birth& b) {
    if (b.interior) {
      ++result_.stats.interior_births;
      const int node = new_node({b.t, b.y});
      const auto [v1, v2] = sample_velocity_pair(rng_);
      const int p = spawn(b.t, b.y, v1, node, 0.0);
      parts_[p].exit_at = exit_time(parts_[p], b.t);
      const int q = spawn(b.t, b.y, v2, node, 0.0);
      parts_[q].exit_at = exit_time(parts_[q], b.t);
      schedule(p, b.t);
      schedule(q, b.t);
    } else {
      ++result_.stats.boundary_births;
      const int p = spawn(b.t, b.y, b.v, kBoundary, b.exit_t);
      schedule(p, b.t);
    }
  }

  void jump(int id, double t) {
    ++result_.stats.velocity_jumps;
    Particle& p = parts_[id];
    const double y = p.y(t);
    p.path.push_back({t, y});
    p.t0 = t;
    p.y0 = y;
    p.v = p.next_v;
    const VelocityJump j = velocity_jump_kernel(p.v, rng_);
    p.jump_at = t + j.waiting_time;
    p.next_v = j.new_velocity;
    p.exit_at = exit_time(p, t);
    ++p.version;
    schedule(id, t);
  }

  void kill(int id, double t, int node) {
    Particle& p = parts_[id];
    p.path.push_back({t, p.y(t)});
    p.alive = false;
    p.end_node = node;
    ++p.version;
    alive_.erase(std::find(alive_.begin(), alive_.end(), id));
  }

  void exit(int id, double t) {
    ++result_.stats.boundary_deaths;
    kill(id, t, kBoundary);
  }

  void collide(int a, int b, double t) {
    ++result_.stats.collisions;
    const double y = parts_[a].y(t);
    const int node = new_node({t, y});
    kill(a, t, node);
    parts_[b].path.push_back(parts_[a].path.back());
    parts_[b].alive = false;
    parts_[b].end_node = node;
    ++parts_[b].version;
    alive_.erase(std::find(alive_.begin(), alive_.end(), b));
    for (int c : alive_) {
      if (std::abs(parts_[c].y(t) - y) < kGeomEps) result_.stats.triple_collision = true;
    }
  }

  int new_node(Vec2 p) {
    nodes_.push_back(p);
    return static_cast<int>(nodes_.size()) - 1;
  }

  // Glue particle paths at shared nodes into chains and closed contours.
  void assemble() {
    std::vector<std::array<int, 2>> members(nodes_.size(), {-1, -1});
    auto attach = [&](int node, int end) {
      auto& m = members[node];
      (m[0] < 0 ? m[0] : m[1]) = end;
    };
    for (int i = 0; i < static_cast<int>(parts_.size()); ++i) {
      if (parts_[i].start_node != kBoundary) attach(parts_[i].start_node, 2 * i);
      if (parts_[i].end_node != kBoundary) attach(parts_[i].end_node, 2 * i + 1);
    }
    std::vector<char> used(parts_.size(), 0);

    // Traverses from particle end `end` (2i start, 2i+1 finish); returns the
    // node reached at the far side.
    auto traverse = [&](int end, std::vector<Vec2>& out) {
      const int i = end / 2;
      used[i] = 1;
      const auto& path = parts_[i].path;
      const bool forward = end % 2 == 0;
      for (std::size_t k = 0; k < path.size(); ++k) {
        const Vec2 v = forward ? path[k] : path[path.size() - 1 - k];
        if (!out.empty() && dist(out.back(), v) < kGeomEps) continue;
        out.push_back(v);
      }
      return forward ? parts_[i].end_node : parts_[i].start_node;
    };
    auto far_end = [](int end) { return end ^ 1; };
    auto partner = [&](int node, int end) {
      const auto& m = members[node];
      return m[0] == end ? m[1] : m[0];
    };

    for (int i = 0; i < static_cast<int>(parts_.size()); ++i) {
      if (used[i]) continue;
      int end = -1;
      if (parts_[i].start_node == kBoundary) end = 2 * i;
      else if (parts_[i].end_node == kBoundary) end = 2 * i + 1;
      if (end < 0) continue;
      Chain chain;
      for (;;) {
        const int node = traverse(end, chain.vertices);
        if (node == kBoundary) break;
        end = partner(node, far_end(end));
      }
      result_.configuration.chains.push_back(std::move(chain));
    }
    for (int i = 0; i < static_cast<int>(parts_.size()); ++i) {
      if (used[i]) continue;
      std::vector<Vec2> loop;
      int end = 2 * i;
      for (;;) {
        const int node = traverse(end, loop);
        end = partner(node, far_end(end));
        if (end / 2 == i) break;
      }
      if (loop.size() > 1 && dist(loop.front(), loop.back()) < kGeomEps) loop.pop_back();
      result_.configuration.contours.emplace_back(std::move(loop));
    }
  }

  const Window& window_;
  Rng& rng_;
  ArakOptions opts_;
  std::vector<Birth> births_;
  std::vector<Particle> parts_;
  std::vector<int> alive_;
  std::vector<Vec2> nodes_;
  std::priority_queue<Event, std::vector<Event>, std::greater<>> queue_;
  ArakResult result_;
};

}  // namespace

ArakResult run_arak(const Window& window, Rng& rng, const ArakOptions& opts) {
  return Simulator(window, rng, opts).run();
}

}  // namespace polyfield
