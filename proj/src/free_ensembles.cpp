#include "polyfield/free_ensembles.hpp"

#include <algorithm>
#include <cmath>
#include <array>
#include <limits>
#include <stdexcept>

namespace polyfield {

const char* to_string(BoundaryMode m) { return m == BoundaryMode::empty ? "empty" : "free"; }

double WeightedContourProposal::weight() const { return std::exp(log_weight()); }
double WeightedPath::weight() const { return std::exp(log_target_density - log_proposal_density); }

// ---------------------------------------------------------------------------
// Enumeration on a fixed line set

namespace {

struct LineSetup {
  std::size_t n = 0;
  std::vector<std::pair<Vec2, Vec2>> chords;
  std::vector<std::vector<std::optional<Vec2>>> corner;
  bool near_parallel = false;
};

// Each line carries one interval: a full chord (no partners), a corner-to-
// boundary piece (one partner) or a corner-to-corner piece (two partners).
// Lines are assigned in order; partner relations must be symmetric and
// unrelated intervals must stay apart.
class Enumerator {
 public:
  struct Option {
    Segment seg;  // for one partner: seg.a is the corner, seg.b the boundary end
    std::uint32_t partners = 0;
    std::array<std::size_t, 2> partner{};
    int degree = 0;
  };

  Enumerator(const LineSetup& s, BoundaryMode mode) : s_(s), options_(s.n), chosen_(s.n), index_(s.n) {
    for (std::size_t i = 0; i < s.n; ++i) {
      const auto [A, B] = s.chords[i];
      if (mode == BoundaryMode::free) {
        options_[i].push_back({{A, B}, 0, {}, 0});
        for (std::size_t j = 0; j < s.n; ++j) {
          if (!s.corner[i][j]) continue;
          const Vec2 c = *s.corner[i][j];
          for (Vec2 end : {A, B}) {
            if (dist(c, end) > kGeomEps) options_[i].push_back({{c, end}, 1u << j, {j, j}, 1});
          }
        }
      }
      for (std::size_t j = 0; j < s.n; ++j) {
        for (std::size_t k = j + 1; k < s.n; ++k) {
          if (!s.corner[i][j] || !s.corner[i][k]) continue;
          const Segment seg{*s.corner[i][j], *s.corner[i][k]};
          if (seg.length() > kGeomEps) options_[i].push_back({seg, (1u << j) | (1u << k), {j, k}, 2});
        }
      }
    }
    // compatible_[i * n + j][a * size_j + b]: option a of line i with option b of line j (j < i).
    compatible_.resize(s.n * s.n);
    for (std::size_t i = 0; i < s.n; ++i) {
      for (std::size_t j = 0; j < i; ++j) {
        auto& table = compatible_[i * s.n + j];
        table.assign(options_[i].size() * options_[j].size(), 0);
        for (std::size_t a = 0; a < options_[i].size(); ++a) {
          for (std::size_t b = 0; b < options_[j].size(); ++b) {
            const Option& o = options_[i][a];
            const Option& p = options_[j][b];
            const bool ij = (o.partners >> j) & 1u, ji = (p.partners >> i) & 1u;
            table[a * options_[j].size() + b] = ij == ji && (ij || !segments_touch(o.seg, p.seg));
          }
        }
      }
    }
  }

  template <class F>
  void run(F&& emit) { assign(0, emit); }

 private:
  template <class F>
  void assign(std::size_t i, F& emit) {
    if (i == s_.n) {
      emit(chosen_);
      return;
    }
    for (std::size_t a = 0; a < options_[i].size(); ++a) {
      bool ok = true;
      for (std::size_t j = 0; j < i && ok; ++j) {
        ok = compatible_[i * s_.n + j][a * options_[j].size() + index_[j]];
      }
      if (!ok) continue;
      chosen_[i] = &options_[i][a];
      index_[i] = a;
      assign(i + 1, emit);
    }
  }

  const LineSetup& s_;
  std::vector<std::vector<Option>> options_;
  std::vector<std::vector<std::uint8_t>> compatible_;
  std::vector<const Option*> chosen_;
  std::vector<std::size_t> index_;
};

// Trace the partner graph into contours (cycles) and chains (paths).
FreeConfiguration assemble(const LineSetup& s, const std::vector<const Enumerator::Option*>& opt) {
  FreeConfiguration cfg;
  const std::size_t n = s.n;
  std::vector<bool> seen(n, false);
  auto other = [&](std::size_t cur, std::size_t from) -> std::size_t {
    const auto* o = opt[cur];
    for (int k = 0; k < o->degree; ++k) {
      if (o->partner[k] != from) return o->partner[k];
    }
    return n;
  };
  for (std::size_t i = 0; i < n; ++i) {
    if (seen[i] || opt[i]->degree == 2) continue;
    seen[i] = true;
    if (opt[i]->degree == 0) {
      cfg.chains.push_back({{opt[i]->seg.a, opt[i]->seg.b}});
      continue;
    }
    std::vector<Vec2> pts{opt[i]->seg.b};
    std::size_t from = i, cur = opt[i]->partner[0];
    pts.push_back(*s.corner[i][cur]);
    while (opt[cur]->degree == 2) {
      seen[cur] = true;
      const std::size_t next = other(cur, from);
      pts.push_back(*s.corner[cur][next]);
      from = cur;
      cur = next;
    }
    seen[cur] = true;
    pts.push_back(opt[cur]->seg.b);
    cfg.chains.push_back({std::move(pts)});
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (seen[i]) continue;
    std::vector<Vec2> pts;
    std::size_t from = opt[i]->partner[0], cur = i;
    do {
      seen[cur] = true;
      const std::size_t next = other(cur, from);
      pts.push_back(*s.corner[cur][next]);
      from = cur;
      cur = next;
    } while (cur != i);
    cfg.contours.emplace_back(std::move(pts));
  }
  return cfg;
}

std::optional<LineSetup> setup_lines(std::span<const Line> lines, const Window& window, std::size_t cap) {
  if (lines.size() > cap) throw std::length_error("enumeration cap exceeded");
  LineSetup s;
  s.n = lines.size();
  for (const auto& l : lines) {
    auto c = window.chord(l);
    if (!c) return std::nullopt;  // a line missing the window carries no interval
    s.chords.push_back(*c);
  }
  s.corner.assign(s.n, std::vector<std::optional<Vec2>>(s.n));
  for (std::size_t i = 0; i < s.n; ++i) {
    for (std::size_t j = i + 1; j < s.n; ++j) {
      const auto x = intersect(lines[i], lines[j]);
      if (x.near_parallel) {
        s.near_parallel = true;
        continue;
      }
      if (!window.contains(x.point, kGeomEps)) continue;
      s.corner[i][j] = s.corner[j][i] = x.point;
    }
  }
  return s;
}

}  // namespace

EnumerationResult enumerate_admissible_on_lines(std::span<const Line> lines, const Window& window,
                                                BoundaryMode mode, std::size_t cap) {
  EnumerationResult out;
  auto setup = setup_lines(lines, window, cap);
  if (!setup) return out;
  out.near_parallel = setup->near_parallel;
  const LineSetup& ls = *setup;
  Enumerator(ls, mode).run([&](const auto& chosen) { out.configurations.push_back(assemble(ls, chosen)); });
  return out;
}

double configuration_weight_sum(std::span<const Line> lines, const Window& window, BoundaryMode mode,
                                std::size_t cap) {
  auto setup = setup_lines(lines, window, cap);
  if (!setup) return 0.0;
  double sum = 0.0;
  Enumerator(*setup, mode).run([&](const auto& chosen) {
    double len = 0.0;
    for (const auto* o : chosen) len += o->seg.length();
    sum += std::exp(-2.0 * len);
  });
  return sum;
}

namespace {

struct StratumStats {
  double sum = 0.0, sum2 = 0.0, work = 0.0;
  std::size_t count = 0;
  void add(double v, double w) {
    sum += v;
    sum2 += v * v;
    work += w;
    ++count;
  }
  double mean() const { return count ? sum / static_cast<double>(count) : 0.0; }
  double variance() const {
    if (count < 2) return 0.0;
    const double m = mean();
    return std::max(sum2 / static_cast<double>(count) - m * m, 0.0) * count / (count - 1.0);
  }
};

}  // namespace

PartitionEstimate estimate_partition_function(const Window& window, BoundaryMode mode, std::size_t replicas,
                                              Rng& rng, std::size_t cap) {
  if (replicas == 0) throw std::invalid_argument("estimate_partition_function: replicas must be positive");
  const double mean_lines = measure_lines_hitting(window);
  std::vector<double> pmf(cap + 1);
  for (std::size_t n = 0; n <= cap; ++n) {
    pmf[n] = std::exp(-mean_lines + n * std::log(mean_lines) - std::lgamma(n + 1.0));
  }
  PartitionEstimate est;
  std::vector<StratumStats> stats(cap + 1);
  auto draw = [&](std::size_t n) {
    std::vector<Line> lines(n);
    for (auto& l : lines) l = sample_hitting_line(window, rng);
    auto setup = setup_lines(lines, window, cap);
    if (setup && setup->near_parallel) ++est.near_parallel;
    std::size_t emitted = 0;
    double v = 0.0;
    if (setup) {
      Enumerator(*setup, mode).run([&](const auto& chosen) {
        double len = 0.0;
        for (const auto* o : chosen) len += o->seg.length();
        v += std::exp(-2.0 * len);
        ++emitted;
      });
    }
    stats[n].add(v, 1.0 + static_cast<double>(emitted));
    ++est.replicas;
  };
  // Pilot draws in every stratum, then Neyman allocation weighted by work.
  const std::size_t pilot = std::clamp<std::size_t>(replicas / (20 * std::max<std::size_t>(cap, 1)), 4, 32);
  for (std::size_t n = 1; n <= cap; ++n) {
    for (std::size_t k = 0; k < pilot; ++k) draw(n);
  }
  const std::size_t used = est.replicas;
  if (replicas > used) {
    std::vector<double> score(cap + 1, 0.0);
    double total = 0.0;
    for (std::size_t n = 1; n <= cap; ++n) {
      const double work = stats[n].work / static_cast<double>(stats[n].count);
      score[n] = pmf[n] * std::sqrt(stats[n].variance()) / std::sqrt(work);
      total += score[n];
    }
    if (total > 0.0) {
      for (std::size_t n = 1; n <= cap; ++n) {
        const auto extra = static_cast<std::size_t>(std::floor((replicas - used) * score[n] / total));
        for (std::size_t k = 0; k < extra; ++k) draw(n);
      }
    }
  }
  est.estimate = pmf[0];
  double var = 0.0;
  for (std::size_t n = 1; n <= cap; ++n) {
    est.estimate += pmf[n] * stats[n].mean();
    var += pmf[n] * pmf[n] * stats[n].variance() / static_cast<double>(stats[n].count);
  }
  est.std_error = std::sqrt(var);
  double covered = 0.0;
  for (double p : pmf) covered += p;
  est.truncated_mass = std::max(0.0, 1.0 - covered);
  return est;
}

// ---------------------------------------------------------------------------
// Walk-closure contour proposal

namespace {

struct Closure {
  bool feasible = false;
  Vec2 r;
  double distance = 0.0;
};

// Closing the walked chain v1..q (chain.front() = v1, chain.back() = q) by a
// ray from q along `dn` onto the first line (through v1, direction d1). The
// closing point must lie behind v1 and the resulting polygon must be simple
// and strictly inside the window.
Closure closure_at(std::span<const Vec2> chain, Vec2 d1, Vec2 dn, const Window& window) {
  Closure out;
  const std::size_t j = chain.size();
  if (j < 2) return out;
  const Vec2 v1 = chain.front(), q = chain.back();
  const double denom = cross(dn, d1);
  if (std::abs(denom) < 1e-12) return out;
  const Vec2 w = v1 - q;
  const double t = cross(w, d1) / denom;
  const double a = cross(w, dn) / denom;
  if (!(t > kGeomEps) || !(a < -kGeomEps)) return out;
  const Vec2 r = v1 + d1 * a;
  if (!window.contains(r, kGeomEps)) return out;
  const Segment closing{q, r}, first{r, v1};
  for (std::size_t m = 0; m + 1 < j; ++m) {
    const Segment e{chain[m], chain[m + 1]};
    if (m + 2 != j && segments_touch(closing, e)) return out;
    if (m != 0 && segments_touch(first, e)) return out;
  }
  out.feasible = true;
  out.r = r;
  out.distance = dist(q, r);
  return out;
}

double close_probability(double d, double beta, const ContourProposalOptions& o) {
  if (d <= o.closure_radius) return o.close_probability;
  return o.close_probability * std::exp(-(beta + 2.0) * (d - o.closure_radius));
}

double proposal_kill_rate(double beta, const ContourProposalOptions& o) {
  const double k = o.kill_rate < 0.0 ? beta - 2.0 : o.kill_rate;
  if (k < 0.0) throw std::invalid_argument("contour proposal needs beta >= 2 or an explicit kill rate");
  return k;
}

double log_add(double a, double b) {
  if (a == -std::numeric_limits<double>::infinity()) return b;
  if (b == -std::numeric_limits<double>::infinity()) return a;
  const double m = std::max(a, b);
  return m + std::log(std::exp(a - m) + std::exp(b - m));
}

}  // namespace

std::optional<WeightedContourProposal> propose_free_contour(double beta, const Window& anchor, const Window& window,
                                                            Rng& rng, const ContourProposalOptions& opts) {
  const double kappa = proposal_kill_rate(beta, opts);
  const Line l1 = sample_hitting_line(anchor, rng);
  const auto chord = anchor.chord(l1);
  if (!chord) return std::nullopt;
  const Vec2 p0 = chord->first + (chord->second - chord->first) * rng.uniform();
  const Vec2 d1 = rng.bernoulli(0.5) ? l1.direction() : -l1.direction();
  if (!window.contains(p0, kGeomEps)) return std::nullopt;

  WalkParams wp;
  wp.kill_rate = kappa;
  wp.domain = &window;
  WalkState st = make_walk(p0, d1, wp, rng);
  for (;;) {
    step_walk(st, wp, rng);
    if (st.status != WalkStatus::alive) return std::nullopt;
    if (st.last_event != WalkEvent::update || st.trace.size() < 3) continue;
    const double walked = st.length - dist(st.trace[0], st.trace[1]);
    if (walked > opts.max_walk_length) return std::nullopt;
    const std::span<const Vec2> chain(st.trace.data() + 1, st.trace.size() - 1);
    const Closure c = closure_at(chain, d1, st.direction, window);
    if (!c.feasible) continue;
    if (!rng.bernoulli(close_probability(c.distance, beta, opts))) continue;
    std::vector<Vec2> verts(chain.begin(), chain.end());
    verts.push_back(c.r);
    Contour contour(std::move(verts));
    WeightedContourProposal out{contour, contour_log_target(contour, beta),
                                contour_proposal_log_density(contour, beta, anchor, window, opts)};
    if (!std::isfinite(out.log_proposal_density)) return std::nullopt;
    return out;
  }
}

double contour_proposal_log_density(const Contour& contour, double beta, const Window& anchor, const Window& window,
                                    const ContourProposalOptions& opts) {
  const double kappa = proposal_kill_rate(beta, opts);
  const double c = kappa + 4.0;
  const double mu_anchor = measure_lines_hitting(anchor);
  const std::size_t n = contour.size();
  double total = -std::numeric_limits<double>::infinity();
  for (const auto& v : contour.vertices()) {
    if (!window.contains(v, kGeomEps)) return total;
  }
  std::vector<Vec2> s(contour.vertices());
  std::vector<Vec2> chain(n - 1);
  for (int orient = 0; orient < 2; ++orient) {
    if (orient == 1) std::reverse(s.begin(), s.end());
    for (std::size_t i = 0; i < n; ++i) {
      const Vec2 r = s[i];
      for (std::size_t k = 0; k + 1 < n; ++k) chain[k] = s[(i + 1 + k) % n];
      const Vec2 v1 = chain.front(), q = chain.back();
      const Vec2 d1 = normalized(v1 - r);
      const auto ac = anchor.chord(Line::through(r, v1));
      if (!ac) continue;
      const double ta = dot(ac->first - v1, d1), tb = dot(ac->second - v1, d1);
      const double lo = std::min(ta, tb), hi = std::max(ta, tb);
      // How far behind v1 the start may lie without the walk crossing itself.
      double u_max = window.exit_distance(v1, -d1);
      for (std::size_t m = 1; m + 1 < chain.size(); ++m) {
        if (auto h = ray_segment_hit(v1, -d1, Segment{chain[m], chain[m + 1]}, u_max)) u_max = std::min(u_max, *h);
      }
      const double u_lo = std::max(0.0, -hi), u_hi = std::min(u_max, -lo);
      if (!(u_hi > u_lo)) continue;
      double walked = 0.0;
      for (std::size_t k = 0; k + 1 < chain.size(); ++k) walked += dist(chain[k], chain[k + 1]);
      if (walked > opts.max_walk_length) continue;

      double log_closure = 0.0;
      bool ok = true;
      for (std::size_t j = 2; j < chain.size(); ++j) {
        const Closure cl = closure_at(std::span<const Vec2>(chain.data(), j), d1,
                                      normalized(chain[j] - chain[j - 1]), window);
        if (cl.feasible) log_closure += std::log1p(-close_probability(cl.distance, beta, opts));
      }
      const Closure fin = closure_at(chain, d1, normalized(r - q), window);
      if (!fin.feasible) ok = false;
      if (!ok) continue;
      log_closure += std::log(close_probability(dist(q, r), beta, opts));
      const double log_integral = -c * u_lo + std::log(-std::expm1(-c * (u_hi - u_lo))) - std::log(c);
      const double route = -std::log(2.0 * mu_anchor * (hi - lo)) + log_integral - c * walked + log_closure;
      total = log_add(total, route);
    }
  }
  return total;
}

// ---------------------------------------------------------------------------
// Free paths between two balls

std::optional<WeightedPath> propose_free_path(const PathFamilySpec& spec, double beta, const Window* window, Rng& rng) {
  if (!(spec.delta > 0.0)) throw std::invalid_argument("propose_free_path: delta must be positive");
  if (!(dist(spec.x, spec.y) > 2.0 * spec.delta)) {
    throw std::invalid_argument("propose_free_path: balls around x and y must be disjoint");
  }
  if (beta < 2.0) throw std::invalid_argument("propose_free_path: beta must be at least 2");
  if (window && (!window->contains(spec.x, spec.delta) || !window->contains(spec.y, spec.delta))) {
    throw std::invalid_argument("propose_free_path: balls must lie inside the window");
  }
  WalkParams wp;
  wp.kill_rate = beta - 2.0;
  wp.domain = window;
  wp.target = Ball{spec.y, spec.delta};
  wp.stop_on_entry = true;
  WalkState st = start_walk(spec.x, spec.delta, wp, rng);
  run_walk(st, wp, rng);
  if (st.status != WalkStatus::succeeded) return std::nullopt;
  WeightedPath out;
  out.vertices = std::move(st.trace);
  out.log_target_density = -(2.0 + beta) * st.length;
  out.log_proposal_density = -std::log(4.0 * kPi * spec.delta) - (beta + 2.0) * st.length;
  return out;
}

}  // namespace polyfield
