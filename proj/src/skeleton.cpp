#include "polyfield/skeleton.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <set>
#include <stdexcept>
#include <utility>

#include "polyfield/observables.hpp"

namespace polyfield {

double Skeleton::length() const {
  double s = 0.0;
  for (const auto& seg : segments) s += dist(seg.I, seg.E);
  return s;
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
using LatticeKey = std::pair<long long, long long>;

LatticeKey key_of(Vec2 p) { return {std::llround(p.x), std::llround(p.y)}; }

// Nearest point of Z^2 inside the closed disk B(L).
Vec2 snap(Vec2 x, double L) {
  const Vec2 r{std::round(x.x), std::round(x.y)};
  if (norm(r) <= L) return r;
  Vec2 best = r;
  double best_d = kInf;
  for (double i = std::floor(x.x) - 2.0; i <= std::ceil(x.x) + 2.0; i += 1.0) {
    for (double j = std::floor(x.y) - 2.0; j <= std::ceil(x.y) + 2.0; j += 1.0) {
      const Vec2 q{i, j};
      if (norm(q) <= L && dist(q, x) < best_d) {
        best_d = dist(q, x);
        best = q;
      }
    }
  }
  return best;
}

// Clockwise traversal of a contour with cumulative arc length.
struct Track {
  std::vector<Vec2> v;
  std::vector<double> s;  // s[i] = arc position of v[i]; s[n] = perimeter
  double perimeter = 0.0;

  explicit Track(const Contour& c) : v(c.clockwise().vertices()) {
    s.assign(v.size() + 1, 0.0);
    for (std::size_t i = 0; i < v.size(); ++i) s[i + 1] = s[i] + dist(v[i], v[(i + 1) % v.size()]);
    perimeter = s.back();
  }

  double wrap(double t) const {
    t = std::fmod(t, perimeter);
    return t < 0.0 ? t + perimeter : t;
  }
  std::size_t edge_of(double t) const {
    const auto it = std::upper_bound(s.begin(), s.end(), t);
    return std::min<std::size_t>(static_cast<std::size_t>(it - s.begin()) - 1, v.size() - 1);
  }
  Vec2 at(double t) const {
    const std::size_t e = edge_of(t);
    const Vec2 a = v[e], b = v[(e + 1) % v.size()];
    const double len = s[e + 1] - s[e];
    return len > 0.0 ? a + (b - a) * ((t - s[e]) / len) : a;
  }
};

struct Path {
  std::vector<Vec2> pts;
  BBox box;
};

// From arc position t0, the polyline up to the first point at Euclidean
// distance alpha; nullopt when the whole contour stays within alpha.
std::optional<Path> subpath_from(const Track& tr, double t0, double alpha) {
  const std::size_t n = tr.v.size();
  const Vec2 p = tr.at(t0);
  Path path;
  path.pts.push_back(p);
  Vec2 a = p;
  std::size_t e = tr.edge_of(t0);
  for (std::size_t step = 0; step <= n; ++step, e = (e + 1) % n) {
    const Vec2 b = tr.v[(e + 1) % n];
    if (dist(b, p) >= alpha) {
      const Vec2 d = b - a, f = a - p;
      const double dd = dot(d, d), fd = dot(f, d), c = dot(f, f) - alpha * alpha;
      const double t = std::clamp((-fd + std::sqrt(std::max(0.0, fd * fd - dd * c))) / dd, 0.0, 1.0);
      path.pts.push_back(a + d * t);
      for (Vec2 q : path.pts) path.box.add(q);
      return path;
    }
    if (!(b == path.pts.back())) path.pts.push_back(b);
    a = b;
  }
  return std::nullopt;
}

double point_polyline_distance(Vec2 p, const Path& path) {
  if (path.pts.size() == 1) return dist(p, path.pts[0]);
  double d = kInf;
  for (std::size_t i = 0; i + 1 < path.pts.size(); ++i) {
    d = std::min(d, point_segment_distance(p, {path.pts[i], path.pts[i + 1]}));
  }
  return d;
}

double polyline_distance(const Path& x, const Path& y) {
  double d = kInf;
  for (std::size_t i = 0; i + 1 < x.pts.size(); ++i) {
    const Segment s{x.pts[i], x.pts[i + 1]};
    for (std::size_t j = 0; j + 1 < y.pts.size(); ++j) {
      d = std::min(d, segment_distance(s, {y.pts[j], y.pts[j + 1]}));
      if (d == 0.0) return 0.0;
    }
  }
  return d;
}

struct Candidate {
  std::size_t contour;
  double t;
  Path path;
  Vec2 I, E;
  double sep = kInf;
  double dp = kInf;
  bool alive = true;
};

class Extractor {
 public:
  Extractor(std::span<const Contour> gamma, double alpha, double delta, double L, const SkeletonOptions& opts)
      : alpha_(alpha), delta_(delta), L_(L), opts_(opts) {
    for (const auto& c : gamma) tracks_.emplace_back(c);
    used_.assign(gamma.size(), 0);
    const double h = opts.candidate_spacing > 0.0 ? opts.candidate_spacing : std::min(delta / 4.0, 0.25);
    for (std::size_t k = 0; k < tracks_.size(); ++k) {
      const auto count = static_cast<std::size_t>(std::ceil(tracks_[k].perimeter / h));
      steps_.push_back(tracks_[k].perimeter / static_cast<double>(count));
      // Grid starts plus the vertices, where the diameter of a polygon is attained.
      std::vector<double> starts(tracks_[k].s.begin(), tracks_[k].s.end() - 1);
      for (std::size_t j = 0; j < count; ++j) starts.push_back(static_cast<double>(j) * steps_[k]);
      std::sort(starts.begin(), starts.end());
      starts.erase(std::unique(starts.begin(), starts.end()), starts.end());
      for (double t : starts) {
        if (auto c = make(k, t)) cands_.push_back(std::move(*c));
      }
    }
    sk_.alpha = alpha;
    sk_.delta = delta;
    sk_.L = L;
  }

  Skeleton run(const Contour& first) {
    if (tracks_.empty()) return sk_;
    // First segment: lattice point nearest to a vertex, then its closest point on the contour.
    const Vec2 I1 = snap(first[0], L_);
    double best_d = kInf, best_t = 0.0;
    const Track& tr = tracks_[0];
    for (std::size_t e = 0; e < tr.v.size(); ++e) {
      const Segment seg{tr.v[e], tr.v[(e + 1) % tr.v.size()]};
      const Vec2 q = closest_point_on_segment(I1, seg);
      if (dist(q, I1) < best_d) {
        best_d = dist(q, I1);
        best_t = tr.s[e] + dist(seg.a, q);
      }
    }
    if (auto path = subpath_from(tr, tr.wrap(best_t), alpha_)) {
      const Vec2 E = snap(path->pts.back(), L_);
      if (!(E == I1)) add(0, std::move(*path), I1, E);
    }
    for (;;) {
      Candidate* best = nullptr;
      for (auto& c : cands_) {
        if (!c.alive) continue;
        if (taken_.count(key_of(c.I)) || taken_.count(key_of(c.E)) || c.I == c.E) {
          c.alive = false;
          continue;
        }
        if (!near_start(c)) continue;
        if (!best || c.dp < best->dp || (c.dp == best->dp && (c.contour < best->contour ||
                                                               (c.contour == best->contour && c.t < best->t)))) {
          best = &c;
        }
      }
      if (!best) break;
      Candidate chosen = refine(*best);
      if (!near_start(chosen)) chosen = *best;
      add(chosen.contour, std::move(chosen.path), chosen.I, chosen.E);
    }
    return std::move(sk_);
  }

 private:
  std::optional<Candidate> make(std::size_t k, double t) const {
    auto path = subpath_from(tracks_[k], t, alpha_);
    if (!path) return std::nullopt;
    Candidate c{k, t, std::move(*path), {}, {}};
    c.I = snap(c.path.pts.front(), L_);
    c.E = snap(c.path.pts.back(), L_);
    return c;
  }

  // A start on an already covered contour must lie within alpha + delta + sqrt 2
  // of an earlier initial point.
  bool near_start(const Candidate& c) const {
    if (!used_[c.contour]) return true;
    const double reach = alpha_ + delta_ + std::sqrt(2.0);
    for (const auto& seg : sk_.segments) {
      if (dist(seg.I, c.I) <= reach) return true;
    }
    return false;
  }

  bool admissible(const Candidate& c) const {
    if (c.I == c.E || taken_.count(key_of(c.I)) || taken_.count(key_of(c.E))) return false;
    const BBox grown = c.path.box.inflated(delta_);
    for (const auto& cov : covered_) {
      if (grown.overlaps(cov.box) && polyline_distance(c.path, cov) < delta_) return false;
    }
    return true;
  }

  double covered_distance(Vec2 p) const {
    double d = kInf;
    for (const auto& cov : covered_) d = std::min(d, point_polyline_distance(p, cov));
    return d;
  }

  // Moves the start along the contour towards a blocked grid neighbour while
  // it stays admissible, so the chosen distance approaches the binding delta.
  Candidate refine(const Candidate& c) const {
    Candidate out = c;
    if (covered_.empty()) return out;
    const Track& tr = tracks_[c.contour];
    const double step = steps_[c.contour];
    for (double dir : {-1.0, 1.0}) {
      const double tn = tr.wrap(c.t + dir * step);
      if (covered_distance(tr.at(tn)) >= out.dp) continue;
      double lo = 0.0, hi = 1.0;  // fractions of the step; lo admissible
      for (int it = 0; it < opts_.refine_steps; ++it) {
        const double mid = 0.5 * (lo + hi);
        auto m = make(c.contour, tr.wrap(c.t + dir * step * mid));
        if (m && admissible(*m)) lo = mid;
        else hi = mid;
      }
      if (lo == 0.0) continue;
      auto m = make(c.contour, tr.wrap(c.t + dir * step * lo));
      if (!m) continue;
      m->dp = covered_distance(m->path.pts.front());
      if (m->dp < out.dp) out = std::move(*m);
    }
    return out;
  }

  void add(std::size_t k, Path path, Vec2 I, Vec2 E) {
    sk_.segments.push_back({I, E, k, path.pts.front(), path.pts.back()});
    used_[k] = 1;
    taken_.insert(key_of(I));
    taken_.insert(key_of(E));
    const BBox grown = path.box.inflated(delta_);
    for (auto& c : cands_) {
      if (!c.alive) continue;
      c.dp = std::min(c.dp, point_polyline_distance(c.path.pts.front(), path));
      if (grown.overlaps(c.path.box)) {
        c.sep = std::min(c.sep, polyline_distance(c.path, path));
        if (c.sep < delta_) c.alive = false;
      }
    }
    covered_.push_back(std::move(path));
  }

  double alpha_, delta_, L_;
  SkeletonOptions opts_;
  std::vector<Track> tracks_;
  std::vector<double> steps_;
  std::vector<Candidate> cands_;
  std::vector<Path> covered_;
  std::set<LatticeKey> taken_;
  std::vector<char> used_;
  Skeleton sk_;
};

}  // namespace

Skeleton extract_skeleton(std::span<const Contour> gamma, double alpha, double delta, double L,
                          const SkeletonOptions& opts) {
  if (!(delta > 0.0) || !(alpha >= 4.0 * delta)) {
    throw std::invalid_argument("extract_skeleton: need delta > 0 and alpha >= 4 delta");
  }
  if (!(L > 0.0)) throw std::invalid_argument("extract_skeleton: L must be positive");
  for (std::size_t k = 0; k < gamma.size(); ++k) {
    if (!(gamma[k].diameter() > alpha)) {
      throw std::invalid_argument("extract_skeleton: contour " + std::to_string(k) + " is not alpha-large");
    }
    for (Vec2 v : gamma[k].vertices()) {
      if (norm(v) > L - std::sqrt(0.5)) {
        throw std::invalid_argument("extract_skeleton: contour " + std::to_string(k) + " leaves B(L - 1/sqrt 2)");
      }
    }
  }
  if (gamma.empty()) {
    Skeleton sk;
    sk.alpha = alpha;
    sk.delta = delta;
    sk.L = L;
    return sk;
  }
  return Extractor(gamma, alpha, delta, L, opts).run(gamma[0]);
}

// Verifier helpers, kept separate from the extractor.
namespace {

constexpr double kTol = 1e-9;
const double kSqrt2 = std::sqrt(2.0);

double seg_point(Vec2 p, Vec2 a, Vec2 b) {
  const Vec2 d = b - a;
  const double dd = d.x * d.x + d.y * d.y;
  double t = dd > 0.0 ? ((p.x - a.x) * d.x + (p.y - a.y) * d.y) / dd : 0.0;
  t = std::max(0.0, std::min(1.0, t));
  return std::hypot(a.x + t * d.x - p.x, a.y + t * d.y - p.y);
}

double orient(Vec2 a, Vec2 b, Vec2 c) { return (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x); }

double seg_seg(Vec2 a, Vec2 b, Vec2 c, Vec2 d) {
  const double o1 = orient(a, b, c), o2 = orient(a, b, d), o3 = orient(c, d, a), o4 = orient(c, d, b);
  if (((o1 > 0 && o2 < 0) || (o1 < 0 && o2 > 0)) && ((o3 > 0 && o4 < 0) || (o3 < 0 && o4 > 0))) return 0.0;
  return std::min({seg_point(c, a, b), seg_point(d, a, b), seg_point(a, c, d), seg_point(b, c, d)});
}

std::vector<Vec2> clockwise_ring(const Contour& c) {
  std::vector<Vec2> v = c.vertices();
  double twice_area = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const Vec2 p = v[i], q = v[(i + 1) % v.size()];
    twice_area += p.x * q.y - q.x * p.y;
  }
  if (twice_area > 0.0) std::reverse(v.begin(), v.end());
  return v;
}

// Edge index and fraction of the point on the ring, if it lies on it.
std::optional<std::pair<std::size_t, double>> locate(const std::vector<Vec2>& ring, Vec2 p) {
  std::optional<std::pair<std::size_t, double>> best;
  double best_d = 1e-7;
  for (std::size_t i = 0; i < ring.size(); ++i) {
    const Vec2 a = ring[i], b = ring[(i + 1) % ring.size()];
    const double d = seg_point(p, a, b);
    if (d <= best_d) {
      const Vec2 ab = b - a;
      const double len2 = ab.x * ab.x + ab.y * ab.y;
      const double f = len2 > 0.0 ? ((p.x - a.x) * ab.x + (p.y - a.y) * ab.y) / len2 : 0.0;
      best_d = d;
      best = std::pair{i, std::max(0.0, std::min(1.0, f))};
    }
  }
  return best;
}

// Polyline from `from` to `to` following the ring direction.
std::optional<std::vector<Vec2>> ring_path(const std::vector<Vec2>& ring, Vec2 from, Vec2 to) {
  const auto a = locate(ring, from), b = locate(ring, to);
  if (!a || !b) return std::nullopt;
  std::vector<Vec2> out{from};
  if (a->first == b->first && b->second >= a->second) {
    out.push_back(to);
    return out;
  }
  const std::size_t n = ring.size();
  for (std::size_t i = (a->first + 1) % n;; i = (i + 1) % n) {
    out.push_back(ring[i]);
    if (i == b->first) break;
  }
  out.push_back(to);
  return out;
}

double path_distance(const std::vector<Vec2>& x, const std::vector<Vec2>& y) {
  double d = kInf;
  for (std::size_t i = 0; i + 1 < x.size(); ++i) {
    for (std::size_t j = 0; j + 1 < y.size(); ++j) d = std::min(d, seg_seg(x[i], x[i + 1], y[j], y[j + 1]));
  }
  return d;
}

// The segment [a, b] lies inside the union of closed disks B(c_j, r).
bool segment_covered(Vec2 a, Vec2 b, const std::vector<Vec2>& centers, double r) {
  std::vector<std::pair<double, double>> cover;
  const Vec2 d = b - a;
  const double dd = d.x * d.x + d.y * d.y;
  for (Vec2 c : centers) {
    const Vec2 f = a - c;
    if (dd == 0.0) {
      if (std::hypot(f.x, f.y) <= r) return true;
      continue;
    }
    const double fd = f.x * d.x + f.y * d.y, ff = f.x * f.x + f.y * f.y;
    const double disc = fd * fd - dd * (ff - r * r);
    if (disc < 0.0) continue;
    const double root = std::sqrt(disc);
    const double lo = (-fd - root) / dd, hi = (-fd + root) / dd;
    if (hi >= 0.0 && lo <= 1.0) cover.emplace_back(std::max(0.0, lo), std::min(1.0, hi));
  }
  if (dd == 0.0) return false;
  std::sort(cover.begin(), cover.end());
  double reach = 0.0;
  for (const auto& [lo, hi] : cover) {
    if (lo > reach + kTol) return false;
    reach = std::max(reach, hi);
  }
  return reach >= 1.0 - kTol;
}

}  // namespace

SkeletonVerdict verify_skeleton(const Skeleton& sk, std::span<const Contour> gamma) {
  SkeletonVerdict v;
  auto fail = [&](bool& flag, const std::string& why) {
    flag = false;
    if (v.failure.empty()) v.failure = why;
  };
  const double a = sk.alpha, d = sk.delta;
  const auto m = sk.segments.size();

  std::set<LatticeKey> seen;
  auto check_vertex = [&](Vec2 p, std::size_t i) {
    const bool lattice = std::abs(p.x - std::round(p.x)) < kTol && std::abs(p.y - std::round(p.y)) < kTol;
    if (!lattice || std::hypot(p.x, p.y) > sk.L + kTol) fail(v.vertices, "vertex off lattice or outside B(L) at " + std::to_string(i));
    if (!seen.insert({std::llround(p.x), std::llround(p.y)}).second) fail(v.vertices, "repeated vertex at segment " + std::to_string(i));
  };

  std::vector<std::vector<Vec2>> rings;
  for (const auto& c : gamma) rings.push_back(clockwise_ring(c));

  std::vector<std::vector<Vec2>> paths(m);
  std::vector<Vec2> starts;
  std::vector<char> contour_seen(gamma.size(), 0);
  for (std::size_t i = 0; i < m; ++i) {
    const auto& s = sk.segments[i];
    check_vertex(s.I, i);
    check_vertex(s.E, i);
    const double len = std::hypot(s.I.x - s.E.x, s.I.y - s.E.y);
    if (len < a - kSqrt2 - kTol || len > a + kSqrt2 + kTol) fail(v.s1, "segment " + std::to_string(i) + " length out of range");

    if (s.contour >= gamma.size()) {
      fail(v.s2, "segment " + std::to_string(i) + " names a missing contour");
      continue;
    }
    const double r = 1.0 / kSqrt2 + kTol;
    if (std::hypot(s.I.x - s.I_on.x, s.I.y - s.I_on.y) > r || std::hypot(s.E.x - s.E_on.x, s.E.y - s.E_on.y) > r) {
      fail(v.s2, "segment " + std::to_string(i) + " witness too far from its lattice ends");
    }
    auto p = ring_path(rings[s.contour], s.I_on, s.E_on);
    if (!p) {
      fail(v.s2, "segment " + std::to_string(i) + " witness not on its contour");
      continue;
    }
    for (Vec2 x : *p) {
      if (std::hypot(x.x - s.I.x, x.y - s.I.y) > a + 1.0 / kSqrt2 + kTol) {
        fail(v.s2, "segment " + std::to_string(i) + " covered path leaves the alpha ball");
        break;
      }
    }
    paths[i] = std::move(*p);

    if (i > 0 && contour_seen[s.contour]) {
      double near = kInf;
      for (Vec2 q : starts) near = std::min(near, std::hypot(q.x - s.I.x, q.y - s.I.y));
      if (near > a + d + kSqrt2 + kTol) fail(v.s3, "segment " + std::to_string(i) + " starts too far from earlier ones");
    }
    contour_seen[s.contour] = 1;
    starts.push_back(s.I);
  }

  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = i + 1; j < m; ++j) {
      if (paths[i].size() > 1 && paths[j].size() > 1 && path_distance(paths[i], paths[j]) < d - kTol) {
        fail(v.s5, "covered paths " + std::to_string(i) + " and " + std::to_string(j) + " closer than delta");
      }
    }
  }

  const double reach = 2.0 * a + d + kSqrt2 + kTol;
  for (std::size_t k = 0; k < rings.size(); ++k) {
    const auto& ring = rings[k];
    for (std::size_t e = 0; e < ring.size(); ++e) {
      if (!segment_covered(ring[e], ring[(e + 1) % ring.size()], starts, reach)) {
        fail(v.s4, "contour " + std::to_string(k) + " edge " + std::to_string(e) + " far from all initial points");
        break;
      }
    }
  }
  return v;
}

IsoperimetricReport isoperimetric_check(const Skeleton& skeleton, std::span<const Contour> gamma, double c1,
                                        double c2) {
  IsoperimetricReport r;
  PolygonalConfiguration config;
  config.contours.assign(gamma.begin(), gamma.end());
  const Colouring col(config);
  for (std::size_t i = 0; i < gamma.size(); ++i) r.area += (col.depth(i) % 2 == 0 ? 1.0 : -1.0) * gamma[i].area();
  r.skeleton_length = skeleton.length();
  r.lower_bound = 2.0 * std::sqrt(kPi * r.area);
  r.slack = r.skeleton_length - r.lower_bound;
  if (gamma.empty()) return r;
  r.budget = c1 * (skeleton.delta / skeleton.alpha) * std::sqrt(r.area) + c2 * skeleton.alpha;
  r.within_budget = r.slack >= -r.budget;
  return r;
}

}  // namespace polyfield
