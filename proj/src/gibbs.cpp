#include "polyfield/gibbs.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "polyfield/observables.hpp"

namespace polyfield {

void FieldSpec::validate() const {
  if (!(beta >= 2.0)) throw std::invalid_argument("FieldSpec: beta must be at least 2");
  if (area_field && !(beta >= 4.0)) {
    throw std::invalid_argument("FieldSpec: an area field needs beta >= 4 (births are tilted by beta / 2)");
  }
  if (cutoff && !(cutoff->alpha > 0.0)) throw std::invalid_argument("FieldSpec: cut-off alpha must be positive");
  if (area_field && cutoff) {
    const double bound = max_area_field(beta, cutoff->alpha);
    if (std::abs(area_field->h) > bound * (1.0 + 1e-12)) {
      throw std::invalid_argument("FieldSpec: |h| exceeds beta / (pi alpha)");
    }
  }
}

BirthMass estimate_birth_mass(double beta, const Window& window, std::size_t proposals, Rng& rng,
                              const ContourProposalOptions& opts) {
  if (proposals == 0) throw std::invalid_argument("estimate_birth_mass: proposals must be positive");
  double sum = 0.0, sum2 = 0.0;
  std::size_t closed = 0;
  for (std::size_t i = 0; i < proposals; ++i) {
    auto p = propose_free_contour(beta, window, window, rng, opts);
    if (!p) continue;
    ++closed;
    const double w = p->weight();
    sum += w;
    sum2 += w * w;
  }
  const double n = static_cast<double>(proposals);
  BirthMass bm;
  bm.proposals = proposals;
  bm.mass = sum / n;
  bm.std_error = std::sqrt(std::max(sum2 / n - bm.mass * bm.mass, 0.0) / n);
  bm.closure_rate = static_cast<double>(closed) / n;
  return bm;
}

namespace {

class MarkSampler {
 public:
  MarkSampler(const FieldSpec& spec, const GibbsOptions& opts, FreeProcessDiagnostics& diag)
      : spec_(spec), opts_(opts), diag_(diag) {}

  Contour draw(Rng& rng) {
    const std::size_t k = std::max<std::size_t>(opts_.proposals_per_birth, 1);
    for (std::size_t attempt = 0;; ++attempt) {
      batch_.clear();
      log_w_.clear();
      for (std::size_t i = 0; i < k; ++i) {
        ++diag_.proposals;
        auto p = propose_free_contour(spec_.birth_beta(), spec_.window, spec_.window, rng, opts_.proposal);
        if (!p) continue;
        ++diag_.closed_proposals;
        log_w_.push_back(p->log_weight());
        batch_.push_back(std::move(p->contour));
      }
      if (batch_.empty()) {
        ++diag_.starvation_retries;
        if (attempt + 1 >= opts_.max_starvation_retries) {
          throw std::runtime_error("run_free_process: contour proposals starved");
        }
        continue;
      }
      const double top = *std::max_element(log_w_.begin(), log_w_.end());
      double total = 0.0, total2 = 0.0;
      for (double& lw : log_w_) {
        lw = std::exp(lw - top);
        total += lw;
        total2 += lw * lw;
      }
      ess_sum_ += total * total / total2;
      double u = rng.uniform() * total;
      std::size_t pick = 0;
      while (pick + 1 < log_w_.size() && u >= log_w_[pick]) u -= log_w_[pick++];
      return std::move(batch_[pick]);
    }
  }

  double ess_sum() const { return ess_sum_; }

 private:
  const FieldSpec& spec_;
  const GibbsOptions& opts_;
  FreeProcessDiagnostics& diag_;
  std::vector<Contour> batch_;
  std::vector<double> log_w_;
  double ess_sum_ = 0.0;
};

}  // namespace

FreeProcess run_free_process(const FieldSpec& spec, double T, Rng& rng, const GibbsOptions& opts) {
  spec.validate();
  if (!(T > 0.0)) throw std::invalid_argument("run_free_process: horizon must be positive");
  Rng pilot = rng.split();
  Rng times = rng.split();
  Rng marks = rng.split();
  Rng lifetimes = rng.split();
  Rng coins = rng.split();

  FreeProcess fp;
  fp.horizon = T;
  auto& diag = fp.diagnostics;
  diag.birth_mass = opts.birth_mass ? *opts.birth_mass
                                    : estimate_birth_mass(spec.birth_beta(), spec.window, opts.pilot_proposals,
                                                          pilot, opts.proposal);
  const double mass = diag.birth_mass.mass;
  if (!(mass > 0.0)) return fp;

  const auto n0 = times.poisson(mass);
  const auto n1 = times.poisson(mass * T);
  if (n0 + n1 > opts.max_instances) throw std::runtime_error("run_free_process: instance limit exceeded");
  std::vector<double> birth_times(n0, -T);
  for (std::uint64_t i = 0; i < n1; ++i) birth_times.push_back(times.uniform(-T, 0.0));
  std::sort(birth_times.begin() + static_cast<std::ptrdiff_t>(n0), birth_times.end());

  MarkSampler sampler(spec, opts, diag);
  for (std::size_t i = 0; i < birth_times.size(); ++i) {
    TimeSpaceInstance inst;
    inst.contour = sampler.draw(marks);
    inst.initial = i < n0;
    inst.birth = birth_times[i];
    inst.death = inst.birth + lifetimes.exponential(1.0);
    inst.coin = coins.uniform();
    inst.bbox = inst.contour.bbox();
    ++diag.births;
    if (inst.initial) ++diag.initial_instances;
    if (spec.forbidden && curve_hits(inst.contour, *spec.forbidden)) {
      ++diag.discarded_forbidden;
      continue;
    }
    if (spec.cutoff && inst.contour.diameter() > spec.cutoff->alpha && curve_hits(inst.contour, spec.cutoff->region)) {
      ++diag.discarded_cutoff;
      continue;
    }
    fp.instances.push_back(std::move(inst));
  }
  if (diag.births > 0) diag.mean_batch_ess = sampler.ess_sum() / static_cast<double>(diag.births);
  return fp;
}

bool is_ancestor(const TimeSpaceInstance& j, const TimeSpaceInstance& i, bool area_mode) {
  if (&j == &i || j.birth > i.birth || !(j.death > i.birth)) return false;
  if (!j.bbox.inflated(kGeomEps).overlaps(i.bbox)) return false;
  return area_mode ? interiors_overlap(j.contour, i.contour) : curves_intersect(j.contour, i.contour);
}

ResolvedField resolve_acceptance(std::vector<TimeSpaceInstance>& instances, const FieldSpec& spec) {
  const bool area_mode = spec.area_field.has_value();
  std::vector<std::size_t> order(instances.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return instances[a].birth < instances[b].birth; });

  ResolvedField out;
  auto& diag = out.diagnostics;
  std::vector<char> tainted(instances.size(), 0);
  std::vector<std::size_t> alive, alive_accepted;
  std::vector<const Contour*> current;
  for (std::size_t idx : order) {
    TimeSpaceInstance& inst = instances[idx];
    auto expired = [&](std::size_t j) { return !(instances[j].death > inst.birth); };
    alive.erase(std::remove_if(alive.begin(), alive.end(), expired), alive.end());
    alive_accepted.erase(std::remove_if(alive_accepted.begin(), alive_accepted.end(), expired), alive_accepted.end());

    tainted[idx] = inst.initial ? 1 : 0;
    for (std::size_t j : alive) {
      if (!tainted[idx] && tainted[j] && is_ancestor(instances[j], inst, area_mode)) tainted[idx] = 1;
    }

    bool hit = false;
    for (std::size_t j : alive_accepted) {
      if (instances[j].bbox.inflated(kGeomEps).overlaps(inst.bbox) && curves_intersect(instances[j].contour, inst.contour)) {
        hit = true;
        break;
      }
    }
    bool accept = !hit;
    if (hit) ++diag.rejected_overlap;
    if (accept && area_mode && !inst.initial) {
      current.clear();
      for (std::size_t j : alive_accepted) current.push_back(&instances[j].contour);
      const double dm = magnetisation_change(current, inst.contour, spec.area_field->region);
      double p = std::exp(-0.5 * spec.beta * inst.contour.length() + spec.area_field->h * dm);
      if (p > 1.0) {
        ++diag.probability_clamps;
        p = 1.0;
      }
      diag.min_probability = std::min(diag.min_probability, p);
      if (!(inst.coin < p)) {
        accept = false;
        ++diag.rejected_coin;
      }
    }
    inst.accepted = accept;
    if (accept) {
      ++diag.accepted;
      alive_accepted.push_back(idx);
    }
    alive.push_back(idx);
  }

  for (std::size_t i = 0; i < instances.size(); ++i) {
    if (!instances[i].alive_at(0.0)) continue;
    out.alive_free.push_back(i);
    if (tainted[i]) ++diag.unresolved;
    if (*instances[i].accepted) {
      out.alive_accepted.push_back(i);
      out.configuration.contours.push_back(instances[i].contour);
    }
  }
  if (diag.unresolved > 0) {
    throw ClanError("resolve_acceptance: " + std::to_string(diag.unresolved) +
                    " instance(s) alive at time 0 have clans reaching the start of the horizon; increase the horizon");
  }
  return out;
}

namespace {

bool hits_target(const Contour& c, const Window& target, bool area_mode) {
  if (curve_hits(c, target)) return true;
  return area_mode && c.contains(target.center());
}

double point_set_diameter(const std::vector<Vec2>& pts) {
  double d = 0.0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    for (std::size_t j = i + 1; j < pts.size(); ++j) d = std::max(d, dist(pts[i], pts[j]));
  }
  return d;
}

std::vector<std::size_t> close_over_ancestors(const std::vector<TimeSpaceInstance>& instances,
                                              std::vector<std::size_t> frontier, bool area_mode) {
  std::vector<char> in(instances.size(), 0);
  for (auto i : frontier) in[i] = 1;
  std::vector<std::size_t> members = frontier;
  while (!frontier.empty()) {
    const std::size_t i = frontier.back();
    frontier.pop_back();
    for (std::size_t j = 0; j < instances.size(); ++j) {
      if (!in[j] && is_ancestor(instances[j], instances[i], area_mode)) {
        in[j] = 1;
        members.push_back(j);
        frontier.push_back(j);
      }
    }
  }
  std::sort(members.begin(), members.end());
  return members;
}

}  // namespace

Clan ancestor_clan(const std::vector<TimeSpaceInstance>& instances, const Window& target, double s, bool area_mode) {
  Clan clan;
  for (std::size_t i = 0; i < instances.size(); ++i) {
    if (instances[i].alive_at(s) && hits_target(instances[i].contour, target, area_mode)) clan.roots.push_back(i);
  }
  clan.members = close_over_ancestors(instances, clan.roots, area_mode);
  std::vector<Vec2> pts;
  for (auto i : clan.members) {
    clan.reaches_initial = clan.reaches_initial || instances[i].initial;
    const auto& v = instances[i].contour.vertices();
    pts.insert(pts.end(), v.begin(), v.end());
  }
  clan.diameter = point_set_diameter(pts);
  return clan;
}

FieldSample sample_field(const FieldSpec& spec, Rng& rng, const GibbsOptions& opts) {
  FreeProcess fp = run_free_process(spec, opts.horizon, rng, opts);
  ResolvedField rf = resolve_acceptance(fp.instances, spec);
  FieldSample out;
  out.configuration = std::move(rf.configuration);
  out.diagnostics.free = fp.diagnostics;
  out.diagnostics.acceptance = rf.diagnostics;
  out.diagnostics.free_alive = rf.alive_free.size();
  for (auto i : rf.alive_free) {
    const auto size = close_over_ancestors(fp.instances, {i}, spec.area_field.has_value()).size();
    if (out.diagnostics.clan_sizes.size() <= size) out.diagnostics.clan_sizes.resize(size + 1, 0);
    ++out.diagnostics.clan_sizes[size];
  }
  return out;
}

MagnetisationEstimate estimate_spontaneous_magnetisation(double beta, double L, std::size_t replicas, Rng& rng,
                                                         double margin, const GibbsOptions& opts) {
  if (replicas == 0) throw std::invalid_argument("estimate_spontaneous_magnetisation: replicas must be positive");
  if (!(margin >= 0.0) || !(margin < L)) throw std::invalid_argument("estimate_spontaneous_magnetisation: need 0 <= margin < L");
  FieldSpec spec;
  spec.beta = beta;
  spec.window = Window::disk({0.0, 0.0}, L);
  const Window inner = Window::disk({0.0, 0.0}, L - margin);
  double sum = 0.0, sum2 = 0.0;
  for (std::size_t r = 0; r < replicas; ++r) {
    Rng child = rng.split();
    const FieldSample fs = sample_field(spec, child, opts);
    const double m = magnetisation(fs.configuration, inner) / inner.area();
    sum += m;
    sum2 += m * m;
  }
  const double n = static_cast<double>(replicas);
  MagnetisationEstimate est;
  est.replicas = replicas;
  est.margin = margin;
  est.estimate = sum / n;
  est.std_error = n > 1 ? std::sqrt(std::max(sum2 / n - est.estimate * est.estimate, 0.0) / (n - 1)) : 0.0;
  return est;
}

}  // namespace polyfield
