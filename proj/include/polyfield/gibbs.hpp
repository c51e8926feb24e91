#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <vector>

#include "polyfield/free_ensembles.hpp"
#include "polyfield/geometry.hpp"
#include "polyfield/rng.hpp"

namespace polyfield {

struct Cutoff {
  double alpha = 0.0;
  Window region;
};

struct AreaField {
  double h = 0.0;
  Window region;
};

/// Length-interacting field in `window` with optional modifications.
struct FieldSpec {
  double beta = 5.0;
  Window window = Window::disk({0.0, 0.0}, 5.0);
  /// No contour hitting the region may have diameter above alpha.
  std::optional<Cutoff> cutoff;
  /// No contour may hit this region.
  std::optional<Window> forbidden;
  /// Area interaction exp(h M_W).
  std::optional<AreaField> area_field;

  /// Throws std::invalid_argument on beta < 2 (beta < 4 with an area field)
  /// or |h| > beta / (pi alpha).
  void validate() const;
  /// Tilt of the free birth measure: beta, or beta / 2 with an area field.
  double birth_beta() const { return area_field ? beta / 2.0 : beta; }
};

/// Largest |h| allowed with cut-off alpha.
inline double max_area_field(double beta, double alpha) { return beta / (kPi * alpha); }

struct TimeSpaceInstance {
  Contour contour;
  double birth = 0.0;
  double death = 0.0;
  /// Present at the start of the horizon; its ancestry is unobserved.
  bool initial = false;
  /// Uniform used by the area-field acceptance coin.
  double coin = 0.0;
  std::optional<bool> accepted;
  BBox bbox;

  bool alive_at(double s) const { return birth <= s && s < death; }
};

struct BirthMass {
  double mass = 0.0;
  double std_error = 0.0;
  std::size_t proposals = 0;
  /// Fraction of proposals that closed into a contour.
  double closure_rate = 0.0;
};

struct GibbsOptions {
  /// The free process runs on [-horizon, 0].
  double horizon = 20.0;
  /// Fresh proposals per birth for importance resampling.
  std::size_t proposals_per_birth = 32;
  /// Proposals used to estimate the birth-measure mass.
  std::size_t pilot_proposals = 20000;
  /// Reuse this birth-mass estimate instead of running the pilot.
  std::optional<BirthMass> birth_mass;
  ContourProposalOptions proposal;
  std::size_t max_instances = 2'000'000;
  /// Consecutive all-zero proposal batches tolerated per birth.
  std::size_t max_starvation_retries = 1000;
};

/// Importance-sampling estimate of the total mass of the tilted free
/// contour measure on contours inside `window`.
BirthMass estimate_birth_mass(double beta, const Window& window, std::size_t proposals, Rng& rng,
                              const ContourProposalOptions& opts = {});

struct FreeProcessDiagnostics {
  BirthMass birth_mass;
  std::size_t births = 0;
  std::size_t initial_instances = 0;
  std::size_t discarded_forbidden = 0;
  std::size_t discarded_cutoff = 0;
  std::size_t proposals = 0;
  std::size_t closed_proposals = 0;
  std::size_t starvation_retries = 0;
  /// Mean over births of the resampling batch's effective sample size.
  double mean_batch_ess = 0.0;
};

struct FreeProcess {
  std::vector<TimeSpaceInstance> instances;
  double horizon = 0.0;
  FreeProcessDiagnostics diagnostics;
};

/// Stationary free birth-and-death process on [-T, 0]: Poisson births at rate
/// equal to the birth mass, marks by importance resampling of walk-closure
/// proposals, Exp(1) lifetimes. The state at -T is a stationary Poisson draw.
/// Contours violating the forbidden or cut-off rules are dropped at birth.
FreeProcess run_free_process(const FieldSpec& spec, double T, Rng& rng, const GibbsOptions& opts = {});

class ClanError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct AcceptanceDiagnostics {
  std::size_t accepted = 0;
  std::size_t rejected_overlap = 0;
  std::size_t rejected_coin = 0;
  /// Area-field acceptance probabilities that exceeded 1 (only possible for
  /// alpha-large contours outside the cut-off region).
  std::size_t probability_clamps = 0;
  double min_probability = 1.0;
  /// Instances alive at time 0 whose clan reaches the initial state.
  std::size_t unresolved = 0;
};

struct ResolvedField {
  PolygonalConfiguration configuration;
  /// Indices of accepted instances alive at time 0.
  std::vector<std::size_t> alive_accepted;
  /// Indices of all instances alive at time 0.
  std::vector<std::size_t> alive_free;
  AcceptanceDiagnostics diagnostics;
};

/// Forward trimming in birth order: an instance is accepted iff it hits no
/// accepted instance alive at its birth (with an area field: and its coin
/// falls below exp(-beta/2 length + h dM)). Throws ClanError if the clan of
/// an instance alive at 0 reaches the initial state.
ResolvedField resolve_acceptance(std::vector<TimeSpaceInstance>& instances, const FieldSpec& spec);

/// Instance j is an ancestor of i: born no later, alive at i's birth, and
/// overlapping (curves meet; interiors meet with an area field).
bool is_ancestor(const TimeSpaceInstance& j, const TimeSpaceInstance& i, bool area_mode);

struct Clan {
  std::vector<std::size_t> members;
  std::vector<std::size_t> roots;
  bool reaches_initial = false;
  /// Diameter of the union of member contours; 0 for an empty clan.
  double diameter = 0.0;
};

/// Union of the ancestor clans of instances alive at s that hit `target`.
Clan ancestor_clan(const std::vector<TimeSpaceInstance>& instances, const Window& target, double s,
                   bool area_mode = false);

struct FieldDiagnostics {
  FreeProcessDiagnostics free;
  AcceptanceDiagnostics acceptance;
  /// Histogram of clan sizes of the instances alive at 0 (index = size).
  std::vector<std::size_t> clan_sizes;
  std::size_t free_alive = 0;
};

struct FieldSample {
  PolygonalConfiguration configuration;
  FieldDiagnostics diagnostics;
};

/// One approximate draw of the field at time 0.
FieldSample sample_field(const FieldSpec& spec, Rng& rng, const GibbsOptions& opts = {});

struct MagnetisationEstimate {
  double estimate = 0.0;
  double std_error = 0.0;
  std::size_t replicas = 0;
  double margin = 0.0;
};

/// Mean of M_{B(L - margin)} / Area over independent field draws in B(L).
MagnetisationEstimate estimate_spontaneous_magnetisation(double beta, double L, std::size_t replicas, Rng& rng,
                                                         double margin = 5.0, const GibbsOptions& opts = {});

}  // namespace polyfield
