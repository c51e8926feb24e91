#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "polyfield/geometry.hpp"
#include "polyfield/rng.hpp"
#include "polyfield/walk.hpp"

namespace polyfield {

enum class BoundaryMode { empty, free };

const char* to_string(BoundaryMode m);

struct EnumerationResult {
  std::vector<FreeConfiguration> configurations;
  /// Some pair of input lines was closer to parallel than the angle tolerance;
  /// such pairs never share a vertex.
  bool near_parallel = false;
};

/// Weight sums grow roughly factorially in the line count, so strata above
/// the cap carry far more weight than their Poisson probability: at area 0.1
/// a cap of 8 loses about 1% of the total, while at cap 10 the loss is below
/// the noise of 1e5 draws.
inline constexpr std::size_t kEnumerationCap = 10;

/// All configurations carrying exactly one positive-length interval on each
/// input line. Empty mode returns unions of closed contours strictly inside
/// the window; free mode also admits chains ending on the boundary.
EnumerationResult enumerate_admissible_on_lines(std::span<const Line> lines, const Window& window,
                                                BoundaryMode mode, std::size_t cap = kEnumerationCap);

struct PartitionEstimate {
  double estimate = 0.0;
  double std_error = 0.0;
  /// Line-process draws used.
  std::size_t replicas = 0;
  /// Poisson probability of more lines than the enumeration cap. Those
  /// strata are left out; their weight is a larger fraction (see the cap).
  double truncated_mass = 0.0;
  std::size_t near_parallel = 0;
};

/// Per-replica value of sum over configurations of exp(-2 length).
double configuration_weight_sum(std::span<const Line> lines, const Window& window, BoundaryMode mode,
                                std::size_t cap = kEnumerationCap);

/// Monte Carlo estimate of E sum_{gamma} exp(-2 length(gamma)) over the
/// admissible configurations of a Poisson line process in the window.
/// Stratified on the line count with exact Poisson weights: a pilot in each
/// stratum, then Neyman allocation scaled by enumeration work.
PartitionEstimate estimate_partition_function(const Window& window, BoundaryMode mode, std::size_t replicas,
                                              Rng& rng, std::size_t cap = kEnumerationCap);

struct ContourProposalOptions {
  /// Return distance below which closure is attempted with full probability.
  double closure_radius = 0.2;
  double close_probability = 0.75;
  /// Walk killing rate; negative means beta - 2.
  double kill_rate = -1.0;
  /// Cap on walked length after the first update point.
  double max_walk_length = 40.0;
};

struct WeightedContourProposal {
  Contour contour;
  double log_target_density = 0.0;
  double log_proposal_density = 0.0;
  double log_weight() const { return log_target_density - log_proposal_density; }
  double weight() const;
};

/// Walk-closure proposal of a contour from the free measure tilted by beta.
/// The first edge lies on a mu-line through `anchor`, the walk is confined to
/// `window`. Returns nullopt when the walk dies before closing.
std::optional<WeightedContourProposal> propose_free_contour(double beta, const Window& anchor,
                                                            const Window& window, Rng& rng,
                                                            const ContourProposalOptions& opts = {});

/// Log proposal density of `contour` under propose_free_contour, with respect
/// to the product of mu over its edge lines. -inf outside the support.
double contour_proposal_log_density(const Contour& contour, double beta, const Window& anchor,
                                    const Window& window, const ContourProposalOptions& opts = {});

/// Log density of the tilted free contour measure: -(2 + beta) length.
inline double contour_log_target(const Contour& c, double beta) { return -(2.0 + beta) * c.length(); }

struct PathFamilySpec {
  Vec2 x;
  Vec2 y;
  double delta = 0.0;
};

struct WeightedPath {
  std::vector<Vec2> vertices;
  double log_target_density = 0.0;
  double log_proposal_density = 0.0;
  double weight() const;
};

/// Walk from the boundary of B(x, delta) killed at rate beta - 2; success is
/// the first entry into B(y, delta). The path ends at the entry point.
std::optional<WeightedPath> propose_free_path(const PathFamilySpec& spec, double beta, const Window* window,
                                              Rng& rng);

}  // namespace polyfield
