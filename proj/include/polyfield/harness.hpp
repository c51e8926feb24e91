#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "polyfield/gibbs.hpp"
#include "polyfield/observables.hpp"
#include "polyfield/surface_tension.hpp"

namespace polyfield {

/// Config parse or schema failure; the message names the line or field.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class ExperimentKind { arak, gibbs, tension, wulff };

const char* to_string(ExperimentKind k);

/// Window-length schedule. Zero alpha or delta selects sqrt(L) log L and
/// (log L)^2.
struct Schedule {
  double L = 0.0;
  double a = 0.0;
  double alpha = 0.0;
  double delta = 0.0;
  std::size_t replicas = 1;
  double horizon = 20.0;
  /// Distance kept from the window boundary when measuring magnetisation.
  double margin = 5.0;

  double alpha_value() const;
  double delta_value() const;
};

/// Field modifications; regions are given explicitly in window coordinates.
struct FieldConfig {
  double beta = 5.0;
  std::optional<Cutoff> cutoff;
  std::optional<Window> forbidden;
  std::optional<AreaField> area_field;
};

struct TensionConfig {
  std::vector<double> lambdas{6.0, 12.0};
  TensionMode mode = TensionMode::infinite;
  TensionOptions options;
};

struct WulffConfig {
  /// Magnetisation per area; estimated when absent.
  std::optional<double> m_beta;
  double m_beta_radius = 10.0;
  std::size_t m_beta_replicas = 20;
  /// a = a_fraction 2 pi |M| unless schedule.a is positive.
  double a_fraction = 0.3;
  /// h = c_h a before clipping to beta / (pi alpha).
  double c_h = 1.0;
  double c_large = 1.0;
  std::size_t target_accepted = 50;
  std::size_t proposal_budget = 100000;
  /// Wall-clock cap in seconds; 0 disables it.
  double time_budget = 0.0;
};

struct OutputConfig {
  std::string records;
  std::string summary;
  std::string csv;
  std::string svg;
};

struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::gibbs;
  std::uint64_t seed = 0;
  FieldConfig field;
  Schedule schedule;
  TensionConfig tension;
  WulffConfig wulff;
  std::size_t proposals_per_birth = 32;
  std::size_t pilot_proposals = 20000;
  /// Worker threads for independent replicas.
  std::size_t threads = 1;
  OutputConfig output;

  /// Throws ConfigError naming the offending field.
  void validate() const;
  /// Observation window B(L).
  Window window() const;
  FieldSpec field_spec() const;
  GibbsOptions gibbs_options() const;
  /// Ball radius for tension runs: schedule.delta, or 1 when unset.
  double tension_delta() const { return schedule.delta > 0.0 ? schedule.delta : 1.0; }
};

/// Parses a config document. Keys not in the schema are rejected. Parse
/// errors report the line; schema errors report the dotted field path.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::filesystem::path& path);

/// Canonical form with every default filled in.
nlohmann::json config_to_json(const ExperimentConfig& c);
/// 16 hex digits of FNV-1a 64 over the canonical dump.
std::string config_hash(const ExperimentConfig& c);
/// git describe of the build tree.
const char* build_id();

struct RunRecord {
  std::string build_id;
  std::string config_hash;
  std::uint64_t seed = 0;
  /// One JSON object per replica, each carrying build id, config hash and seed.
  std::vector<nlohmann::json> records;
  /// Aggregate statistics, the canonical config, and wall-clock seconds.
  nlohmann::json summary;
  /// Per-replica table of the main scalars.
  std::string csv;
  /// Configuration rendered by render(), if any.
  std::optional<FreeConfiguration> snapshot;
};

// Seeds: replica i of a run with seed s draws from Rng(derive_seed(s, tag, i))
// with tag arak (arak runs), replicas (gibbs runs, wulff proposals, tension
// lambdas). Birth-mass pilots use the proposals tag and the magnetisation
// estimate the tilts tag, so no subsystem shares a stream.

RunRecord run_arak_experiment(const ExperimentConfig& c);
RunRecord run_gibbs_experiment(const ExperimentConfig& c);
RunRecord run_tension_experiment(const ExperimentConfig& c);

struct WulffSummary {
  double m_beta = 0.0;
  double m_beta_std_error = 0.0;
  bool m_beta_estimated = false;
  double a = 0.0;
  double alpha = 0.0;
  /// Requested c_h a, and the value used after clipping.
  double h_requested = 0.0;
  double h = 0.0;
  bool h_clipped = false;
  double target_magnetisation = 0.0;
  std::size_t proposals = 0;
  std::size_t accepted = 0;
  std::size_t rejected_magnetisation = 0;
  std::size_t rejected_boundary = 0;
  std::size_t clan_errors = 0;
  double max_magnetisation = 0.0;
  double mean_magnetisation = 0.0;
  bool time_budget_hit = false;
  double acceptance_rate = 0.0;
};

struct WulffRun {
  std::vector<WulffReport> reports;
  /// Proposal index of each report.
  std::vector<std::size_t> proposal_index;
  std::vector<PolygonalConfiguration> accepted;
  WulffSummary summary;
};

/// Tilt-then-reject: area-field tilt with alpha cut-off on B(L), kept when
/// M_L reaches M pi L^2 + a L^2 and no alpha-large contour comes within
/// 6 alpha of the boundary. Stops at target_accepted, the proposal budget or
/// the time budget.
WulffRun run_wulff_experiment(const ExperimentConfig& c);
RunRecord wulff_record(const ExperimentConfig& c, const WulffRun& run);

/// Dispatch on c.kind.
RunRecord run_experiment(const ExperimentConfig& c);
/// Load the config, replace its seed, run.
RunRecord replay(const std::filesystem::path& config_path, std::uint64_t seed);

/// One JSON object per line.
std::string to_jsonl(const std::vector<nlohmann::json>& records);
/// Writes records, summary and SVG to the paths set in c.output (empty paths
/// are skipped).
void write_outputs(const ExperimentConfig& c, const RunRecord& r);

struct AnalysisRow {
  std::size_t replica = 0;
  double magnetisation = 0.0;
  std::size_t n_large = 0;
  double total_large_length = 0.0;
  /// NaN when there are no large contours or extraction is impossible.
  double skeleton_length = 0.0;
  double slack = 0.0;
  /// Hausdorff distance from the unique large contour to its best-fit
  /// circle of equal area; NaN unless exactly one large contour.
  double hausdorff = 0.0;
};

/// Per-record metrics of JSONL records holding "window" and "configuration".
std::vector<AnalysisRow> analyze_records(const std::vector<nlohmann::json>& records, double alpha, double delta);
std::string analysis_csv(const std::vector<AnalysisRow>& rows);

}  // namespace polyfield
