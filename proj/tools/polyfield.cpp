#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "polyfield/harness.hpp"
#include "polyfield/serialize.hpp"

using namespace polyfield;
using nlohmann::json;

namespace {

// Region syntax: "disk:x,y,r", "square:x,y,side" or "polygon:x1,y1,x2,y2,...".
Window parse_region(const std::string& text) {
  const auto colon = text.find(':');
  if (colon == std::string::npos) throw CLI::ValidationError("region '" + text + "' lacks a kind prefix");
  const std::string kind = text.substr(0, colon);
  std::vector<double> v;
  std::stringstream ss(text.substr(colon + 1));
  for (std::string item; std::getline(ss, item, ',');) v.push_back(std::stod(item));
  if (kind == "disk" && v.size() == 3) return Window::disk({v[0], v[1]}, v[2]);
  if (kind == "square" && v.size() == 3) return Window::square({v[0], v[1]}, v[2]);
  if (kind == "polygon" && v.size() >= 6 && v.size() % 2 == 0) {
    std::vector<Vec2> pts;
    for (std::size_t i = 0; i < v.size(); i += 2) pts.push_back({v[i], v[i + 1]});
    return Window::polygon(pts);
  }
  throw CLI::ValidationError("cannot parse region '" + text + "'");
}

std::vector<json> read_jsonl(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read '" + path + "'");
  std::vector<json> out;
  std::size_t line_no = 0;
  for (std::string line; std::getline(in, line);) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back(json::parse(line));
    } catch (const json::parse_error& e) {
      throw std::runtime_error(path + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  out << text;
}

// Options shared by the experiment subcommands. Flags given on the command
// line override the config file.
struct Common {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out, summary, csv, svg;
  std::optional<std::size_t> threads;

  void add(CLI::App* app) {
    app->add_option("--config", config, "Experiment config (JSON)")->check(CLI::ExistingFile);
    app->add_option("--seed", seed, "Master seed");
    app->add_option("--out", out, "Primary output path");
    app->add_option("--summary", summary, "Summary JSON path");
    app->add_option("--csv", csv, "Per-replica CSV path");
    app->add_option("--svg", svg, "SVG snapshot path");
    app->add_option("--threads", threads, "Worker threads");
  }

  // A config file supplies everything; without one a minimal document of the
  // given kind is built and completed from flags.
  ExperimentConfig base(ExperimentKind kind, double default_L) const {
    if (!config.empty()) {
      ExperimentConfig c = load_config(config);
      if (c.kind != kind) {
        throw ConfigError(std::string("field 'kind': config is '") + to_string(c.kind) + "', command needs '" +
                          to_string(kind) + "'");
      }
      return c;
    }
    ExperimentConfig c;
    c.kind = kind;
    c.schedule.L = default_L;
    return c;
  }

  void apply(ExperimentConfig& c, bool out_is_csv) const {
    if (seed) c.seed = *seed;
    if (threads) c.threads = *threads;
    if (!out.empty()) (out_is_csv ? c.output.csv : c.output.records) = out;
    if (!summary.empty()) c.output.summary = summary;
    if (!csv.empty()) c.output.csv = csv;
    if (!svg.empty()) c.output.svg = svg;
  }
};

void report(const ExperimentConfig& c, const RunRecord& r) {
  write_outputs(c, r);
  std::cerr << to_string(c.kind) << ": " << r.records.size() << " records, config " << r.config_hash << ", seed "
            << r.seed << "\n";
  if (c.output.summary.empty()) std::cout << r.summary.dump(2) << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Polygonal Markov field simulation and experiments"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(build_id()));

  // run-arak
  Common arak_common;
  std::optional<double> arak_radius;
  std::optional<std::size_t> arak_replicas;
  auto* arak = app.add_subcommand("run-arak", "Free-boundary Arak process in a disk");
  arak_common.add(arak);
  arak->add_option("--radius", arak_radius, "Disk radius L");
  arak->add_option("--replicas", arak_replicas, "Number of replicas");

  // run-gibbs
  Common gibbs_common;
  std::optional<double> g_beta, g_radius, g_cutoff, g_field, g_horizon;
  std::optional<std::size_t> g_replicas;
  std::string g_cutoff_region, g_forbid, g_field_region;
  auto* gibbs = app.add_subcommand("run-gibbs", "Length-interacting field via the graphical construction");
  gibbs_common.add(gibbs);
  gibbs->add_option("--beta", g_beta, "Length penalty beta");
  gibbs->add_option("--radius", g_radius, "Disk radius L");
  gibbs->add_option("--cutoff", g_cutoff, "Largest diameter allowed in the cut-off region");
  gibbs->add_option("--cutoff-region", g_cutoff_region, "Cut-off region (default: the window)");
  gibbs->add_option("--forbid", g_forbid, "Region no contour may hit");
  gibbs->add_option("--field", g_field, "Area field h");
  gibbs->add_option("--field-region", g_field_region, "Area field region (default: the window)");
  gibbs->add_option("--horizon", g_horizon, "Length of the time window");
  gibbs->add_option("--replicas", g_replicas, "Number of replicas");

  // estimate-tension
  Common tension_common;
  std::optional<double> t_beta, t_delta;
  std::vector<double> t_lambdas;
  std::optional<std::size_t> t_replicas;
  std::string t_mode;
  auto* tension = app.add_subcommand("estimate-tension", "Killed-walk surface tension estimates");
  tension_common.add(tension);
  tension->add_option("--beta", t_beta, "Length penalty beta");
  tension->add_option("--delta", t_delta, "Ball radius delta");
  tension->add_option("--lambda", t_lambdas, "Distances |x - y|")->delimiter(',');
  tension->add_option("--replicas", t_replicas, "Walks per distance");
  tension->add_option("--mode", t_mode, "finite or infinite")->check(CLI::IsMember({"finite", "infinite"}));

  // wulff
  Common wulff_common;
  std::optional<double> w_beta, w_radius, w_alpha, w_a, w_m, w_time;
  std::optional<std::size_t> w_budget, w_target;
  auto* wulff = app.add_subcommand("wulff", "Tilt-then-reject droplet experiment");
  wulff_common.add(wulff);
  wulff->add_option("--beta", w_beta, "Length penalty beta");
  wulff->add_option("--radius", w_radius, "Disk radius L");
  wulff->add_option("--alpha", w_alpha, "Cut-off scale alpha");
  wulff->add_option("--a", w_a, "Excess magnetisation per L^2");
  wulff->add_option("--m-beta", w_m, "Magnetisation per area (skips the estimate)");
  wulff->add_option("--proposals", w_budget, "Proposal budget");
  wulff->add_option("--target", w_target, "Stop after this many accepted samples");
  wulff->add_option("--time-budget", w_time, "Wall-clock cap in seconds");

  // analyze
  std::string an_in, an_out;
  double an_alpha = 0.0, an_delta = 0.0;
  auto* analyze = app.add_subcommand("analyze", "Per-record observables of a JSONL run");
  analyze->add_option("--in", an_in, "Input JSONL")->required()->check(CLI::ExistingFile);
  analyze->add_option("--alpha", an_alpha, "Large-contour scale")->required();
  analyze->add_option("--delta", an_delta, "Skeleton separation")->required();
  analyze->add_option("--out", an_out, "Output CSV (stdout when absent)");

  // render
  std::string r_in, r_out, r_config;
  std::size_t r_replica = 0;
  std::optional<std::uint64_t> r_seed;
  auto* render = app.add_subcommand("render", "SVG of one record, or of a fresh run of a config");
  render->add_option("--in", r_in, "Input JSONL")->check(CLI::ExistingFile);
  render->add_option("--config", r_config, "Run this config and render its first replica")->check(CLI::ExistingFile);
  render->add_option("--seed", r_seed, "Seed for --config");
  render->add_option("--replica", r_replica, "Record index in --in");
  render->add_option("--out", r_out, "Output SVG (stdout when absent)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (arak->parsed()) {
      ExperimentConfig c = arak_common.base(ExperimentKind::arak, arak_radius.value_or(4.0));
      if (arak_radius) c.schedule.L = *arak_radius;
      if (arak_replicas) c.schedule.replicas = *arak_replicas;
      arak_common.apply(c, false);
      c.validate();
      report(c, run_experiment(c));
    } else if (gibbs->parsed()) {
      ExperimentConfig c = gibbs_common.base(ExperimentKind::gibbs, g_radius.value_or(5.0));
      if (g_radius) c.schedule.L = *g_radius;
      if (g_beta) c.field.beta = *g_beta;
      if (g_horizon) c.schedule.horizon = *g_horizon;
      if (g_replicas) c.schedule.replicas = *g_replicas;
      if (g_cutoff) c.field.cutoff = Cutoff{*g_cutoff, g_cutoff_region.empty() ? c.window() : parse_region(g_cutoff_region)};
      if (!g_forbid.empty()) c.field.forbidden = parse_region(g_forbid);
      if (g_field) c.field.area_field = AreaField{*g_field, g_field_region.empty() ? c.window() : parse_region(g_field_region)};
      gibbs_common.apply(c, false);
      c.validate();
      report(c, run_experiment(c));
    } else if (tension->parsed()) {
      ExperimentConfig c = tension_common.base(ExperimentKind::tension, 0.0);
      if (t_beta) c.field.beta = *t_beta;
      if (t_delta) c.schedule.delta = *t_delta;
      if (!t_lambdas.empty()) c.tension.lambdas = t_lambdas;
      if (t_replicas) c.tension.options.replicas = *t_replicas;
      if (!t_mode.empty()) c.tension.mode = *parse_tension_mode(t_mode);
      tension_common.apply(c, true);
      c.validate();
      report(c, run_experiment(c));
    } else if (wulff->parsed()) {
      // The default alpha schedule is too coarse for the boundary event at
      // small L, so a fresh config needs --alpha.
      ExperimentConfig c = wulff_common.base(ExperimentKind::wulff, w_radius.value_or(20.0));
      if (w_radius) c.schedule.L = *w_radius;
      if (w_beta) c.field.beta = *w_beta;
      if (w_alpha) c.schedule.alpha = *w_alpha;
      if (w_a) c.schedule.a = *w_a;
      if (w_m) c.wulff.m_beta = *w_m;
      if (w_budget) c.wulff.proposal_budget = *w_budget;
      if (w_target) c.wulff.target_accepted = *w_target;
      if (w_time) c.wulff.time_budget = *w_time;
      wulff_common.apply(c, false);
      c.validate();
      report(c, run_experiment(c));
    } else if (analyze->parsed()) {
      const auto rows = analyze_records(read_jsonl(an_in), an_alpha, an_delta);
      const std::string csv = analysis_csv(rows);
      if (an_out.empty()) std::cout << csv;
      else write_text(an_out, csv);
    } else if (render->parsed()) {
      std::string svg;
      if (!r_config.empty()) {
        ExperimentConfig c = load_config(r_config);
        if (r_seed) c.seed = *r_seed;
        const RunRecord r = run_experiment(c);
        svg = render_svg(r.snapshot.value_or(FreeConfiguration{}), c.window());
      } else if (!r_in.empty()) {
        const auto records = read_jsonl(r_in);
        if (r_replica >= records.size()) throw std::runtime_error("--replica beyond the number of records");
        const auto& rec = records[r_replica];
        if (!rec.contains("configuration") || !rec.contains("window")) {
          throw std::runtime_error("record has no configuration to render");
        }
        svg = render_svg(rec.at("configuration").get<FreeConfiguration>(), rec.at("window").get<Window>());
      } else {
        throw std::runtime_error("render needs --in or --config");
      }
      if (r_out.empty()) std::cout << svg;
      else write_text(r_out, svg);
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
