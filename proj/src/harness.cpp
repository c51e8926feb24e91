#include "polyfield/harness.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include "polyfield/arak.hpp"
#include "polyfield/serialize.hpp"
#include "polyfield/skeleton.hpp"

#ifndef POLYFIELD_BUILD_ID
#define POLYFIELD_BUILD_ID "unknown"
#endif

namespace polyfield {

using nlohmann::json;

const char* build_id() { return POLYFIELD_BUILD_ID; }

const char* to_string(ExperimentKind k) {
  switch (k) {
    case ExperimentKind::arak: return "arak";
    case ExperimentKind::gibbs: return "gibbs";
    case ExperimentKind::tension: return "tension";
    case ExperimentKind::wulff: return "wulff";
  }
  return "?";
}

double Schedule::alpha_value() const { return alpha > 0.0 ? alpha : std::sqrt(L) * std::log(L); }
double Schedule::delta_value() const { return delta > 0.0 ? delta : std::log(L) * std::log(L); }

namespace {

// Reads one table of the config, remembering which keys were consumed so that
// anything left over can be reported as unknown.
class Table {
 public:
  Table(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(where() + ": expected a table");
  }

  bool has(const std::string& key) const { return j_.contains(key); }

  std::string field(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  template <class T>
  T get(const std::string& key) {
    if (!j_.contains(key)) throw ConfigError("missing field '" + field(key) + "'");
    used_.insert(key);
    return convert<T>(j_.at(key), field(key));
  }

  template <class T>
  T get(const std::string& key, T fallback) {
    return has(key) ? get<T>(key) : fallback;
  }

  Table sub(const std::string& key) {
    used_.insert(key);
    return Table(j_.at(key), field(key));
  }

  Window window(const std::string& key) {
    used_.insert(key);
    try {
      return j_.at(key).get<Window>();
    } catch (const std::exception& e) {
      throw ConfigError("field '" + field(key) + "': " + e.what());
    }
  }

  void finish() const {
    for (const auto& [k, v] : j_.items()) {
      if (!used_.count(k)) throw ConfigError("unknown field '" + field(k) + "'");
    }
  }

 private:
  std::string where() const { return path_.empty() ? "config" : "field '" + path_ + "'"; }

  template <class T>
  static T convert(const json& v, const std::string& name) {
    if constexpr (std::is_same_v<T, bool>) {
      if (!v.is_boolean()) throw ConfigError("field '" + name + "': expected true or false");
    } else if constexpr (std::is_same_v<T, std::string>) {
      if (!v.is_string()) throw ConfigError("field '" + name + "': expected a string");
    } else if constexpr (std::is_unsigned_v<T>) {
      if (!v.is_number_unsigned()) throw ConfigError("field '" + name + "': expected a non-negative integer");
    } else if constexpr (std::is_floating_point_v<T>) {
      if (!v.is_number()) throw ConfigError("field '" + name + "': expected a number");
    } else if constexpr (std::is_integral_v<T>) {
      if (!v.is_number_integer()) throw ConfigError("field '" + name + "': expected an integer");
    } else {
      if (!v.is_array()) throw ConfigError("field '" + name + "': expected an array");
      for (const auto& x : v) {
        if (!x.is_number()) throw ConfigError("field '" + name + "': expected an array of numbers");
      }
    }
    return v.get<T>();
  }

  const json& j_;
  std::string path_;
  std::set<std::string> used_;
};

bool region_inside(const Window& region, double L) {
  if (region.kind() == Window::Kind::disk) return norm(region.center()) + region.radius() <= L * (1.0 + 1e-12);
  for (Vec2 v : region.vertices()) {
    if (norm(v) > L * (1.0 + 1e-12)) return false;
  }
  return true;
}

template <class F>
void parallel_for(std::size_t n, std::size_t threads, F&& fn) {
  if (threads <= 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex m;
  std::vector<std::thread> pool;
  for (std::size_t t = 0; t < std::min(threads, n); ++t) {
    pool.emplace_back([&] {
      for (std::size_t i; (i = next++) < n;) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(m);
          if (!error) error = std::current_exception();
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

json header(const ExperimentConfig& c, const std::string& hash) {
  return json{{"build_id", build_id()}, {"config_hash", hash}, {"seed", c.seed}, {"kind", to_string(c.kind)}};
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

json field_spec_json(const FieldSpec& s) {
  json j{{"beta", s.beta}, {"window", s.window}};
  if (s.cutoff) j["cutoff"] = {{"alpha", s.cutoff->alpha}, {"region", s.cutoff->region}};
  if (s.forbidden) j["forbidden"] = *s.forbidden;
  if (s.area_field) j["area_field"] = {{"h", s.area_field->h}, {"region", s.area_field->region}};
  return j;
}

json diagnostics_json(const FieldDiagnostics& d) {
  const auto& f = d.free;
  const auto& a = d.acceptance;
  return json{{"birth_mass", f.birth_mass.mass},
              {"birth_mass_std_error", f.birth_mass.std_error},
              {"births", f.births},
              {"initial_instances", f.initial_instances},
              {"discarded_forbidden", f.discarded_forbidden},
              {"discarded_cutoff", f.discarded_cutoff},
              {"proposals", f.proposals},
              {"closed_proposals", f.closed_proposals},
              {"mean_batch_ess", f.mean_batch_ess},
              {"accepted", a.accepted},
              {"rejected_overlap", a.rejected_overlap},
              {"rejected_coin", a.rejected_coin},
              {"probability_clamps", a.probability_clamps},
              {"min_probability", a.min_probability},
              {"clan_sizes", d.clan_sizes},
              {"free_alive", d.free_alive}};
}

}  // namespace

void ExperimentConfig::validate() const {
  auto fail = [](const std::string& field, const std::string& msg) {
    throw ConfigError("field '" + field + "': " + msg);
  };
  if (kind != ExperimentKind::tension && !(schedule.L > 1.0)) fail("schedule.L", "must exceed 1");
  if (schedule.replicas == 0) fail("schedule.replicas", "must be positive");
  if (!(schedule.horizon > 0.0)) fail("schedule.horizon", "must be positive");
  if (!(schedule.margin >= 0.0)) fail("schedule.margin", "must be non-negative");
  if (!(schedule.alpha >= 0.0)) fail("schedule.alpha", "must be non-negative");
  if (!(schedule.delta >= 0.0)) fail("schedule.delta", "must be non-negative");
  if (!(field.beta >= 2.0)) fail("field.beta", "must be at least 2");
  if (threads == 0) fail("threads", "must be positive");
  if (proposals_per_birth == 0) fail("gibbs.proposals_per_birth", "must be positive");
  if (pilot_proposals == 0) fail("gibbs.pilot_proposals", "must be positive");
  if (kind != ExperimentKind::tension) {
    const double L = schedule.L;
    if (field.cutoff && !region_inside(field.cutoff->region, L)) fail("field.cutoff.region", "not inside the window");
    if (field.forbidden && !region_inside(*field.forbidden, L)) fail("field.forbidden", "not inside the window");
    if (field.area_field && !region_inside(field.area_field->region, L)) {
      fail("field.area_field.region", "not inside the window");
    }
    if (field.cutoff && !(field.cutoff->alpha > 0.0)) fail("field.cutoff.alpha", "must be positive");
  }
  if (kind == ExperimentKind::gibbs) {
    try {
      field_spec().validate();
    } catch (const std::invalid_argument& e) {
      fail("field", e.what());
    }
  }
  if (kind == ExperimentKind::tension) {
    if (!(field.beta > 2.0)) fail("field.beta", "must exceed 2");
    const auto& l = tension.lambdas;
    if (l.empty()) fail("tension.lambdas", "must not be empty");
    for (std::size_t i = 0; i < l.size(); ++i) {
      if (!(l[i] > 2.0 * tension_delta())) fail("tension.lambdas", "each lambda must exceed 2 delta");
      if (i > 0 && !(l[i] > l[i - 1])) fail("tension.lambdas", "must increase");
    }
    if (tension.options.replicas == 0) fail("tension.replicas", "must be positive");
    if (tension.options.walks_per_environment == 0) fail("tension.walks_per_environment", "must be positive");
    const double tilt = tension.options.tilt < 0.0 ? field.beta + 1.0 : tension.options.tilt;
    if (!(tilt < field.beta + 2.0)) fail("tension.tilt", "must stay below beta + 2");
  }
  if (kind == ExperimentKind::wulff) {
    if (!(field.beta >= 4.0)) fail("field.beta", "the area field needs beta >= 4");
    if (field.area_field) fail("field.area_field", "set by the wulff experiment, leave it out");
    if (field.forbidden) fail("field.forbidden", "not supported by the wulff experiment");
    const double alpha = schedule.alpha_value();
    if (!(6.0 * alpha < schedule.L)) {
      fail("schedule.alpha", "the boundary event needs 6 alpha < L (alpha = " + fmt(alpha) + ")");
    }
    if (wulff.m_beta) {
      const double m = *wulff.m_beta;
      if (!(m < 0.0 && m > -1.0)) fail("wulff.m_beta", "must lie in (-1, 0)");
      if (schedule.a > 0.0 && !(schedule.a < 2.0 * kPi * std::abs(m))) {
        fail("schedule.a", "must lie in (0, 2 pi |M|)");
      }
    }
    if (!(wulff.a_fraction > 0.0 && wulff.a_fraction < 1.0)) fail("wulff.a_fraction", "must lie in (0, 1)");
    if (!(wulff.c_h >= 0.0)) fail("wulff.c_h", "must be non-negative");
    if (!(wulff.c_large > 0.0)) fail("wulff.c_large", "must be positive");
    if (!(wulff.m_beta_radius > schedule.margin)) fail("wulff.m_beta_radius", "must exceed schedule.margin");
    if (wulff.m_beta_replicas == 0) fail("wulff.m_beta_replicas", "must be positive");
    if (wulff.proposal_budget == 0) fail("wulff.proposal_budget", "must be positive");
    if (!(wulff.time_budget >= 0.0)) fail("wulff.time_budget", "must be non-negative");
  }
}

Window ExperimentConfig::window() const { return Window::disk({0.0, 0.0}, schedule.L); }

FieldSpec ExperimentConfig::field_spec() const {
  FieldSpec s;
  s.beta = field.beta;
  s.window = window();
  s.cutoff = field.cutoff;
  s.forbidden = field.forbidden;
  s.area_field = field.area_field;
  return s;
}

GibbsOptions ExperimentConfig::gibbs_options() const {
  GibbsOptions g;
  g.horizon = schedule.horizon;
  g.proposals_per_birth = proposals_per_birth;
  g.pilot_proposals = pilot_proposals;
  return g;
}

ExperimentConfig parse_config(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config parse error: ") + e.what());
  }
  ExperimentConfig c;
  Table root(doc, "");
  const std::string kind = root.get<std::string>("kind");
  if (kind == "arak") c.kind = ExperimentKind::arak;
  else if (kind == "gibbs") c.kind = ExperimentKind::gibbs;
  else if (kind == "tension") c.kind = ExperimentKind::tension;
  else if (kind == "wulff") c.kind = ExperimentKind::wulff;
  else throw ConfigError("field 'kind': expected arak, gibbs, tension or wulff");
  c.seed = root.get<std::uint64_t>("seed");
  c.threads = root.get<std::size_t>("threads", c.threads);

  if (root.has("field")) {
    Table f = root.sub("field");
    c.field.beta = f.get<double>("beta", c.field.beta);
    if (f.has("cutoff")) {
      Table t = f.sub("cutoff");
      c.field.cutoff = Cutoff{t.get<double>("alpha"), t.window("region")};
      t.finish();
    }
    if (f.has("forbidden")) c.field.forbidden = f.window("forbidden");
    if (f.has("area_field")) {
      Table t = f.sub("area_field");
      c.field.area_field = AreaField{t.get<double>("h"), t.window("region")};
      t.finish();
    }
    f.finish();
  }

  {
    if (!root.has("schedule")) throw ConfigError("missing field 'schedule'");
    Table s = root.sub("schedule");
    auto& sc = c.schedule;
    sc.L = c.kind == ExperimentKind::tension ? s.get<double>("L", 0.0) : s.get<double>("L");
    sc.a = s.get<double>("a", sc.a);
    sc.alpha = s.get<double>("alpha", sc.alpha);
    sc.delta = s.get<double>("delta", sc.delta);
    sc.replicas = s.get<std::size_t>("replicas", sc.replicas);
    sc.horizon = s.get<double>("horizon", sc.horizon);
    sc.margin = s.get<double>("margin", sc.margin);
    s.finish();
  }

  if (root.has("gibbs")) {
    Table g = root.sub("gibbs");
    c.proposals_per_birth = g.get<std::size_t>("proposals_per_birth", c.proposals_per_birth);
    c.pilot_proposals = g.get<std::size_t>("pilot_proposals", c.pilot_proposals);
    g.finish();
  }

  if (root.has("tension")) {
    Table t = root.sub("tension");
    auto& o = c.tension.options;
    c.tension.lambdas = t.get<std::vector<double>>("lambdas", c.tension.lambdas);
    if (t.has("mode")) {
      const auto m = parse_tension_mode(t.get<std::string>("mode"));
      if (!m) throw ConfigError("field 'tension.mode': expected finite or infinite");
      c.tension.mode = *m;
    }
    o.replicas = t.get<std::size_t>("replicas", o.replicas);
    o.walks_per_environment = t.get<std::size_t>("walks_per_environment", o.walks_per_environment);
    o.environment = t.get<bool>("environment", o.environment);
    o.environment_margin = t.get<double>("environment_margin", o.environment_margin);
    o.tilt = t.get<double>("tilt", o.tilt);
    o.homing = t.get<double>("homing", o.homing);
    o.homing_mix = t.get<double>("homing_mix", o.homing_mix);
    o.max_entries = t.get<int>("max_entries", o.max_entries);
    t.finish();
  }

  if (root.has("wulff")) {
    Table w = root.sub("wulff");
    auto& o = c.wulff;
    if (w.has("m_beta")) o.m_beta = w.get<double>("m_beta");
    o.m_beta_radius = w.get<double>("m_beta_radius", o.m_beta_radius);
    o.m_beta_replicas = w.get<std::size_t>("m_beta_replicas", o.m_beta_replicas);
    o.a_fraction = w.get<double>("a_fraction", o.a_fraction);
    o.c_h = w.get<double>("c_h", o.c_h);
    o.c_large = w.get<double>("c_large", o.c_large);
    o.target_accepted = w.get<std::size_t>("target_accepted", o.target_accepted);
    o.proposal_budget = w.get<std::size_t>("proposal_budget", o.proposal_budget);
    o.time_budget = w.get<double>("time_budget", o.time_budget);
    w.finish();
  }

  if (root.has("output")) {
    Table o = root.sub("output");
    c.output.records = o.get<std::string>("records", "");
    c.output.summary = o.get<std::string>("summary", "");
    c.output.csv = o.get<std::string>("csv", "");
    c.output.svg = o.get<std::string>("svg", "");
    o.finish();
  }
  root.finish();
  c.validate();
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config '" + path.string() + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

json config_to_json(const ExperimentConfig& c) {
  json field{{"beta", c.field.beta}};
  if (c.field.cutoff) field["cutoff"] = {{"alpha", c.field.cutoff->alpha}, {"region", c.field.cutoff->region}};
  if (c.field.forbidden) field["forbidden"] = *c.field.forbidden;
  if (c.field.area_field) field["area_field"] = {{"h", c.field.area_field->h}, {"region", c.field.area_field->region}};
  const auto& s = c.schedule;
  const auto& t = c.tension.options;
  const auto& w = c.wulff;
  json wulff{{"m_beta_radius", w.m_beta_radius}, {"m_beta_replicas", w.m_beta_replicas},
             {"a_fraction", w.a_fraction},       {"c_h", w.c_h},
             {"c_large", w.c_large},             {"target_accepted", w.target_accepted},
             {"proposal_budget", w.proposal_budget}, {"time_budget", w.time_budget}};
  if (w.m_beta) wulff["m_beta"] = *w.m_beta;
  return json{
      {"kind", to_string(c.kind)},
      {"seed", c.seed},
      {"threads", c.threads},
      {"field", field},
      {"schedule",
       {{"L", s.L}, {"a", s.a}, {"alpha", s.alpha}, {"delta", s.delta}, {"replicas", s.replicas},
        {"horizon", s.horizon}, {"margin", s.margin}}},
      {"gibbs", {{"proposals_per_birth", c.proposals_per_birth}, {"pilot_proposals", c.pilot_proposals}}},
      {"tension",
       {{"lambdas", c.tension.lambdas}, {"mode", to_string(c.tension.mode)}, {"replicas", t.replicas},
        {"walks_per_environment", t.walks_per_environment}, {"environment", t.environment},
        {"environment_margin", t.environment_margin}, {"tilt", t.tilt}, {"homing", t.homing},
        {"homing_mix", t.homing_mix}, {"max_entries", t.max_entries}}},
      {"wulff", wulff},
      {"output",
       {{"records", c.output.records}, {"summary", c.output.summary}, {"csv", c.output.csv}, {"svg", c.output.svg}}}};
}

std::string config_hash(const ExperimentConfig& c) {
  // Output paths and the thread count do not change results.
  json j = config_to_json(c);
  j.erase("output");
  j.erase("threads");
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : j.dump()) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

namespace {

RunRecord start_record(const ExperimentConfig& c) {
  RunRecord r;
  r.build_id = build_id();
  r.config_hash = config_hash(c);
  r.seed = c.seed;
  return r;
}

void finish_summary(RunRecord& r, const ExperimentConfig& c, std::chrono::steady_clock::time_point t0) {
  r.summary["build_id"] = r.build_id;
  r.summary["config_hash"] = r.config_hash;
  r.summary["seed"] = r.seed;
  r.summary["config"] = config_to_json(c);
  r.summary["wall_clock_seconds"] = seconds_since(t0);
}

std::string csv_line(const std::vector<std::string>& cells) {
  std::string s;
  for (std::size_t i = 0; i < cells.size(); ++i) s += (i ? "," : "") + cells[i];
  return s + "\n";
}

}  // namespace

RunRecord run_arak_experiment(const ExperimentConfig& c) {
  c.validate();
  const auto t0 = std::chrono::steady_clock::now();
  RunRecord r = start_record(c);
  const Window window = c.window();
  const std::size_t n = c.schedule.replicas;
  std::vector<ArakResult> results(n);
  parallel_for(n, c.threads, [&](std::size_t i) {
    Rng rng(derive_seed(c.seed, Stream::arak, i));
    results[i] = run_arak(window, rng);
  });
  r.csv = csv_line({"replica", "contours", "chains", "length", "events", "triple_collision"});
  double total_length = 0.0;
  std::size_t triples = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto& res = results[i];
    const auto& st = res.stats;
    json rec = header(c, r.config_hash);
    rec["replica"] = i;
    rec["window"] = window;
    rec["configuration"] = res.configuration;
    rec["length"] = res.configuration.length();
    rec["stats"] = {{"interior_births", st.interior_births}, {"boundary_births", st.boundary_births},
                    {"velocity_jumps", st.velocity_jumps},   {"collisions", st.collisions},
                    {"boundary_deaths", st.boundary_deaths}, {"events", st.events},
                    {"triple_collision", st.triple_collision}};
    r.records.push_back(std::move(rec));
    r.csv += csv_line({std::to_string(i), std::to_string(res.configuration.contours.size()),
                       std::to_string(res.configuration.chains.size()), fmt(res.configuration.length()),
                       std::to_string(st.events), st.triple_collision ? "1" : "0"});
    total_length += res.configuration.length();
    triples += st.triple_collision ? 1 : 0;
  }
  if (n > 0) r.snapshot = results[0].configuration;
  r.summary = {{"replicas", n}, {"mean_length", total_length / static_cast<double>(n)},
               {"triple_collisions", triples}};
  finish_summary(r, c, t0);
  return r;
}

RunRecord run_gibbs_experiment(const ExperimentConfig& c) {
  c.validate();
  const auto t0 = std::chrono::steady_clock::now();
  RunRecord r = start_record(c);
  const FieldSpec spec = c.field_spec();
  GibbsOptions g = c.gibbs_options();
  Rng pilot(derive_seed(c.seed, Stream::proposals));
  g.birth_mass = estimate_birth_mass(spec.birth_beta(), spec.window, g.pilot_proposals, pilot, g.proposal);

  const std::size_t n = c.schedule.replicas;
  std::vector<std::optional<FieldSample>> samples(n);
  std::vector<std::string> errors(n);
  parallel_for(n, c.threads, [&](std::size_t i) {
    Rng rng(derive_seed(c.seed, Stream::replicas, i));
    try {
      samples[i] = sample_field(spec, rng, g);
    } catch (const ClanError& e) {
      errors[i] = e.what();
    }
  });

  const double inner_r = c.schedule.margin < c.schedule.L ? c.schedule.L - c.schedule.margin : c.schedule.L;
  const Window inner = Window::disk({0.0, 0.0}, inner_r);
  r.csv = csv_line({"replica", "contours", "length", "magnetisation_per_area", "accepted", "clan_error"});
  double m_sum = 0.0;
  std::size_t ok = 0;
  for (std::size_t i = 0; i < n; ++i) {
    json rec = header(c, r.config_hash);
    rec["replica"] = i;
    rec["spec"] = field_spec_json(spec);
    rec["window"] = spec.window;
    if (!samples[i]) {
      rec["clan_error"] = errors[i];
      r.records.push_back(std::move(rec));
      r.csv += csv_line({std::to_string(i), "", "", "", "", "1"});
      continue;
    }
    const auto& fs = *samples[i];
    const double m = magnetisation(fs.configuration, inner) / inner.area();
    rec["configuration"] = fs.configuration;
    rec["magnetisation_per_area"] = m;
    rec["diagnostics"] = diagnostics_json(fs.diagnostics);
    r.records.push_back(std::move(rec));
    r.csv += csv_line({std::to_string(i), std::to_string(fs.configuration.contours.size()),
                       fmt(fs.configuration.length()), fmt(m), std::to_string(fs.diagnostics.acceptance.accepted),
                       "0"});
    if (!r.snapshot) r.snapshot = FreeConfiguration{fs.configuration.contours, {}};
    m_sum += m;
    ++ok;
  }
  r.summary = {{"replicas", n},
               {"clan_errors", n - ok},
               {"birth_mass", g.birth_mass->mass},
               {"birth_mass_std_error", g.birth_mass->std_error},
               {"magnetisation_radius", inner_r},
               {"mean_magnetisation_per_area", ok ? m_sum / static_cast<double>(ok) : std::nan("")}};
  finish_summary(r, c, t0);
  return r;
}

RunRecord run_tension_experiment(const ExperimentConfig& c) {
  c.validate();
  const auto t0 = std::chrono::steady_clock::now();
  RunRecord r = start_record(c);
  const double delta = c.tension_delta();
  TensionOptions opts = c.tension.options;
  opts.gibbs = c.gibbs_options();
  const auto& lambdas = c.tension.lambdas;
  std::vector<TensionEstimate> est(lambdas.size());
  parallel_for(lambdas.size(), c.threads, [&](std::size_t k) {
    Rng rng(derive_seed(c.seed, Stream::replicas, k));
    est[k] = estimate_T({0.0, 0.0}, {lambdas[k], 0.0}, delta, c.field.beta, c.tension.mode, rng, opts);
  });
  const TensionFit fit = fit_tension(est);
  r.csv = csv_line({"lambda", "mode", "T_hat", "T_std_error", "tau_lambda", "tau_std_error", "successes", "entries",
                    "cap_hits", "upper_bound_only", "T_upper", "tau_lower"});
  for (std::size_t k = 0; k < est.size(); ++k) {
    const auto& e = est[k];
    json rec = header(c, r.config_hash);
    rec["replica"] = k;
    rec["lambda"] = e.lambda;
    rec["delta"] = e.delta;
    rec["beta"] = e.beta;
    rec["mode"] = to_string(e.mode);
    rec["T_hat"] = e.T_hat;
    rec["T_std_error"] = e.T_std_error;
    rec["tau_lambda"] = e.tau_lambda;
    rec["tau_std_error"] = e.tau_std_error;
    rec["walks"] = e.replicas;
    rec["environments"] = e.environments;
    rec["successes"] = e.successes;
    rec["entries"] = e.entries;
    rec["cap_hits"] = e.cap_hits;
    rec["upper_bound_only"] = e.upper_bound_only;
    rec["T_upper"] = e.T_upper;
    rec["tau_lower"] = e.tau_lower;
    rec["tilt"] = e.tilt;
    rec["homing"] = e.homing;
    r.records.push_back(std::move(rec));
    r.csv += csv_line({fmt(e.lambda), to_string(e.mode), fmt(e.T_hat), fmt(e.T_std_error), fmt(e.tau_lambda),
                       fmt(e.tau_std_error), std::to_string(e.successes), std::to_string(e.entries),
                       std::to_string(e.cap_hits), e.upper_bound_only ? "1" : "0", fmt(e.T_upper),
                       fmt(e.tau_lower)});
  }
  r.summary = {{"fit",
                {{"tau", fit.tau}, {"c", fit.c}, {"tau_std_error", fit.tau_std_error},
                 {"c_std_error", fit.c_std_error}, {"chi2", fit.chi2}, {"points", fit.points},
                 {"residuals", fit.residuals}}},
               {"delta", delta}};
  finish_summary(r, c, t0);
  return r;
}

WulffRun run_wulff_experiment(const ExperimentConfig& c) {
  c.validate();
  const auto t0 = std::chrono::steady_clock::now();
  WulffRun run;
  auto& sm = run.summary;
  const double L = c.schedule.L;
  const double beta = c.field.beta;
  GibbsOptions g = c.gibbs_options();

  if (c.wulff.m_beta) {
    sm.m_beta = *c.wulff.m_beta;
  } else {
    Rng mrng(derive_seed(c.seed, Stream::tilts));
    const auto est = estimate_spontaneous_magnetisation(beta, c.wulff.m_beta_radius, c.wulff.m_beta_replicas, mrng,
                                                        c.schedule.margin, g);
    sm.m_beta = est.estimate;
    sm.m_beta_std_error = est.std_error;
    sm.m_beta_estimated = true;
  }
  if (!(sm.m_beta < 0.0)) throw ConfigError("wulff: magnetisation estimate " + fmt(sm.m_beta) + " is not negative");
  sm.a = c.schedule.a > 0.0 ? c.schedule.a : c.wulff.a_fraction * 2.0 * kPi * std::abs(sm.m_beta);
  if (!(sm.a < 2.0 * kPi * std::abs(sm.m_beta))) throw ConfigError("field 'schedule.a': must lie in (0, 2 pi |M|)");
  sm.alpha = c.schedule.alpha_value();
  sm.h_requested = c.wulff.c_h * sm.a;
  const double h_max = max_area_field(beta, sm.alpha);
  sm.h = std::min(sm.h_requested, h_max);
  sm.h_clipped = sm.h < sm.h_requested;
  sm.target_magnetisation = sm.m_beta * kPi * L * L + sm.a * L * L;

  FieldSpec spec = c.field_spec();
  if (!spec.cutoff) spec.cutoff = Cutoff{sm.alpha, spec.window};
  spec.area_field = AreaField{sm.h, spec.window};
  spec.validate();
  Rng pilot(derive_seed(c.seed, Stream::proposals));
  g.birth_mass = estimate_birth_mass(spec.birth_beta(), spec.window, g.pilot_proposals, pilot, g.proposal);

  const Window disk = spec.window;
  sm.max_magnetisation = -std::numeric_limits<double>::infinity();
  double m_sum = 0.0;
  std::size_t m_count = 0;
  const std::size_t batch = std::max<std::size_t>(c.threads, 1);
  while (sm.proposals < c.wulff.proposal_budget && sm.accepted < c.wulff.target_accepted) {
    if (c.wulff.time_budget > 0.0 && seconds_since(t0) >= c.wulff.time_budget) {
      sm.time_budget_hit = true;
      break;
    }
    const std::size_t first = sm.proposals;
    const std::size_t n = std::min(batch, c.wulff.proposal_budget - first);
    std::vector<std::optional<PolygonalConfiguration>> draws(n);
    parallel_for(n, c.threads, [&](std::size_t k) {
      Rng rng(derive_seed(c.seed, Stream::replicas, first + k));
      try {
        draws[k] = sample_field(spec, rng, g).configuration;
      } catch (const ClanError&) {
      }
    });
    // Results are consumed in proposal order so the outcome does not depend
    // on the thread count.
    for (std::size_t k = 0; k < n && sm.accepted < c.wulff.target_accepted; ++k) {
      ++sm.proposals;
      if (!draws[k]) {
        ++sm.clan_errors;
        continue;
      }
      const double m = magnetisation(*draws[k], disk);
      sm.max_magnetisation = std::max(sm.max_magnetisation, m);
      m_sum += m;
      ++m_count;
      if (m < sm.target_magnetisation) {
        ++sm.rejected_magnetisation;
        continue;
      }
      if (!check_no_boundary_large(*draws[k], sm.alpha, L)) {
        ++sm.rejected_boundary;
        continue;
      }
      ++sm.accepted;
      run.reports.push_back(wulff_report(*draws[k], sm.a, sm.m_beta, L, c.wulff.c_large));
      run.proposal_index.push_back(first + k);
      run.accepted.push_back(std::move(*draws[k]));
    }
  }
  sm.mean_magnetisation = m_count ? m_sum / static_cast<double>(m_count) : std::nan("");
  if (m_count == 0) sm.max_magnetisation = std::nan("");
  sm.acceptance_rate = sm.proposals ? static_cast<double>(sm.accepted) / static_cast<double>(sm.proposals) : 0.0;
  return run;
}

RunRecord wulff_record(const ExperimentConfig& c, const WulffRun& run) {
  RunRecord r = start_record(c);
  const auto& sm = run.summary;
  const Window window = c.window();
  r.csv = csv_line({"proposal", "magnetisation", "target", "n_large", "hausdorff_to_circle", "wulff_radius"});
  for (std::size_t i = 0; i < run.reports.size(); ++i) {
    const auto& w = run.reports[i];
    json rec = header(c, r.config_hash);
    rec["replica"] = run.proposal_index[i];
    rec["window"] = window;
    rec["configuration"] = run.accepted[i];
    rec["magnetisation"] = w.magnetisation;
    rec["target_magnetisation"] = w.target_magnetisation;
    rec["meets_target"] = w.meets_target;
    rec["n_large_contours"] = w.n_large_contours;
    rec["large_threshold"] = w.large_threshold;
    rec["hausdorff_to_circle"] = w.hausdorff_to_circle;
    rec["circle_center"] = w.circle_center;
    rec["wulff_radius"] = w.wulff_radius;
    rec["h"] = sm.h;
    r.records.push_back(std::move(rec));
    r.csv += csv_line({std::to_string(run.proposal_index[i]), fmt(w.magnetisation), fmt(w.target_magnetisation),
                       std::to_string(w.n_large_contours), fmt(w.hausdorff_to_circle), fmt(w.wulff_radius)});
  }
  if (!run.accepted.empty()) r.snapshot = FreeConfiguration{run.accepted.front().contours, {}};
  std::size_t unique = 0;
  for (const auto& w : run.reports) unique += w.n_large_contours == 1 ? 1 : 0;
  r.summary = {{"m_beta", sm.m_beta},
               {"m_beta_std_error", sm.m_beta_std_error},
               {"m_beta_estimated", sm.m_beta_estimated},
               {"a", sm.a},
               {"alpha", sm.alpha},
               {"h_requested", sm.h_requested},
               {"h", sm.h},
               {"h_clipped", sm.h_clipped},
               {"target_magnetisation", sm.target_magnetisation},
               {"wulff_radius", wulff_radius(sm.a, sm.m_beta, c.schedule.L)},
               {"proposals", sm.proposals},
               {"accepted", sm.accepted},
               {"acceptance_rate", sm.acceptance_rate},
               {"rejected_magnetisation", sm.rejected_magnetisation},
               {"rejected_boundary", sm.rejected_boundary},
               {"clan_errors", sm.clan_errors},
               {"max_magnetisation", sm.max_magnetisation},
               {"mean_magnetisation", sm.mean_magnetisation},
               {"time_budget_hit", sm.time_budget_hit},
               {"unique_large_fraction",
                run.reports.empty() ? std::nan("") : static_cast<double>(unique) / static_cast<double>(run.reports.size())}};
  return r;
}

RunRecord run_experiment(const ExperimentConfig& c) {
  switch (c.kind) {
    case ExperimentKind::arak: return run_arak_experiment(c);
    case ExperimentKind::gibbs: return run_gibbs_experiment(c);
    case ExperimentKind::tension: return run_tension_experiment(c);
    case ExperimentKind::wulff: {
      const auto t0 = std::chrono::steady_clock::now();
      RunRecord r = wulff_record(c, run_wulff_experiment(c));
      finish_summary(r, c, t0);
      return r;
    }
  }
  throw ConfigError("unknown experiment kind");
}

RunRecord replay(const std::filesystem::path& config_path, std::uint64_t seed) {
  ExperimentConfig c = load_config(config_path);
  c.seed = seed;
  return run_experiment(c);
}

std::string to_jsonl(const std::vector<json>& records) {
  std::string out;
  for (const auto& r : records) out += r.dump() + "\n";
  return out;
}

namespace {

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  out << text;
}

}  // namespace

void write_outputs(const ExperimentConfig& c, const RunRecord& r) {
  if (!c.output.records.empty()) write_file(c.output.records, to_jsonl(r.records));
  if (!c.output.summary.empty()) write_file(c.output.summary, r.summary.dump(2) + "\n");
  if (!c.output.csv.empty()) write_file(c.output.csv, r.csv);
  if (!c.output.svg.empty()) {
    const Window w = c.kind == ExperimentKind::tension ? Window::disk({0.0, 0.0}, 1.0) : c.window();
    write_file(c.output.svg, render_svg(r.snapshot.value_or(FreeConfiguration{}), w));
  }
}

std::vector<AnalysisRow> analyze_records(const std::vector<json>& records, double alpha, double delta) {
  std::vector<AnalysisRow> rows;
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& rec = records[i];
    if (!rec.contains("configuration") || !rec.contains("window")) continue;
    const Window window = rec.at("window").get<Window>();
    const FreeConfiguration fc = rec.at("configuration").get<FreeConfiguration>();
    const PolygonalConfiguration config{fc.contours};
    AnalysisRow row;
    row.replica = rec.value("replica", i);
    row.magnetisation = magnetisation(config, window);
    const LargeContours large = large_contours(config, alpha, window);
    row.n_large = large.indices.size();
    row.total_large_length = large.total_length;
    row.skeleton_length = row.slack = row.hausdorff = std::nan("");
    if (!large.indices.empty()) {
      std::vector<Contour> gamma;
      for (std::size_t k : large.indices) gamma.push_back(config.contours[k]);
      try {
        // One unit of slack keeps contours touching the window inside the
        // lattice box.
        const double L = norm(window.center()) + window.bounding_radius() + 1.0;
        const Skeleton sk = extract_skeleton(gamma, alpha, delta, L);
        const IsoperimetricReport iso = isoperimetric_check(sk, gamma);
        row.skeleton_length = iso.skeleton_length;
        row.slack = iso.slack;
      } catch (const std::invalid_argument&) {
      }
      if (gamma.size() == 1) {
        row.hausdorff = best_circle_fit(gamma[0], std::sqrt(gamma[0].area() / kPi)).distance;
      }
    }
    rows.push_back(row);
  }
  return rows;
}

std::string analysis_csv(const std::vector<AnalysisRow>& rows) {
  std::string out = csv_line({"replica", "magnetisation", "n_large", "total_large_length", "skeleton_length", "slack",
                              "hausdorff"});
  for (const auto& r : rows) {
    out += csv_line({std::to_string(r.replica), fmt(r.magnetisation), std::to_string(r.n_large),
                     fmt(r.total_large_length), fmt(r.skeleton_length), fmt(r.slack), fmt(r.hausdorff)});
  }
  return out;
}

}  // namespace polyfield
