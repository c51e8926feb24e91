#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "polyfield/arak.hpp"
#include "polyfield/free_ensembles.hpp"
#include "polyfield/gibbs.hpp"
#include "polyfield/harness.hpp"
#include "polyfield/observables.hpp"
#include "polyfield/serialize.hpp"
#include "polyfield/skeleton.hpp"
#include "polyfield/surface_tension.hpp"

namespace py = pybind11;
using namespace polyfield;

namespace {

using Point = std::pair<double, double>;

std::vector<Vec2> to_vec(const std::vector<Point>& pts) {
  std::vector<Vec2> v;
  v.reserve(pts.size());
  for (auto [x, y] : pts) v.push_back({x, y});
  return v;
}

std::vector<Point> to_points(const std::vector<Vec2>& v) {
  std::vector<Point> pts;
  pts.reserve(v.size());
  for (Vec2 p : v) pts.emplace_back(p.x, p.y);
  return pts;
}

}  // namespace

PYBIND11_MODULE(_polyfield, m) {
  m.doc() = "Polygonal Markov field sampling and experiments";

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<ClanError>(m, "ClanError", PyExc_RuntimeError);

  py::class_<Rng>(m, "Rng")
      .def(py::init<std::uint64_t>(), py::arg("seed"))
      .def("uniform", py::overload_cast<>(&Rng::uniform));

  py::class_<Window>(m, "Window")
      .def_static("disk", [](Point c, double r) { return Window::disk({c.first, c.second}, r); }, py::arg("center"),
                  py::arg("radius"))
      .def_static("square", [](Point c, double s) { return Window::square({c.first, c.second}, s); },
                  py::arg("center"), py::arg("side"))
      .def_static("polygon", [](const std::vector<Point>& v) { return Window::polygon(to_vec(v)); },
                  py::arg("vertices"))
      .def_property_readonly("area", &Window::area)
      .def_property_readonly("perimeter", &Window::perimeter)
      .def("contains", [](const Window& w, Point p) { return w.contains({p.first, p.second}); });

  py::class_<Contour>(m, "Contour")
      .def(py::init([](const std::vector<Point>& v) { return Contour(to_vec(v)); }), py::arg("vertices"))
      .def_property_readonly("vertices", [](const Contour& c) { return to_points(c.vertices()); })
      .def_property_readonly("length", &Contour::length)
      .def_property_readonly("area", &Contour::area)
      .def_property_readonly("diameter", &Contour::diameter)
      .def("__len__", &Contour::size);

  py::class_<Line>(m, "Line")
      .def_readonly("phi", &Line::phi)
      .def_readonly("rho", &Line::rho)
      .def("__repr__", [](const Line& l) { return "Line(phi=" + std::to_string(l.phi) + ", rho=" + std::to_string(l.rho) + ")"; });

  m.def("sample_poisson_lines", &sample_poisson_lines, py::arg("region"), py::arg("rng"));
  m.def("sample_typical_angle", &sample_typical_angle, py::arg("rng"));

  m.def(
      "run_arak",
      [](const Window& w, Rng& rng) {
        const auto res = run_arak(w, rng);
        std::vector<std::vector<Point>> chains;
        for (const auto& c : res.configuration.chains) chains.push_back(to_points(c.vertices));
        return py::make_tuple(res.configuration.contours, chains);
      },
      py::arg("window"), py::arg("rng"), "Free-boundary field in a convex window: (contours, chains).");

  m.def(
      "partition_function",
      [](const Window& w, bool free_boundary, std::size_t replicas, Rng& rng) {
        const auto e =
            estimate_partition_function(w, free_boundary ? BoundaryMode::free : BoundaryMode::empty, replicas, rng);
        return py::make_tuple(e.estimate, e.std_error);
      },
      py::arg("window"), py::arg("free_boundary"), py::arg("replicas"), py::arg("rng"));

  m.def(
      "sample_field",
      [](double beta, const Window& window, Rng& rng, double horizon, std::size_t pilot_proposals) {
        FieldSpec spec;
        spec.beta = beta;
        spec.window = window;
        GibbsOptions opts;
        opts.horizon = horizon;
        opts.pilot_proposals = pilot_proposals;
        return sample_field(spec, rng, opts).configuration.contours;
      },
      py::arg("beta"), py::arg("window"), py::arg("rng"), py::arg("horizon") = 20.0,
      py::arg("pilot_proposals") = 20000, "One draw of the length-interacting field.");

  m.def(
      "magnetisation",
      [](const std::vector<Contour>& contours, const Window& U) { return magnetisation({contours}, U); },
      py::arg("contours"), py::arg("region"));
  m.def("wulff_radius", &wulff_radius, py::arg("a"), py::arg("m_beta"), py::arg("L"));

  m.def(
      "skeleton",
      [](const std::vector<Contour>& gamma, double alpha, double delta, double L) {
        const Skeleton sk = extract_skeleton(gamma, alpha, delta, L);
        const auto verdict = verify_skeleton(sk, gamma);
        const auto iso = isoperimetric_check(sk, gamma);
        py::list segments;
        for (const auto& s : sk.segments) {
          segments.append(py::make_tuple(Point{s.I.x, s.I.y}, Point{s.E.x, s.E.y}, s.contour));
        }
        py::dict d;
        d["segments"] = segments;
        d["length"] = sk.length();
        d["verified"] = verdict.ok();
        d["failure"] = verdict.failure;
        d["slack"] = iso.slack;
        d["budget"] = iso.budget;
        return d;
      },
      py::arg("contours"), py::arg("alpha"), py::arg("delta"), py::arg("L"));

  m.def(
      "estimate_T",
      [](double lambda, double delta, double beta, const std::string& mode, std::uint64_t seed, std::size_t replicas,
         bool environment) {
        const auto md = parse_tension_mode(mode);
        if (!md) throw py::value_error("mode must be 'infinite' or 'finite'");
        TensionOptions o;
        o.replicas = replicas;
        o.environment = environment;
        Rng rng(seed);
        const auto e = estimate_T({0, 0}, {lambda, 0}, delta, beta, *md, rng, o);
        py::dict d;
        d["T_hat"] = e.T_hat;
        d["T_std_error"] = e.T_std_error;
        d["tau_lambda"] = e.tau_lambda;
        d["tau_std_error"] = e.tau_std_error;
        d["successes"] = e.successes;
        return d;
      },
      py::arg("lambda_"), py::arg("delta"), py::arg("beta"), py::arg("mode") = "infinite", py::arg("seed") = 1,
      py::arg("replicas") = 20000, py::arg("environment") = true);

  m.def(
      "run_config_json",
      [](const std::string& text) {
        const ExperimentConfig c = parse_config(text);
        const RunRecord r = [&] {
          py::gil_scoped_release release;
          return run_experiment(c);
        }();
        return py::make_tuple(to_jsonl(r.records), r.summary.dump(), r.csv);
      },
      py::arg("config_text"), "Run a JSON config: (records JSONL, summary JSON, CSV).");
  m.def(
      "config_hash", [](const std::string& text) { return config_hash(parse_config(text)); }, py::arg("config_text"));
  m.def("build_id", &build_id);
  m.def(
      "render_svg",
      [](const std::vector<Contour>& contours, const Window& w) { return render_svg(PolygonalConfiguration{contours}, w); },
      py::arg("contours"), py::arg("window"));
}
