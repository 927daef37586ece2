#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cstring>

#include "commands.hpp"
#include "config.hpp"
#include "geoldp/errors.hpp"
#include "geoldp/harness.hpp"
#include "geoldp/persistence2d.hpp"
#include "geoldp/rates.hpp"

namespace py = pybind11;
using namespace geoldp;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

PointCloud to_cloud(const Array& points, const RegimeParams& regime) {
  if (points.ndim() != 2) throw DomainError("points must be a 2-d array");
  PointCloud cloud;
  cloud.d = static_cast<int>(points.shape(1));
  cloud.regime = regime;
  cloud.coords.assign(points.data(), points.data() + points.size());
  return cloud;
}

Array to_array(const PointCloud& cloud) {
  Array out({static_cast<py::ssize_t>(cloud.size()), static_cast<py::ssize_t>(cloud.d)});
  if (!cloud.coords.empty()) std::memcpy(out.mutable_data(), cloud.coords.data(), cloud.coords.size() * sizeof(double));
  return out;
}

ScoreSpec spec_from_dict(const py::dict& d) {
  return cli::parse_config(nlohmann::json::parse(
                               py::module_::import("json").attr("dumps")(py::dict(py::arg("score") = d)).cast<std::string>()))
      .plan.score;
}

cli::Config config_from(const py::object& obj) {
  const std::string text = py::module_::import("json").attr("dumps")(obj).cast<std::string>();
  return cli::parse_config(nlohmann::json::parse(text));
}

py::dict summary_dict(const RegimeSummary& s) {
  py::dict d;
  d["n"] = s.n;
  d["rho"] = s.rho;
  d["r"] = s.r;
  d["replicates"] = s.replicates;
  d["mean"] = s.mean;
  d["stderr"] = s.stderr_;
  d["hits"] = s.tail.hits;
  d["p_hat"] = s.tail.p_hat;
  d["ci"] = py::make_tuple(s.tail.ci.lo, s.tail.ci.hi);
  d["under_resolved"] = s.tail.under_resolved;
  d["invariant_failures"] = s.invariant_failures;
  return d;
}

std::vector<Vec2> planar(const Array& points) {
  if (points.ndim() != 2 || points.shape(1) != 2) throw DomainError("points must have shape (n, 2)");
  std::vector<Vec2> out(points.shape(0));
  for (py::ssize_t i = 0; i < points.shape(0); ++i) out[i] = {points.at(i, 0), points.at(i, 1)};
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Sparse geometric functionals: sampling, statistics, persistence and rate functions";

  auto domain = py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);
  py::register_exception<SparsityViolation>(m, "SparsityViolation", domain.ptr());
  py::register_exception<DegenerateTriple>(m, "DegenerateTriple", domain.ptr());
  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<NonConvergence>(m, "NonConvergence", PyExc_ArithmeticError);
  py::register_exception<SingularScore>(m, "SingularScore", PyExc_ArithmeticError);
  py::register_exception<InsufficientData>(m, "InsufficientData", PyExc_RuntimeError);

  py::class_<RegimeParams>(m, "Regime")
      .def_readonly("d", &RegimeParams::d)
      .def_readonly("k", &RegimeParams::k)
      .def_readonly("n", &RegimeParams::n)
      .def_readonly("rho", &RegimeParams::rho)
      .def_readonly("r", &RegimeParams::r)
      .def_readonly("sparsity", &RegimeParams::sparsity)
      .def("__repr__", [](const RegimeParams& p) {
        return "Regime(d=" + std::to_string(p.d) + ", k=" + std::to_string(p.k) + ", n=" + std::to_string(p.n) +
               ", rho=" + std::to_string(p.rho) + ", r=" + std::to_string(p.r) + ")";
      });

  m.def("make_regime", &make_regime, py::arg("d"), py::arg("k"), py::arg("n"), py::arg("rho"),
        py::arg("eps_sparse") = kDefaultSparsityGuard);
  m.def("rho_from_radius", &rho_from_radius, py::arg("d"), py::arg("k"), py::arg("n"), py::arg("r"));

  m.def(
      "sample", [](const RegimeParams& regime, std::uint64_t seed, const std::string& process) {
        if (process != "poisson" && process != "binomial") throw DomainError("process must be poisson or binomial");
        return to_array(sample(process == "poisson" ? ProcessKind::poisson : ProcessKind::binomial, regime, seed));
      },
      py::arg("regime"), py::arg("seed"), py::arg("process") = "poisson", "Points in the unit cube, shape (N, d).");

  m.def(
      "compute_T",
      [](const Array& points, const RegimeParams& regime, const py::dict& score) {
        const PointCloud cloud = to_cloud(points, regime);
        return compute_T(cloud, make_score(spec_from_dict(score))).values;
      },
      py::arg("points"), py::arg("regime"), py::arg("score"),
      "Score statistic vector; `score` uses the same keys as the configuration file.");

  m.def(
      "compute_morse",
      [](const Array& points, const RegimeParams& regime, const std::vector<double>& thresholds) {
        return compute_morse(to_cloud(points, regime), thresholds).values;
      },
      py::arg("points"), py::arg("regime"), py::arg("thresholds"));

  m.def(
      "persistence_diagram",
      [](const Array& points, double scale) {
        const auto pts = planar(points);
        const PersistenceDiagram dgm = persistence_diagram(alpha_filtration(delaunay(pts), scale));
        std::vector<std::tuple<int, double, double>> out;
        for (const auto& p : dgm.pairs) out.emplace_back(p.dim, p.birth, p.death);
        return out;
      },
      py::arg("points"), py::arg("scale") = 1.0, "List of (dim, birth, death) in units of `scale`.");

  m.def(
      "persistent_betti_1",
      [](const Array& points, double scale, double s, double t) {
        return persistent_betti_1(alpha_filtration(delaunay(planar(points)), scale), s, t);
      },
      py::arg("points"), py::arg("scale"), py::arg("s"), py::arg("t"));

  m.def(
      "score_law",
      [](const py::dict& score, std::uint64_t samples, std::uint64_t seed, int workers) {
        const ScoreLaw law = estimate_score_law(make_score(spec_from_dict(score)), samples, seed, workers);
        py::dict atoms;
        for (const auto& [pattern, a] : law.atoms) atoms[py::int_(pattern)] = py::make_tuple(a.mass, a.stderr_);
        return py::make_tuple(atoms, mu_vector(law));
      },
      py::arg("score"), py::arg("samples"), py::arg("seed") = 1, py::arg("workers") = 1,
      "Returns ({pattern: (mass, stderr)}, mu).");

  m.def(
      "rate",
      [](const std::map<std::uint32_t, double>& masses, int m_components, const Eigen::VectorXd& x) {
        return rate_I(make_score_law(m_components, masses), x).value;
      },
      py::arg("masses"), py::arg("m"), py::arg("x"), "Rate function of a discrete score law given by pattern masses.");
  m.def("rate_poisson_closed_form", &rate_I_poisson_closed_form, py::arg("mu"), py::arg("x"));

  m.def(
      "run_experiment",
      [](const py::object& config) {
        const cli::Config c = config_from(config);
        validate_plan(c.plan);
        py::gil_scoped_release release;
        auto rows = run_experiment(c.plan);
        py::gil_scoped_acquire acquire;
        py::list out;
        for (const auto& r : rows) out.append(summary_dict(r));
        return out;
      },
      py::arg("config"), "Runs a configuration dictionary and returns one summary per grid point.");
}
