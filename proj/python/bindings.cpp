#include <pybind11/complex.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "bowen/cli.hpp"
#include "bowen/config.hpp"
#include "bowen/errors.hpp"
#include "bowen/family.hpp"
#include "bowen/geometry.hpp"
#include "bowen/parallel.hpp"
#include "bowen/thermo.hpp"

namespace py = pybind11;
using namespace bowen;

namespace {

using Coeffs = std::vector<Cx>;

// Each generator is either a numerator coefficient list (a polynomial) or a
// (numerator, denominator) pair; coefficients run from the constant term up.
MultiMap maps_from(const py::sequence& gens) {
  std::vector<RationalMap> maps;
  for (const py::handle& g : gens) {
    if (py::isinstance<py::tuple>(g) && py::len(g) == 2) {
      const auto pair = g.cast<std::pair<Coeffs, Coeffs>>();
      maps.emplace_back(Polynomial(pair.first), Polynomial(pair.second));
    } else {
      maps.push_back(RationalMap::polynomial(Polynomial(g.cast<Coeffs>())));
    }
  }
  return MultiMap(std::move(maps));
}

py::object point_obj(const SpherePoint& p) {
  if (p.is_infinity()) return py::float_(INFINITY);
  return py::cast(p.value());
}

py::dict bowen_dict(const BowenResult& r) {
  py::dict d;
  d["delta"] = r.delta;
  d["delta_error"] = r.delta_error();
  d["t_lo"] = r.t_lo;
  d["t_hi"] = r.t_hi;
  d["residual"] = r.residual;
  d["pressure_slope"] = r.pressure_slope;
  d["depth"] = r.depth;
  d["iterations"] = r.iterations;
  d["basepoint"] = point_obj(r.basepoint);
  d["hyperbolic"] = r.hyperbolic ? py::cast(std::string(to_string(*r.hyperbolic))) : py::none();
  return d;
}

py::dict report_dict(const VerificationReport& rep) {
  py::dict d;
  d["verdict"] = std::string(to_string(rep.verdict));
  d["margin"] = rep.margin;
  py::list w;
  for (const auto& x : rep.witnesses) w.append(py::make_tuple(point_obj(x.point), x.detail));
  d["witnesses"] = w;
  return d;
}

py::array_t<Cx> finite_points(const PointCloud& cloud) {
  std::vector<Cx> pts;
  for (const auto& e : cloud.points) {
    if (e.point.is_finite()) pts.push_back(e.point.value());
  }
  py::array_t<Cx> arr(static_cast<py::ssize_t>(pts.size()));
  std::copy(pts.begin(), pts.end(), arr.mutable_data());
  return arr;
}

py::dict sweep_dict(const SweepTable& t) {
  const std::size_t n = t.rows.size();
  py::array_t<Cx> lam(static_cast<py::ssize_t>(n));
  py::array_t<double> delta(static_cast<py::ssize_t>(n)), residual(static_cast<py::ssize_t>(n)),
      error(static_cast<py::ssize_t>(n));
  py::list status;
  for (std::size_t i = 0; i < n; ++i) {
    const SweepRow& r = t.rows[i];
    lam.mutable_data()[i] = r.lambda;
    delta.mutable_data()[i] = r.delta ? *r.delta : NAN;
    residual.mutable_data()[i] = r.pressure_residual;
    error.mutable_data()[i] = r.delta_error;
    status.append(to_string(r.status));
  }
  py::dict d;
  d["shape"] = py::make_tuple(t.grid.im_steps, t.grid.re_steps);
  d["lambda"] = lam;
  d["delta"] = delta;
  d["pressure_residual"] = residual;
  d["delta_error"] = error;
  d["status"] = status;
  return d;
}

}  // namespace

PYBIND11_MODULE(_bowen, m) {
  m.doc() = "Bowen parameters, pressure and Julia sets of finitely generated rational semigroups";

  static py::exception<Error> base(m, "Error", PyExc_RuntimeError);
  py::register_exception<ConfigError>(m, "ConfigError", base.ptr());
  py::register_exception<InvalidMap>(m, "InvalidMap", base.ptr());
  py::register_exception<NoRepellingSeed>(m, "NoRepellingSeed", base.ptr());
  py::register_exception<NoSignChange>(m, "NoSignChange", base.ptr());
  py::register_exception<CriticalPreimage>(m, "CriticalPreimage", base.ptr());
  py::register_exception<NotHyperbolic>(m, "NotHyperbolic", base.ptr());
  py::register_exception<InsufficientPoints>(m, "InsufficientPoints", base.ptr());
  py::register_exception<InvalidInstance>(m, "InvalidInstance", base.ptr());
  py::register_exception<NonConvergence>(m, "NonConvergence", base.ptr());

  py::class_<RunConfig>(m, "Config")
      .def_static("load", &load_config, py::arg("path"))
      .def_static("parse", &parse_config, py::arg("text"))
      .def("to_json", &emit_config)
      .def_readwrite("rng_seed", &RunConfig::rng_seed)
      .def_readwrite("t_values", &RunConfig::t_values)
      .def_readwrite("lam", &RunConfig::lambda)
      .def("__eq__", [](const RunConfig& a, const RunConfig& b) { return a == b; })
      .def("__repr__", [](const RunConfig& c) { return "Config(" + emit_config(c) + ")"; });

  m.def("set_threads", [](unsigned n) { set_thread_count(n); }, py::arg("n"),
        "Worker threads for parallel loops; 0 uses every core.");
  m.def("threads", &thread_count);

  m.def(
      "bowen_parameter",
      [](const py::sequence& gens, int depth, std::size_t cap, std::uint64_t seed, bool force) {
        BowenConfig cfg;
        cfg.pressure.depth = depth;
        cfg.pressure.cap = cap;
        cfg.pressure.rng_seed = seed;
        cfg.force = force;
        const MultiMap mm = maps_from(gens);
        BowenResult r;
        {
          py::gil_scoped_release release;
          r = bowen_parameter(mm, cfg);
        }
        return bowen_dict(r);
      },
      py::arg("generators"), py::arg("depth") = 10, py::arg("cap") = kDefaultCap, py::arg("seed") = 0,
      py::arg("force") = false);
  m.def("bowen_parameter", [](const RunConfig& c) {
    const MultiMap mm = make_multimap(c);
    BowenResult r;
    {
      py::gil_scoped_release release;
      r = bowen_parameter(mm, make_bowen_config(c));
    }
    return bowen_dict(r);
  });

  m.def(
      "pressure",
      [](const py::sequence& gens, double t, int depth, std::optional<Cx> basepoint, std::size_t cap,
         std::uint64_t seed) {
        const MultiMap mm = maps_from(gens);
        PressureConfig cfg;
        cfg.depth = depth;
        cfg.cap = cap;
        cfg.rng_seed = seed;
        PressureEstimate est;
        {
          py::gil_scoped_release release;
          const SpherePoint z = basepoint ? SpherePoint::finite(*basepoint) : select_seed(mm).point;
          est = pressure(mm, t, z, cfg);
        }
        py::dict d;
        d["value"] = est.value;
        d["residual"] = est.residual;
        d["depth"] = est.depth;
        return d;
      },
      py::arg("generators"), py::arg("t"), py::arg("depth") = 10, py::arg("basepoint") = py::none(),
      py::arg("cap") = kDefaultCap, py::arg("seed") = 0);

  m.def(
      "lyapunov_and_entropy",
      [](const py::sequence& gens, double t, double h) {
        const MultiMap mm = maps_from(gens);
        SpectrumDiagnostics s;
        {
          py::gil_scoped_release release;
          s = lyapunov_and_entropy(mm, t, h);
        }
        py::dict d;
        d["lyapunov"] = s.lyapunov;
        d["entropy"] = s.entropy;
        d["pressure"] = s.pressure;
        d["depth"] = s.depth;
        return d;
      },
      py::arg("generators"), py::arg("t"), py::arg("h") = 1e-3);

  m.def(
      "julia_cloud",
      [](const py::sequence& gens, int depth, std::size_t cap, std::uint64_t seed) {
        const MultiMap mm = maps_from(gens);
        PointCloud cloud;
        {
          py::gil_scoped_release release;
          cloud = julia_backward_cloud(mm, depth, cap, seed);
        }
        return finite_points(cloud);
      },
      py::arg("generators"), py::arg("depth") = 12, py::arg("cap") = kDefaultCap, py::arg("seed") = 0,
      "Finite points of the backward-orbit Julia cloud as a complex array.");

  m.def(
      "box_dimension",
      [](const std::vector<Cx>& points, int scales, std::optional<std::array<double, 4>> viewport) {
        std::optional<Rect> vp;
        if (viewport) vp = Rect{(*viewport)[0], (*viewport)[1], (*viewport)[2], (*viewport)[3]};
        BoxCountResult r;
        {
          py::gil_scoped_release release;
          r = box_dimension(points, scales, vp);
        }
        py::dict d;
        d["slope"] = r.slope;
        d["r_squared"] = r.r_squared;
        d["scales"] = r.scales;
        d["counts"] = r.counts;
        return d;
      },
      py::arg("points"), py::arg("scales") = 6, py::arg("viewport") = py::none(),
      "viewport is (xmin, xmax, ymin, ymax).");

  m.def("osc_check", [](const RunConfig& c) {
    if (!c.region) throw ConfigError("osc_check needs a region in the config");
    const MultiMap mm = make_multimap(c);
    const Region u(*c.region);
    VerificationReport rep;
    {
      py::gil_scoped_release release;
      rep = osc_check(mm, u, c.osc);
    }
    return report_dict(rep);
  });

  m.def(
      "check_hyperbolic",
      [](const py::sequence& gens, int depth) {
        const MultiMap mm = maps_from(gens);
        VerificationReport rep;
        {
          py::gil_scoped_release release;
          rep = check_hyperbolic(mm, depth);
        }
        return report_dict(rep);
      },
      py::arg("generators"), py::arg("depth") = 10);

  m.def("sweep", [](const RunConfig& c) {
    if (!c.family || !c.grid) throw ConfigError("sweep needs 'family' and 'grid' in the config");
    const FamilySpec fam = make_family(*c.family);
    SweepTable t;
    SubmeanReport sm;
    {
      py::gil_scoped_release release;
      t = sweep_delta(fam, *c.grid, make_bowen_config(c));
      sm = submean_diagnostic(t, c.sweep.submean_radius, c.sweep.tol_sub);
    }
    py::dict d = sweep_dict(t);
    py::dict s;
    s["passed"] = sm.passed;
    s["tol_sub"] = sm.tol_sub;
    s["worst_sub"] = sm.worst_sub;
    s["worst_super"] = sm.worst_super;
    s["violations"] = sm.violations;
    s["points_checked"] = sm.points_checked;
    d["submean"] = s;
    return d;
  });

  m.def(
      "run_cli",
      [](const std::vector<std::string>& args) {
        std::vector<std::string> full = {"bowen"};
        full.insert(full.end(), args.begin(), args.end());
        std::vector<const char*> argv;
        for (const auto& a : full) argv.push_back(a.c_str());
        std::ostringstream out, err;
        int code;
        {
          py::gil_scoped_release release;
          code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
        }
        return py::make_tuple(code, out.str(), err.str());
      },
      py::arg("args"), "Run a CLI command in-process; returns (exit_code, stdout, stderr).");
}
