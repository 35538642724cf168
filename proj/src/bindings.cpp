#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "chemolimit/config.hpp"
#include "chemolimit/diagnostics.hpp"
#include "chemolimit/dynamics.hpp"
#include "chemolimit/experiments.hpp"
#include "chemolimit/operators.hpp"

namespace py = pybind11;
using namespace chemo;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;
// pybind11 holders must be non-const; grids are never mutated after construction.
using PyGrid = std::shared_ptr<Grid>;

template <class... Args>
auto factory(GridPtr (*make)(Args...)) {
  return [make](Args... args) { return std::const_pointer_cast<Grid>(make(args...)); };
}

Field to_field(const GridPtr& grid, const Array& a) {
  if (a.ndim() != 1) throw InvalidArgument("expected a one-dimensional array of node values");
  const double* p = a.data();
  return Field(grid, std::vector<double>(p, p + a.size()));
}

Array to_array(const Field& f) {
  Array out(static_cast<py::ssize_t>(f.size()));
  std::copy(f.data().begin(), f.data().end(), out.mutable_data());
  return out;
}

Array coordinates(const Grid& g, bool y) {
  Array out(static_cast<py::ssize_t>(g.size()));
  double* p = out.mutable_data();
  for (std::size_t k = 0; k < g.size(); ++k) p[k] = y ? g.y(k) : g.x(k);
  return out;
}

py::dict report_dict(const RateReport& r) {
  py::dict metrics;
  for (const MetricSeries& m : r.metrics) {
    py::dict d;
    d["values"] = m.values;
    d["in_fit"] = m.in_fit;
    d["fitted"] = m.fitted;
    if (m.fit) {
      d["slope"] = m.fit->slope;
      d["stderr"] = m.fit->stderr_;
    } else {
      d["slope"] = py::none();
      d["stderr"] = py::none();
    }
    d["fit_error"] = m.fit_error;
    metrics[py::str(m.name)] = d;
  }
  py::dict out;
  out["abscissa_name"] = r.abscissa_name;
  out["abscissae"] = r.abscissae;
  out["metrics"] = metrics;
  out["failures"] = r.failures;
  out["mass"] = r.mass;
  out["mass_hypothesis_violated"] = r.mass_hypothesis_violated;
  out["w_plateau"] = r.abscissa_name == "eps" ? py::cast(r.w_plateau()) : py::none();
  std::ostringstream csv;
  write_csv(r, csv);
  out["csv"] = csv.str();
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Relaxation-limit solvers for an indirect-signalling chemotaxis system.";

  auto error = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<InvalidArgument>(m, "InvalidArgument", error.ptr());
  py::register_exception<NumericalError>(m, "NumericalError", error.ptr());
  py::register_exception<SimulationError>(m, "SimulationError", error.ptr());
  py::register_exception<FitRejected>(m, "FitRejected", error.ptr());
  py::register_exception<ConfigError>(m, "ConfigError", error.ptr());

  py::class_<Grid, PyGrid>(m, "Grid")
      .def_static("interval", factory(&Grid::interval), py::arg("length"), py::arg("nodes"))
      .def_static("rectangle", factory(&Grid::rectangle), py::arg("length_x"), py::arg("length_y"), py::arg("nodes_x"),
                  py::arg("nodes_y"))
      .def_static("radial_ball", factory(&Grid::radial_ball), py::arg("dimension"), py::arg("radius"), py::arg("nodes"))
      .def_property_readonly("size", &Grid::size)
      .def_property_readonly("dimension", &Grid::dimension)
      .def_property_readonly("nodes_x", &Grid::nodes_x)
      .def_property_readonly("nodes_y", &Grid::nodes_y)
      .def_property_readonly("spacing_x", &Grid::spacing_x)
      .def_property_readonly("total_volume", &Grid::total_volume)
      .def_property_readonly("x", [](const Grid& g) { return coordinates(g, false); })
      .def_property_readonly("y", [](const Grid& g) { return coordinates(g, true); })
      .def_property_readonly("volumes", [](const Grid& g) {
        Array out(static_cast<py::ssize_t>(g.size()));
        std::copy(g.volumes().begin(), g.volumes().end(), out.mutable_data());
        return out;
      })
      .def("__repr__", &Grid::describe);

  m.def("integrate", [](const PyGrid& g, const Array& f) { return integrate(to_field(g, f)); });
  m.def("norm_lp", [](const PyGrid& g, const Array& f, double p) { return norm_lp(to_field(g, f), p); },
        py::arg("grid"), py::arg("values"), py::arg("p") = 2.0);
  m.def("norm_sobolev",
        [](const PyGrid& g, const Array& f, int k, double p) { return norm_sobolev(to_field(g, f), k, p); },
        py::arg("grid"), py::arg("values"), py::arg("k"), py::arg("p") = 2.0);
  m.def("laplacian", [](const PyGrid& g, const Array& f) { return to_array(laplacian(to_field(g, f))); });
  m.def("chemotaxis_divergence", [](const PyGrid& g, const Array& n, const Array& c) {
    return to_array(chemotaxis_divergence(to_field(g, n), to_field(g, c)));
  });
  m.def("elliptic_solve",
        [](const PyGrid& g, double a, const Array& f) { return to_array(elliptic_solve(a, to_field(g, f))); },
        py::arg("grid"), py::arg("a"), py::arg("values"), "Solve (-a Lap + I) u = f with Neumann data.");
  m.def("heat_semigroup",
        [](const PyGrid& g, const Array& f, double t, double a, int substeps) {
          return to_array(heat_semigroup(to_field(g, f), t, a, substeps));
        },
        py::arg("grid"), py::arg("values"), py::arg("t"), py::arg("a") = 1.0, py::arg("substeps") = 100);

  py::class_<Full>(m, "Full")
      .def(py::init<double, double>(), py::arg("eps"), py::arg("tau"))
      .def_readonly("eps", &Full::eps)
      .def_readonly("tau", &Full::tau);
  py::class_<PesLimit>(m, "PesLimit").def(py::init<double>(), py::arg("tau")).def_readonly("tau", &PesLimit::tau);
  py::class_<IdsLimit>(m, "IdsLimit").def(py::init<>());

  m.def(
      "simulate",
      [](const PyGrid& g, const Regime& regime, double dt, double t_end, const Array& n0, const Array& c0,
         const Array& w0, std::size_t stride) {
        State init{0.0, to_field(g, n0), to_field(g, c0), to_field(g, w0)};
        std::vector<double> times, masses, energies;
        std::vector<State> samples;
        const double tau = std::holds_alternative<Full>(regime)       ? std::get<Full>(regime).tau
                           : std::holds_alternative<PesLimit>(regime) ? std::get<PesLimit>(regime).tau
                                                                      : 0.0;
        Observer obs{stride, [&](const State& s, const State*) {
                       times.push_back(s.t);
                       masses.push_back(mass(s));
                       energies.push_back(lyapunov(s, tau));
                       samples.push_back(s);
                     }};
        {
          py::gil_scoped_release release;
          simulate(ModelParams{regime, dt, t_end}, init, {obs});
        }
        py::list ns, cs, ws;
        for (const State& s : samples) {
          ns.append(to_array(s.n));
          cs.append(to_array(s.c));
          ws.append(to_array(s.w));
        }
        py::dict out;
        out["t"] = times;
        out["mass"] = masses;
        out["energy"] = energies;
        out["n"] = ns;
        out["c"] = cs;
        out["w"] = ws;
        return out;
      },
      py::arg("grid"), py::arg("regime"), py::arg("dt"), py::arg("t_end"), py::arg("n0"), py::arg("c0"), py::arg("w0"),
      py::arg("stride") = 1, "Run one trajectory; returns samples every `stride` steps and at the end.");

  m.def(
      "fit_rate",
      [](const std::vector<double>& xs, const std::vector<double>& es) {
        const FitResult f = fit_rate(xs, es);
        return py::make_tuple(f.slope, f.intercept, f.stderr_);
      },
      py::arg("xs"), py::arg("es"), "Least-squares slope, intercept and slope stderr in log-log coordinates.");

  m.def(
      "run_sweep",
      [](const std::string& config_path, std::optional<unsigned> threads) {
        RunConfig cfg = load_run_config(config_path);
        if (!cfg.has_sweep) throw ConfigError("sweep", "missing [sweep] section");
        if (threads) cfg.sweep.threads = *threads;
        RateReport report;
        {
          py::gil_scoped_release release;
          report = cfg.sweep.is_pes() ? run_pes_sweep(cfg.sweep) : run_ids_sweep(cfg.sweep);
        }
        return report_dict(report);
      },
      py::arg("config_path"), py::arg("threads") = py::none(), "Run the sweep described by a config file.");

  m.attr("CSV_HEADER") = kCsvHeader;
  m.attr("CSV_SLOPE_HEADER") = kCsvSlopeHeader;
}
