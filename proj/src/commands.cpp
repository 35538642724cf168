#include "chemolimit/commands.hpp"

#include <charconv>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "chemolimit/config.hpp"
#include "chemolimit/diagnostics.hpp"
#include "chemolimit/dynamics.hpp"
#include "chemolimit/experiments.hpp"
#include "chemolimit/operators.hpp"

namespace chemo::cli {

namespace {

namespace fs = std::filesystem;

RunConfig load(const CommandOptions& opts) {
  if (opts.config_path.empty()) throw ConfigError("--config", "a config file is required");
  if (!fs::exists(opts.config_path)) throw ConfigError(opts.config_path, "config file not found");
  RunConfig cfg = load_run_config(opts.config_path);
  if (opts.out_dir) cfg.out_dir = *opts.out_dir;
  if (opts.seed) cfg.seed = *opts.seed;
  cfg.sweep.threads = resolve_threads(opts.threads, cfg.sweep.threads);
  return cfg;
}

fs::path prepare_out_dir(const std::string& dir) {
  fs::path p(dir);
  std::error_code ec;
  fs::create_directories(p, ec);
  if (ec) throw ConfigError("output.dir", "cannot create '" + dir + "': " + ec.message());
  return p;
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open '" + path.string() + "' for writing");
  out << content;
  if (!out.flush()) throw Error("failed writing '" + path.string() + "'");
}

// (eps, tau) used for the energy of a single run; eps = 0 marks a limit regime.
std::pair<double, double> energy_parameters(const Regime& regime) {
  if (const auto* f = std::get_if<Full>(&regime)) return {f->eps, f->tau};
  if (const auto* p = std::get_if<PesLimit>(&regime)) return {0.0, p->tau};
  return {0.0, 0.0};
}

// Runs `body`, mapping library errors onto exit codes.
template <class F>
int guarded(std::ostream& err, F&& body) {
  try {
    return body();
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const FitRejected& e) {
    err << "fit rejected: " << e.what() << '\n';
    return kFitRejected;
  } catch (const SimulationError& e) {
    err << "trajectory failed at t=" << format_double(e.time()) << ": " << e.what() << '\n';
    return kTrajectoryFailed;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kFailure;
  }
}

void print_report(const RateReport& report, std::ostream& out) {
  out << "metric               slope      stderr     points\n";
  for (const MetricSeries& m : report.metrics) {
    if (!m.fitted) continue;
    out << std::left << std::setw(20) << m.name << ' ';
    if (m.fit) {
      out << std::setw(10) << std::setprecision(4) << m.fit->slope << ' ' << std::setw(10) << m.fit->stderr_ << ' '
          << m.fit_points() << '\n';
    } else {
      out << "rejected: " << m.fit_error << '\n';
    }
  }
  for (std::size_t i = 0; i < report.failures.size(); ++i) {
    if (!report.failures[i].empty()) {
      out << report.abscissa_name << '=' << report.abscissae[i] << " failed: " << report.failures[i] << '\n';
    }
  }
  if (report.mass_hypothesis_violated) out << "mass hypothesis: VIOLATED (" << report.mass_note << ")\n";
}

int run_rates(const CommandOptions& opts, std::ostream& out, std::ostream& err, bool pes) {
  return guarded(err, [&] {
    RunConfig cfg = load(opts);
    if (!cfg.has_sweep) throw ConfigError("sweep", "missing [sweep] section");
    if (cfg.sweep.is_pes() != pes) throw ConfigError("sweep.kind", pes ? "expected 'pes'" : "expected 'ids'");
    const RateReport report = pes ? run_pes_sweep(cfg.sweep) : run_ids_sweep(cfg.sweep);
    const fs::path dir = prepare_out_dir(cfg.out_dir);
    const fs::path csv = dir / (pes ? "pes_rates.csv" : "ids_rates.csv");
    emit_csv(report, csv.string());
    print_report(report, out);
    if (pes) out << "w plateau: " << (report.w_plateau() ? "yes" : "no") << '\n';
    out << "wrote " << csv.string() << '\n';
    return report.all_fits_ok() ? kOk : kFitRejected;
  });
}

// Mean energy-identity defect along one Full trajectory.
struct EnergyRun {
  double mean_defect = 0.0;
  double max_increase = 0.0;
  double e0 = 0.0;
  std::vector<EnergyRecord> records;
};

EnergyRun energy_run(const RunConfig& cfg, const GridPtr& grid, const Full& full, double dt) {
  ModelParams params{full, dt, cfg.sweep.t_end};
  const State init = single_run_initial_state(cfg, grid);
  EnergyRun run;
  double sum = 0.0;
  std::size_t count = 0;
  double last_e = lyapunov(init, full.tau);
  run.e0 = last_e;
  Observer obs{1, [&](const State& s, const State* prev) {
                 const double e = lyapunov(s, full.tau);
                 if (prev) {
                   sum += energy_identity_defect(*prev, s, full.eps, full.tau);
                   ++count;
                   run.max_increase = std::max(run.max_increase, e - last_e);
                 }
                 last_e = e;
                 run.records.push_back({s.t, e, dissipation(s, full.eps, full.tau)});
               }};
  simulate(params, init, {obs});
  run.mean_defect = count ? sum / static_cast<double>(count) : 0.0;
  return run;
}

std::string energy_csv(const std::vector<EnergyRecord>& records, const std::vector<double>& masses) {
  std::ostringstream os;
  os << "t,E,D,mass\n";
  for (std::size_t i = 0; i < records.size(); ++i) {
    os << format_double(records[i].t) << ',' << format_double(records[i].E) << ',' << format_double(records[i].D)
       << ',' << format_double(i < masses.size() ? masses[i] : std::nan("")) << '\n';
  }
  return os.str();
}

}  // namespace

unsigned resolve_threads(const std::optional<unsigned>& flag, unsigned fallback) {
  if (flag) return std::max(1u, *flag);
  if (const char* env = std::getenv("CHEMO_LIMIT_THREADS")) {
    unsigned v = 0;
    const std::string s(env);
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec == std::errc() && res.ptr == s.data() + s.size() && v > 0) return v;
    throw ConfigError("CHEMO_LIMIT_THREADS", "must be a positive integer, got '" + s + "'");
  }
  return std::max(1u, fallback);
}

int cmd_simulate(const CommandOptions& opts, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const RunConfig cfg = load(opts);
    const GridPtr grid = cfg.sweep.grid.build();
    const State init = single_run_initial_state(cfg, grid);
    ModelParams params{cfg.regime, cfg.sweep.dt, cfg.sweep.t_end};
    try {
      params.validate();
    } catch (const InvalidArgument& e) {
      throw ConfigError("model", e.what());
    }
    const auto [eps, tau] = energy_parameters(cfg.regime);
    const fs::path dir = prepare_out_dir(cfg.out_dir);

    std::ostringstream states;
    states << "t,x,y,n,c,w\n";
    std::vector<EnergyRecord> records;
    std::vector<double> masses;
    Observer obs{cfg.stride, [&](const State& s, const State*) {
                   for (std::size_t k = 0; k < s.n.size(); ++k) {
                     states << format_double(s.t) << ',' << format_double(grid->x(k)) << ','
                            << format_double(grid->y(k)) << ',' << format_double(s.n[k]) << ','
                            << format_double(s.c[k]) << ',' << format_double(s.w[k]) << '\n';
                   }
                   const double d = eps > 0.0 ? dissipation(s, eps, tau) : std::nan("");
                   records.push_back({s.t, lyapunov(s, tau), d});
                   masses.push_back(mass(s));
                 }};
    const Trajectory traj = simulate(params, init, {obs});
    write_file(dir / "states.csv", states.str());
    write_file(dir / "energy.csv", energy_csv(records, masses));
    out << describe(cfg.regime) << " on " << grid->describe() << ": " << traj.steps << " steps, mass "
        << format_double(mass(traj.final_state)) << ", max n " << format_double(traj.final_state.n.max()) << '\n';
    out << "wrote " << (dir / "states.csv").string() << " and " << (dir / "energy.csv").string() << '\n';
    return kOk;
  });
}

int cmd_pes_rates(const CommandOptions& opts, std::ostream& out, std::ostream& err) {
  return run_rates(opts, out, err, true);
}

int cmd_ids_rates(const CommandOptions& opts, std::ostream& out, std::ostream& err) {
  return run_rates(opts, out, err, false);
}

int cmd_energy_check(const CommandOptions& opts, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const RunConfig cfg = load(opts);
    const auto* full = std::get_if<Full>(&cfg.regime);
    if (!full) throw ConfigError("model.regime", "energy-check needs the full regime");
    const GridPtr grid = cfg.sweep.grid.build();
    const EnergyRun coarse = energy_run(cfg, grid, *full, cfg.sweep.dt);
    const EnergyRun fine = energy_run(cfg, grid, *full, 0.5 * cfg.sweep.dt);

    const fs::path dir = prepare_out_dir(cfg.out_dir);
    write_file(dir / "energy.csv", energy_csv(coarse.records, {}));

    const double scale = std::max(1.0, std::abs(coarse.e0));
    const double zero = 1e-12 * scale;
    out << "mean identity defect: dt " << format_double(coarse.mean_defect) << ", dt/2 "
        << format_double(fine.mean_defect) << '\n';
    out << "largest energy increase per step: " << format_double(coarse.max_increase) << '\n';
    if (coarse.mean_defect <= zero && fine.mean_defect <= zero) {
      out << "ratio: both defects vanish (pass)\n";
      return kOk;
    }
    const double ratio = coarse.mean_defect / fine.mean_defect;
    const bool pass = ratio >= 1.5 && ratio <= 3.0;
    out << "ratio: " << format_double(ratio) << (pass ? " (pass)" : " (outside [1.5, 3])") << '\n';
    return pass ? kOk : kFailure;
  });
}

int cmd_semigroup_check(const CommandOptions& opts, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    RunConfig cfg;
    cfg.sweep.grid.nodes_x = 128;
    if (!opts.config_path.empty()) cfg = load(opts);
    const GridPtr grid = cfg.sweep.grid.build();
    const Field g = cfg.sweep.n0.sample(grid);
    constexpr double kHorizon = 40.0;
    constexpr double kStep = 1e-2;
    constexpr double kTolerance = 1e-4;
    bool pass = true;
    for (double a : {1.0, 0.1}) {
      const Field quad = resolvent_by_semigroup(g, a, kHorizon, kStep);
      const double defect = (quad - elliptic_solve(a, g)).max_abs();
      pass = pass && defect <= kTolerance;
      out << "a=" << a << " max defect " << format_double(defect) << '\n';
    }
    out << (pass ? "pass" : "FAIL") << " (tolerance " << kTolerance << ")\n";
    return pass ? kOk : kFailure;
  });
}

}  // namespace chemo::cli
