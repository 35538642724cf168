#include "chemolimit/experiments.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <memory>
#include <numbers>
#include <numeric>
#include <sstream>
#include <thread>

#include "chemolimit/error.hpp"
#include "chemolimit/operators.hpp"

namespace chemo {

namespace {

using Clock = std::chrono::steady_clock;
using MetricArray = std::array<double, kMetricCount>;

// Metrics taking the max over time levels (including t = 0); the others are
// right-endpoint L2 sums over t_1..t_K.
constexpr std::array<bool, kMetricCount> kIsSup = {true, false, true, false, true, false, false, false};

// Bound on the number of doubles held for one reference chunk.
constexpr std::size_t kChunkBudget = 4'000'000;

double h1(const Field& f) { return norm_sobolev(f, 1, 2.0); }
double l2(const Field& f) { return norm_lp(f, 2.0); }

void parallel_for(std::size_t count, unsigned threads, const std::function<void(std::size_t)>& fn) {
  const std::size_t workers = std::min<std::size_t>(std::max(1u, threads), count);
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t t = 0; t < workers; ++t) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) fn(i);
    });
  }
  for (auto& th : pool) th.join();
}

ManifoldKind manifold_of(const SweepConfig& cfg) {
  if (const auto* p = std::get_if<PesSweep>(&cfg.sweep)) return ManifoldKind::pes(p->tau);
  return ManifoldKind::ids();
}

// One sweep point advancing alongside the reference.
struct Lane {
  std::unique_ptr<Integrator> integrator;
  State state;
  MetricArray sup{};
  MetricArray sum{};
  std::string failure;
  double seconds = 0.0;
};

void accumulate(Lane& lane, const State& ref, const State* previous, const ManifoldKind& kind) {
  const State& s = lane.state;
  const Field en = s.n - ref.n;
  const Field ec = s.c - ref.c;
  const Field ew = s.w - ref.w;
  if (!previous) {
    lane.sup[0] = std::max(lane.sup[0], l2(en));
    lane.sup[2] = std::max(lane.sup[2], h1(ec));
    lane.sup[4] = std::max(lane.sup[4], l2(ew));
    return;
  }
  const double n_h1 = h1(en);
  const double c_h1 = h1(ec);
  const double w_h1 = h1(ew);
  lane.sup[0] = std::max(lane.sup[0], l2(en));
  lane.sup[2] = std::max(lane.sup[2], c_h1);
  lane.sup[4] = std::max(lane.sup[4], l2(ew));
  const auto [r1, r2] = manifold_residuals(s, previous->n, kind);
  const double r1_h1 = h1(r1);
  const double r2_l2 = l2(r2);
  lane.sum[1] += n_h1 * n_h1;
  lane.sum[3] += c_h1 * c_h1;
  lane.sum[5] += w_h1 * w_h1;
  lane.sum[6] += r1_h1 * r1_h1;
  lane.sum[7] += r2_l2 * r2_l2;
}

struct GridRun {
  std::vector<MetricArray> values;
  std::vector<std::string> failures;
  std::vector<double> seconds;
};

// Reference solve once, every point in lockstep with it, chunk by chunk.
GridRun run_on_grid(const SweepConfig& cfg, const GridPtr& grid, double dt) {
  const std::size_t points = cfg.point_count();
  ModelParams params{reference_regime(cfg), dt, cfg.t_end};
  const std::size_t steps = params.step_count();
  const Integrator reference(grid, params.regime, dt);
  const ManifoldKind kind = manifold_of(cfg);

  std::vector<Lane> lanes(points);
  for (std::size_t i = 0; i < points; ++i) {
    lanes[i].integrator = std::make_unique<Integrator>(grid, point_regime(cfg, i), dt);
    lanes[i].state = point_initial_state(cfg, grid, i);
  }
  State ref_state = reference_initial_state(cfg, grid);
  for (Lane& lane : lanes) accumulate(lane, ref_state, nullptr, kind);

  const std::size_t chunk = std::max<std::size_t>(1, kChunkBudget / (3 * grid->size()));
  std::vector<State> ref_chunk;
  for (std::size_t begin = 1; begin <= steps; begin += chunk) {
    const std::size_t end = std::min(steps, begin + chunk - 1);
    ref_chunk.clear();
    for (std::size_t k = begin; k <= end; ++k) {
      try {
        ref_state = reference.step(ref_state);
      } catch (const Error& e) {
        throw SimulationError(std::string("reference solve failed: ") + e.what(), static_cast<double>(k) * dt);
      }
      ref_state.t = static_cast<double>(k) * dt;
      ref_chunk.push_back(ref_state);
    }
    parallel_for(points, cfg.threads, [&](std::size_t i) {
      Lane& lane = lanes[i];
      if (!lane.failure.empty()) return;
      const auto start = Clock::now();
      for (std::size_t k = begin; k <= end; ++k) {
        State next;
        try {
          next = lane.integrator->step(lane.state);
        } catch (const Error& e) {
          std::ostringstream os;
          os << e.what() << " (t=" << static_cast<double>(k) * dt << ")";
          lane.failure = os.str();
          break;
        }
        next.t = static_cast<double>(k) * dt;
        std::swap(lane.state, next);
        accumulate(lane, ref_chunk[k - begin], &next, kind);
      }
      lane.seconds += std::chrono::duration<double>(Clock::now() - start).count();
    });
  }

  GridRun out;
  for (const Lane& lane : lanes) {
    MetricArray v{};
    for (std::size_t m = 0; m < kMetricCount; ++m) {
      v[m] = lane.failure.empty() ? (kIsSup[m] ? lane.sup[m] : std::sqrt(dt * lane.sum[m]))
                                  : std::numeric_limits<double>::quiet_NaN();
    }
    out.values.push_back(v);
    out.failures.push_back(lane.failure);
    out.seconds.push_back(lane.seconds);
  }
  return out;
}

RateReport run_sweep(const SweepConfig& cfg) {
  cfg.validate();
  const GridPtr grid = cfg.grid.build();
  const std::size_t points = cfg.point_count();

  RateReport report;
  report.abscissa_name = cfg.is_pes() ? "eps" : "kappa";
  for (std::size_t i = 0; i < points; ++i) report.abscissae.push_back(abscissa(cfg, i));

  const Field n0 = cfg.n0.sample(grid);
  report.mass = integrate(n0);
  if (auto note = mass_hypothesis_violation(*grid, report.mass, reference_regime(cfg))) {
    report.mass_hypothesis_violated = true;
    report.mass_note = *note;
  }

  const GridRun coarse = run_on_grid(cfg, grid, cfg.dt);
  report.failures = coarse.failures;
  report.runtimes = coarse.seconds;
  const std::size_t survivors = static_cast<std::size_t>(
      std::count_if(coarse.failures.begin(), coarse.failures.end(), [](const std::string& f) { return f.empty(); }));
  if (survivors < 4) {
    throw FitRejected("only " + std::to_string(survivors) + " sweep points completed; a rate fit needs 4");
  }

  std::optional<GridRun> fine;
  if (cfg.guard == MeshGuard::Sensitivity) {
    fine = run_on_grid(cfg, grid->refined(), 0.5 * cfg.dt);
    for (std::size_t i = 0; i < points; ++i) report.runtimes[i] += fine->seconds[i];
  } else if (cfg.guard == MeshGuard::Floor) {
    report.floor = discretization_floor(cfg);
  }

  for (std::size_t m = 0; m < kMetricCount; ++m) {
    MetricSeries series;
    series.name = kMetricNames[m];
    series.fitted = true;
    std::vector<double> xs, es;
    for (std::size_t i = 0; i < points; ++i) {
      const double v = coarse.values[i][m];
      series.values.push_back(v);
      bool use = coarse.failures[i].empty() && v > 0.0 && std::isfinite(v);
      if (use && fine) {
        const double w = fine->values[i][m];
        use = std::isfinite(w) && v >= cfg.guard_factor * std::abs(v - w);
      } else if (use && report.floor) {
        use = v >= cfg.guard_factor * *report.floor;
      }
      series.in_fit.push_back(use);
      if (use) {
        xs.push_back(report.abscissae[i]);
        es.push_back(v);
      }
    }
    try {
      series.fit = fit_rate(xs, es);
    } catch (const Error& e) {
      series.fit_error = e.what();
    }
    report.metrics.push_back(std::move(series));
  }

  // Records: distance of the initial data from the manifold, and layer sizes.
  const ManifoldKind kind = manifold_of(cfg);
  MetricSeries dist{"dist", {}, {}, false, std::nullopt, {}};
  MetricSeries layer_c{"layer_c", {}, {}, false, std::nullopt, {}};
  MetricSeries layer_w{"layer_w", {}, {}, false, std::nullopt, {}};
  for (std::size_t i = 0; i < points; ++i) {
    const State s0 = point_initial_state(cfg, grid, i);
    const InitialLayer layer = initial_layer(s0.n, s0.c, s0.w, kind);
    dist.values.push_back(manifold_distance(s0.n, s0.c, s0.w, kind));
    layer_c.values.push_back(layer.layer_c);
    layer_w.values.push_back(layer.layer_w);
    for (auto* s : {&dist, &layer_c, &layer_w}) s->in_fit.push_back(false);
  }
  report.metrics.push_back(std::move(dist));
  report.metrics.push_back(std::move(layer_c));
  report.metrics.push_back(std::move(layer_w));
  return report;
}

}  // namespace

// ---------------------------------------------------------------------------
// Configuration

GridPtr GridSpec::build() const {
  switch (kind) {
    case GridKind::Interval: return Grid::interval(length_x, nodes_x);
    case GridKind::Rectangle: return Grid::rectangle(length_x, length_y, nodes_x, nodes_y);
    case GridKind::RadialBall: return Grid::radial_ball(dimension, length_x, nodes_x);
  }
  throw InvalidArgument("GridSpec: unknown kind");
}

Profile Profile::constant(double v) {
  Profile p;
  p.kind = Kind::Constant;
  p.value = v;
  return p;
}

Profile Profile::gaussian(double mass, double center, double width) {
  Profile p;
  p.kind = Kind::Gaussian;
  p.mass = mass;
  p.center_x = center;
  p.center_y = center;
  p.width = width;
  return p;
}

Field Profile::sample(const GridPtr& grid) const {
  switch (kind) {
    case Kind::Zero: return Field(grid, 0.0);
    case Kind::Constant: return Field(grid, value);
    case Kind::Gaussian:
    case Kind::TwoBump: break;
  }
  if (!(width > 0.0)) throw InvalidArgument("profile width must be positive");
  if (!(mass >= 0.0)) throw InvalidArgument("profile mass must be nonnegative");
  const bool planar = grid->kind() == GridKind::Rectangle;
  auto bump = [&](double x, double y, double cx, double cy) {
    double r2 = (x - cx) * (x - cx);
    if (planar) r2 += (y - cy) * (y - cy);
    return std::exp(-0.5 * r2 / (width * width));
  };
  Field f = Field::sample(grid, [&](double x, double y) {
    double v = bump(x, y, center_x, center_y);
    if (kind == Kind::TwoBump) v += bump(x, y, center2_x, center2_y);
    return v;
  });
  const double total = integrate(f);
  if (!(total > 0.0)) throw InvalidArgument("profile has zero integral on this grid");
  f *= mass / total;
  return f;
}

std::string to_string(DataFamily f) {
  switch (f) {
    case DataFamily::WellPrepared: return "well-prepared";
    case DataFamily::IllPrepared: return "ill-prepared";
    case DataFamily::EpsPrepared: return "eps-prepared";
  }
  return "?";
}

DataFamily data_family_from_string(const std::string& s) {
  if (s == "well-prepared") return DataFamily::WellPrepared;
  if (s == "ill-prepared") return DataFamily::IllPrepared;
  if (s == "eps-prepared") return DataFamily::EpsPrepared;
  throw InvalidArgument("unknown data family '" + s + "'");
}

std::string to_string(MeshGuard g) {
  switch (g) {
    case MeshGuard::Sensitivity: return "sensitivity";
    case MeshGuard::Floor: return "floor";
    case MeshGuard::None: return "none";
  }
  return "?";
}

MeshGuard mesh_guard_from_string(const std::string& s) {
  if (s == "sensitivity") return MeshGuard::Sensitivity;
  if (s == "floor") return MeshGuard::Floor;
  if (s == "none") return MeshGuard::None;
  throw InvalidArgument("unknown mesh guard '" + s + "'");
}

std::size_t SweepConfig::point_count() const {
  if (const auto* p = std::get_if<PesSweep>(&sweep)) return p->eps_list.size();
  return std::get<IdsSweep>(sweep).kappa_list.size();
}

void SweepConfig::validate() const {
  auto positive = [](double v) { return v > 0.0 && std::isfinite(v); };
  if (!positive(t_end)) throw InvalidArgument("t_end must be positive");
  if (!positive(dt)) throw InvalidArgument("dt must be positive");
  const double q = t_end / dt;
  if (std::abs(q - std::round(q)) > 1e-9 * std::max(1.0, q)) throw InvalidArgument("t_end/dt must be an integer");
  if (q > kMaxStepsPerRun) throw InvalidArgument("t_end/dt exceeds the runaway guard of 1e7 steps");
  if (!(guard_factor > 0.0)) throw InvalidArgument("guard_factor must be positive");
  if (const auto* p = std::get_if<PesSweep>(&sweep)) {
    if (!positive(p->tau)) throw InvalidArgument("tau must be positive");
    for (double e : p->eps_list) {
      if (!positive(e)) throw InvalidArgument("eps values must be positive");
    }
    for (std::size_t i = 1; i < p->eps_list.size(); ++i) {
      if (!(p->eps_list[i] < p->eps_list[i - 1])) throw InvalidArgument("eps list must be strictly decreasing");
    }
  } else {
    const auto& list = std::get<IdsSweep>(sweep).kappa_list;
    for (const auto& [e, t] : list) {
      if (!positive(e) || !positive(t)) throw InvalidArgument("kappa entries must be positive");
    }
    for (std::size_t i = 1; i < list.size(); ++i) {
      if (!(list[i].first + list[i].second < list[i - 1].first + list[i - 1].second)) {
        throw InvalidArgument("|kappa| must be strictly decreasing");
      }
    }
    if (grid.kind == GridKind::RadialBall && grid.dimension > 2) {
      throw InvalidArgument("IDS sweeps are defined for domains of dimension at most 2");
    }
  }
  if (point_count() < 4) {
    throw FitRejected("sweep has " + std::to_string(point_count()) + " points; a rate fit needs at least 4");
  }
}

Regime reference_regime(const SweepConfig& cfg) {
  if (const auto* p = std::get_if<PesSweep>(&cfg.sweep)) return PesLimit{p->tau};
  return IdsLimit{};
}

Regime point_regime(const SweepConfig& cfg, std::size_t index) {
  if (const auto* p = std::get_if<PesSweep>(&cfg.sweep)) return Full{p->eps_list.at(index), p->tau};
  const auto& k = std::get<IdsSweep>(cfg.sweep).kappa_list.at(index);
  return Full{k.first, k.second};
}

double abscissa(const SweepConfig& cfg, std::size_t index) {
  if (const auto* p = std::get_if<PesSweep>(&cfg.sweep)) return p->eps_list.at(index);
  const auto& k = std::get<IdsSweep>(cfg.sweep).kappa_list.at(index);
  return k.first + k.second;
}

State reference_initial_state(const SweepConfig& cfg, const GridPtr& grid) {
  State s;
  s.n = cfg.n0.sample(grid);
  const InitialLayer layer = initial_layer(s.n, s.n, s.n, manifold_of(cfg));
  s.c = layer.c_limit0;
  s.w = layer.w_limit0;
  return s;
}

State point_initial_state(const SweepConfig& cfg, const GridPtr& grid, std::size_t index) {
  State s = reference_initial_state(cfg, grid);
  if (cfg.family == DataFamily::WellPrepared) return s;
  if (cfg.family == DataFamily::IllPrepared) {
    s.c = cfg.c0.sample(grid);
    s.w = cfg.w0.sample(grid);
    return s;
  }
  // Fast residuals equal to eps times the limit's time derivative at t = 0:
  //   tau Lap w0 - w0 + n0 = eps w',  Lap c0 - c0 + w0 = eps c'.
  const Full point = std::get<Full>(point_regime(cfg, index));
  const Field n_dot = laplacian(s.n) - chemotaxis_divergence(s.n, s.c);
  const Field w_dot = cfg.is_pes() ? elliptic_solve(std::get<PesSweep>(cfg.sweep).tau, n_dot) : n_dot;
  const Field c_dot = elliptic_solve(1.0, w_dot);
  s.w = elliptic_solve(point.tau, axpy(s.n, -point.eps, w_dot));
  s.c = elliptic_solve(1.0, axpy(s.w, -point.eps, c_dot));
  return s;
}

RateReport run_pes_sweep(const SweepConfig& cfg) {
  if (!cfg.is_pes()) throw InvalidArgument("run_pes_sweep needs a PES sweep configuration");
  return run_sweep(cfg);
}

RateReport run_ids_sweep(const SweepConfig& cfg) {
  if (cfg.is_pes()) throw InvalidArgument("run_ids_sweep needs an IDS sweep configuration");
  return run_sweep(cfg);
}

double discretization_floor(const SweepConfig& cfg) {
  const GridPtr coarse = cfg.grid.build();
  const GridPtr fine = coarse->refined();
  const Regime regime = reference_regime(cfg);
  ModelParams params{regime, cfg.dt, cfg.t_end};
  params.validate();
  const std::size_t steps = params.step_count();
  const Integrator coarse_step(coarse, regime, cfg.dt);
  const Integrator fine_step(fine, regime, 0.5 * cfg.dt);
  State a = reference_initial_state(cfg, coarse);
  State b = reference_initial_state(cfg, fine);

  const int nx = coarse->nodes_x();
  const int ny = coarse->nodes_y();
  auto difference = [&] {
    Field d(coarse);
    for (int j = 0; j < ny; ++j) {
      for (int i = 0; i < nx; ++i) {
        const std::size_t fine_index = fine->index(2 * i, coarse->kind() == GridKind::Rectangle ? 2 * j : 0);
        d[coarse->index(i, j)] = a.n[coarse->index(i, j)] - b.n[fine_index];
      }
    }
    return norm_lp(d, 2.0);
  };

  double floor = difference();
  try {
    for (std::size_t k = 1; k <= steps; ++k) {
      a = coarse_step.step(a);
      b = fine_step.step(fine_step.step(b));
      floor = std::max(floor, difference());
    }
  } catch (const Error& e) {
    throw SimulationError(std::string("discretization floor run failed: ") + e.what(), a.t);
  }
  return floor;
}

std::optional<std::string> mass_hypothesis_violation(const Grid& grid, double mass, const Regime& limit) {
  using std::numbers::pi;
  std::ostringstream os;
  if (std::holds_alternative<IdsLimit>(limit) && grid.dimension() == 2 && mass >= 4.0 * pi) {
    os << "mass " << mass << " >= 4*pi: outside the sub-critical hypothesis for N = 2";
    return os.str();
  }
  if (const auto* p = std::get_if<PesLimit>(&limit)) {
    const double threshold = 64.0 * p->tau * pi * pi;
    if (grid.dimension() == 4 && mass >= threshold) {
      os << "mass " << mass << " >= 64*tau*pi^2 = " << threshold << ": outside the sub-critical hypothesis for N = 4";
      return os.str();
    }
  }
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Fitting and report

FitResult fit_rate(const std::vector<double>& xs, const std::vector<double>& es) {
  if (xs.size() != es.size()) throw InvalidArgument("fit_rate: xs and es differ in length");
  if (xs.size() < 4) throw FitRejected("fit_rate: " + std::to_string(xs.size()) + " points; need at least 4");
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (!(xs[i] > 0.0) || !(es[i] > 0.0) || !std::isfinite(xs[i]) || !std::isfinite(es[i])) {
      throw InvalidArgument("fit_rate: entries must be positive and finite");
    }
  }
  const std::size_t n = xs.size();
  std::vector<double> lx(n), le(n);
  std::transform(xs.begin(), xs.end(), lx.begin(), [](double v) { return std::log(v); });
  std::transform(es.begin(), es.end(), le.begin(), [](double v) { return std::log(v); });
  const double mx = std::accumulate(lx.begin(), lx.end(), 0.0) / n;
  const double me = std::accumulate(le.begin(), le.end(), 0.0) / n;
  double sxx = 0.0, sxe = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxe += (lx[i] - mx) * (le[i] - me);
  }
  if (!(sxx > 1e-300)) throw InvalidArgument("fit_rate: abscissae are degenerate");
  FitResult fit;
  fit.slope = sxe / sxx;
  fit.intercept = me - fit.slope * mx;
  double ssr = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = le[i] - (fit.intercept + fit.slope * lx[i]);
    ssr += r * r;
  }
  fit.stderr_ = std::sqrt(ssr / static_cast<double>(n - 2) / sxx);
  return fit;
}

std::size_t MetricSeries::fit_points() const {
  return static_cast<std::size_t>(std::count(in_fit.begin(), in_fit.end(), true));
}

const MetricSeries& RateReport::metric(const std::string& name) const {
  for (const auto& m : metrics) {
    if (m.name == name) return m;
  }
  throw InvalidArgument("report has no metric '" + name + "'");
}

bool RateReport::all_fits_ok() const {
  return std::all_of(metrics.begin(), metrics.end(), [](const MetricSeries& m) { return !m.fitted || m.fit; });
}

bool RateReport::w_plateau() const {
  const MetricSeries& w = metric("err_w_LinfL2");
  std::size_t largest = 0, smallest = 0;
  for (std::size_t i = 0; i < abscissae.size(); ++i) {
    if (abscissae[i] > abscissae[largest]) largest = i;
    if (abscissae[i] < abscissae[smallest]) smallest = i;
  }
  return w.values.at(smallest) >= 0.5 * w.values.at(largest);
}

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

void write_csv(const RateReport& report, std::ostream& os) {
  os << kCsvHeader << '\n';
  std::vector<std::size_t> order(report.abscissae.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return report.abscissae[a] > report.abscissae[b]; });
  for (std::size_t i : order) {
    for (const MetricSeries& m : report.metrics) {
      std::string group;
      if (!m.fitted) {
        group = "record";
      } else if (i < report.failures.size() && !report.failures[i].empty()) {
        group = "failed";
      } else {
        group = m.in_fit.at(i) ? m.name : "excluded";
      }
      os << format_double(report.abscissae[i]) << ',' << m.name << ',' << format_double(m.values.at(i)) << ','
         << group << '\n';
    }
  }
  const bool any_fitted =
      std::any_of(report.metrics.begin(), report.metrics.end(), [](const MetricSeries& m) { return m.fitted; });
  if (!any_fitted) return;
  os << "# slopes:\n" << kCsvSlopeHeader << '\n';
  for (const MetricSeries& m : report.metrics) {
    if (!m.fitted) continue;
    const double nan = std::numeric_limits<double>::quiet_NaN();
    os << m.name << ',' << format_double(m.fit ? m.fit->slope : nan) << ','
       << format_double(m.fit ? m.fit->stderr_ : nan) << ',' << m.fit_points() << '\n';
  }
}

void emit_csv(const RateReport& report, const std::string& path) {
  std::ostringstream os;
  write_csv(report, os);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open '" + path + "' for writing");
  out << os.str();
  out.flush();
  if (!out) throw Error("failed writing '" + path + "'");
}

namespace {

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> parts;
  std::string cur;
  std::istringstream is(line);
  while (std::getline(is, cur, ',')) parts.push_back(cur);
  if (!line.empty() && line.back() == ',') parts.emplace_back();
  return parts;
}

double parse_double(const std::string& s, std::size_t line) {
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    throw InvalidArgument("csv line " + std::to_string(line) + ": bad number '" + s + "'");
  }
  return v;
}

}  // namespace

CsvReport parse_csv(std::istream& is) {
  CsvReport out;
  std::string line;
  std::size_t lineno = 1;
  if (!std::getline(is, line) || line != kCsvHeader) throw InvalidArgument("csv: header must be '" + std::string(kCsvHeader) + "'");
  bool in_slopes = false;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    if (line == "# slopes:") {
      in_slopes = true;
      if (!std::getline(is, line) || line != kCsvSlopeHeader) throw InvalidArgument("csv: bad slope header");
      ++lineno;
      continue;
    }
    const auto parts = split(line);
    if (parts.size() != 4) throw InvalidArgument("csv line " + std::to_string(lineno) + ": expected 4 fields");
    if (in_slopes) {
      CsvSlope s;
      s.metric = parts[0];
      s.slope = parse_double(parts[1], lineno);
      s.stderr_ = parse_double(parts[2], lineno);
      s.npoints = static_cast<std::size_t>(parse_double(parts[3], lineno));
      out.slopes.push_back(s);
    } else {
      out.rows.push_back({parse_double(parts[0], lineno), parts[1], parse_double(parts[2], lineno), parts[3]});
    }
  }
  return out;
}

CsvReport parse_csv_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path + "'");
  return parse_csv(in);
}

}  // namespace chemo
