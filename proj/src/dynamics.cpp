#include "chemolimit/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "chemolimit/error.hpp"

namespace chemo {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

void require_positive(double v, const char* what) {
  if (!(v > 0.0) || !std::isfinite(v)) throw InvalidArgument(std::string(what) + " must be positive and finite");
}

void validate_regime(const Regime& regime) {
  std::visit(Overloaded{[](const Full& r) {
                          require_positive(r.eps, "eps");
                          require_positive(r.tau, "tau");
                        },
                        [](const PesLimit& r) { require_positive(r.tau, "tau"); }, [](const IdsLimit&) {}},
             regime);
}

// (eps * old + dt * source) / (eps + dt)
Field relax(const Field& old, const Field& source, double eps, double dt) {
  Field out = old;
  for (std::size_t k = 0; k < out.size(); ++k) out[k] = (eps * old[k] + dt * source[k]) / (eps + dt);
  return out;
}

}  // namespace

void State::validate() const {
  if (!n.grid_ptr() || !c.grid_ptr() || !w.grid_ptr()) throw InvalidArgument("State: empty field");
  require_same_grid(n, c);
  require_same_grid(n, w);
  if (!n.is_finite() || !c.is_finite() || !w.is_finite()) throw InvalidArgument("State: non-finite value");
  if (n.min() < kPositivityTolerance) throw InvalidArgument("State: negative density");
}

State constant_state(GridPtr grid, double m) {
  State s;
  s.n = Field(grid, m);
  s.c = Field(grid, m);
  s.w = Field(grid, m);
  return s;
}

std::string describe(const Regime& regime) {
  std::ostringstream os;
  std::visit(Overloaded{[&](const Full& r) { os << "Full(eps=" << r.eps << ", tau=" << r.tau << ")"; },
                        [&](const PesLimit& r) { os << "PesLimit(tau=" << r.tau << ")"; },
                        [&](const IdsLimit&) { os << "IdsLimit"; }},
             regime);
  return os.str();
}

void ModelParams::validate() const {
  validate_regime(regime);
  require_positive(dt, "dt");
  require_positive(t_end, "t_end");
  if (t_end / dt > kMaxStepsPerRun) throw InvalidArgument("t_end/dt exceeds the runaway guard of 1e7 steps");
}

std::size_t ModelParams::step_count() const {
  const double q = t_end / dt;
  const double r = std::round(q);
  if (std::abs(q - r) <= 1e-9 * std::max(1.0, r)) return static_cast<std::size_t>(r);
  return static_cast<std::size_t>(std::ceil(q));
}

// ---------------------------------------------------------------------------
// Integrator

Integrator::Integrator(GridPtr grid, Regime regime, double dt, StepOptions options)
    : grid_(std::move(grid)), regime_(regime), dt_(dt), options_(options), n_op_(grid_, dt) {
  validate_regime(regime_);
  require_positive(dt, "dt");
  std::visit(Overloaded{[&](const Full& r) {
                          w_op_.emplace(grid_, r.tau * dt / (r.eps + dt));
                          c_op_.emplace(grid_, dt / (r.eps + dt));
                        },
                        [&](const PesLimit& r) {
                          w_op_.emplace(grid_, r.tau);
                          c_op_.emplace(grid_, 1.0);
                        },
                        [&](const IdsLimit&) { c_op_.emplace(grid_, 1.0); }},
             regime_);
}

Field Integrator::advance_density(const Field& n, const Field& c) const {
  Field rhs = n;
  if (!options_.disable_chemotaxis) rhs = axpy(n, -dt_, chemotaxis_divergence(n, c));
  Field next = n_op_.solve(rhs);
  if (!next.is_finite()) throw NumericalError("density update produced a non-finite value");
  if (next.min() < kPositivityTolerance) {
    std::ostringstream os;
    os << "positivity violated: min n = " << next.min();
    throw NumericalError(os.str());
  }
  return next;
}

State Integrator::step(const State& s) const {
  if (!(s.n.grid() == *grid_)) throw InvalidArgument("Integrator::step: state lives on a different grid");
  State out;
  out.t = s.t + dt_;
  std::visit(Overloaded{[&](const Full& r) {
                          out.w = w_op_->solve(relax(s.w, s.n, r.eps, dt_));
                          out.c = c_op_->solve(relax(s.c, out.w, r.eps, dt_));
                        },
                        [&](const PesLimit&) {
                          out.w = w_op_->solve(s.n);
                          out.c = c_op_->solve(out.w);
                        },
                        [&](const IdsLimit&) {
                          out.w = s.n;
                          out.c = c_op_->solve(s.n);
                        }},
             regime_);
  if (options_.disable_chemotaxis) out.c = Field(grid_, 0.0);
  out.n = advance_density(s.n, out.c);
  return out;
}

State step_full(const State& s, double eps, double tau, double dt) {
  s.validate();
  return Integrator(s.grid_ptr(), Full{eps, tau}, dt).step(s);
}

State step_pes(const State& s, double tau, double dt) {
  s.validate();
  return Integrator(s.grid_ptr(), PesLimit{tau}, dt).step(s);
}

State step_ids(const State& s, double dt) {
  s.validate();
  return Integrator(s.grid_ptr(), IdsLimit{}, dt).step(s);
}

double chemotaxis_time_step_limit(const Field& c) {
  double limit = std::numeric_limits<double>::infinity();
  for (const Face& face : c.grid().faces()) {
    const double slope = std::abs(c[face.hi] - c[face.lo]) / face.spacing;
    if (slope > 0.0) limit = std::min(limit, face.spacing / (2.0 * slope));
  }
  return limit;
}

Trajectory simulate(const ModelParams& params, const State& init, const std::vector<Observer>& observers,
                    const SimulateOptions& options) {
  params.validate();
  init.validate();
  for (const Observer& obs : observers) {
    if (obs.stride == 0) throw InvalidArgument("observer stride must be >= 1");
  }
  const std::size_t steps = params.step_count();
  const Integrator integrator(init.grid_ptr(), params.regime, params.dt, options.step);

  Trajectory traj;
  State current = init;
  current.t = 0.0;
  if (options.step.disable_chemotaxis) current.c = Field(init.grid_ptr(), 0.0);

  auto notify = [&](std::size_t k, const State* previous) {
    for (const Observer& obs : observers) {
      if (obs.on_sample && (k % obs.stride == 0 || k == steps)) obs.on_sample(current, previous);
    }
    if (options.record_stride > 0 && (k % options.record_stride == 0 || k == steps)) traj.states.push_back(current);
  };

  notify(0, nullptr);
  for (std::size_t k = 1; k <= steps; ++k) {
    State next;
    try {
      next = integrator.step(current);
    } catch (const Error& e) {
      throw SimulationError(std::string("step failed: ") + e.what(), static_cast<double>(k) * params.dt);
    }
    next.t = static_cast<double>(k) * params.dt;
    std::swap(current, next);
    notify(k, &next);
  }
  traj.final_state = current;
  traj.steps = steps;
  return traj;
}

}  // namespace chemo
