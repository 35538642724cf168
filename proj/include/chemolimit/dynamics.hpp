#pragma once

// Time stepping for the full relaxation system and its two singular limits.
//
//   Full(eps, tau):  n_t = Lap n - div(n grad c)
//                    eps c_t = Lap c - c + w
//                    eps w_t = tau Lap w - w + n
//   PesLimit(tau):   c = (-Lap + I)^{-1} w,  w = (-tau Lap + I)^{-1} n
//   IdsLimit:        c = (-Lap + I)^{-1} n,  w = n
//
// One step updates w, then c, then n: the signals implicitly, the density with
// implicit diffusion and an explicit upwinded chemotactic flux driven by the
// new c.

#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "chemolimit/grid.hpp"
#include "chemolimit/operators.hpp"

namespace chemo {

struct State {
  double t = 0.0;
  Field n;
  Field c;
  Field w;

  const GridPtr& grid_ptr() const { return n.grid_ptr(); }
  /// Throws InvalidArgument unless the three fields share a grid, are finite,
  /// and n >= -1e-12.
  void validate() const;
};

/// Homogeneous state n = c = w = m.
State constant_state(GridPtr grid, double m);

struct Full {
  double eps;
  double tau;
};
struct PesLimit {
  double tau;
};
struct IdsLimit {};
using Regime = std::variant<Full, PesLimit, IdsLimit>;

std::string describe(const Regime& regime);

struct ModelParams {
  Regime regime;
  double dt = 1e-3;
  double t_end = 0.5;

  void validate() const;
  /// ceil(t_end / dt), robust to round-off in the quotient.
  std::size_t step_count() const;
};

constexpr double kPositivityTolerance = -1e-12;
constexpr double kMaxStepsPerRun = 1e7;

State step_full(const State& s, double eps, double tau, double dt);
State step_pes(const State& s, double tau, double dt);
State step_ids(const State& s, double dt);

struct StepOptions {
  /// Diagnostic switch: drop the chemotactic flux and force c = 0, leaving n
  /// to the heat equation.
  bool disable_chemotaxis = false;
};

/// Stepper with the three elliptic operators of a regime assembled once.
class Integrator {
 public:
  Integrator(GridPtr grid, Regime regime, double dt, StepOptions options = {});

  const Regime& regime() const { return regime_; }
  double dt() const { return dt_; }

  /// One step; throws NumericalError on a positivity or finiteness violation.
  State step(const State& s) const;

 private:
  Field advance_density(const Field& n, const Field& c) const;

  GridPtr grid_;
  Regime regime_;
  double dt_;
  StepOptions options_;
  std::optional<EllipticOperator> w_op_;
  std::optional<EllipticOperator> c_op_;
  EllipticOperator n_op_;
};

/// Largest dt for which the explicit upwind flux keeps n >= 0 given the
/// signal c:  min over faces of spacing / (2 |c_hi - c_lo| / spacing).
double chemotaxis_time_step_limit(const Field& c);

/// Called with the current state and, from the first step on, the state it
/// was computed from.
struct Observer {
  std::size_t stride = 1;
  std::function<void(const State& current, const State* previous)> on_sample;
};

struct SimulateOptions {
  StepOptions step;
  /// Keep every `record_stride`-th state in Trajectory::states (0 = none).
  std::size_t record_stride = 0;
};

struct Trajectory {
  State final_state;
  std::size_t steps = 0;
  std::vector<State> states;
};

/// Marches from `init` (taken at t = 0) for step_count() steps. Observers fire
/// at step 0, at every multiple of their stride, and at the last step.
/// Any stepper failure is rethrown as SimulationError carrying the time of the
/// step that failed.
Trajectory simulate(const ModelParams& params, const State& init, const std::vector<Observer>& observers = {},
                    const SimulateOptions& options = {});

}  // namespace chemo
