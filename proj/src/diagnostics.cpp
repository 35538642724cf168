#include "chemolimit/diagnostics.hpp"

#include <algorithm>
#include <cmath>

#include "chemolimit/error.hpp"
#include "chemolimit/operators.hpp"

namespace chemo {

namespace {

void require_density(const Field& n, const char* what) {
  n.require_finite(what);
  if (n.min() < kPositivityTolerance) throw NumericalError(std::string(what) + ": negative density");
}

Field fast_residual(const State& s) { return laplacian(s.c) - s.c + s.w; }

double weighted_square(const Field& f) {
  const auto vol = f.grid().volumes();
  double sum = 0.0;
  for (std::size_t k = 0; k < f.size(); ++k) sum += vol[k] * f[k] * f[k];
  return sum;
}

}  // namespace

ManifoldKind ManifoldKind::pes(double tau) {
  if (!(tau > 0.0) || !std::isfinite(tau)) throw InvalidArgument("ManifoldKind::pes: tau must be positive");
  return ManifoldKind(Tag::Pes, tau);
}

double mass(const State& s) { return integrate(s.n); }

double lyapunov(const State& s, double tau) {
  require_density(s.n, "lyapunov");
  require_same_grid(s.n, s.c);
  require_same_grid(s.n, s.w);
  const auto vol = s.n.grid().volumes();
  const Field lap_c = laplacian(s.c);
  double sum = 0.0;
  for (std::size_t k = 0; k < s.n.size(); ++k) {
    const double n = s.n[k];
    const double entropy = n > 0.0 ? n * std::log(n) : 0.0;
    const double r = lap_c[k] - s.c[k] + s.w[k];
    sum += vol[k] * (entropy - n * s.c[k] + 0.5 * r * r + 0.5 * tau * lap_c[k] * lap_c[k] + 0.5 * s.c[k] * s.c[k]);
  }
  return sum + 0.5 * (1.0 + tau) * gradient_energy(s.c);
}

double dissipation(const State& s, double eps, double tau) {
  if (!(eps > 0.0)) throw InvalidArgument("dissipation: eps must be positive");
  require_density(s.n, "dissipation");
  require_same_grid(s.n, s.c);
  require_same_grid(s.n, s.w);
  double chemical = 0.0;
  for (const Face& face : s.n.grid().faces()) {
    const double lo = std::sqrt(std::max(s.n[face.lo], 0.0));
    const double hi = std::sqrt(std::max(s.n[face.hi], 0.0));
    const double g = (2.0 * (hi - lo) - 0.5 * (lo + hi) * (s.c[face.hi] - s.c[face.lo])) / face.spacing;
    chemical += face.area * face.spacing * g * g;
  }
  const Field r = fast_residual(s);
  return chemical + (1.0 + tau) / eps * gradient_energy(r) + 2.0 / eps * weighted_square(r);
}

EnergyRecord energy_record(const State& s, double eps, double tau) {
  return {s.t, lyapunov(s, tau), dissipation(s, eps, tau)};
}

State midpoint(const State& a, const State& b) {
  State m;
  m.t = 0.5 * (a.t + b.t);
  m.n = 0.5 * (a.n + b.n);
  m.c = 0.5 * (a.c + b.c);
  m.w = 0.5 * (a.w + b.w);
  return m;
}

double energy_identity_defect(const State& a, const State& b, double eps, double tau) {
  const double dt = b.t - a.t;
  if (!(dt > 0.0)) throw InvalidArgument("energy_identity_defect: states must be in increasing time");
  return std::abs((lyapunov(b, tau) - lyapunov(a, tau)) / dt + dissipation(midpoint(a, b), eps, tau));
}

std::pair<Field, Field> manifold_residuals(const State& s, const ManifoldKind& kind) {
  return manifold_residuals(s, s.n, kind);
}

std::pair<Field, Field> manifold_residuals(const State& s, const Field& driving_n, const ManifoldKind& kind) {
  require_same_grid(s.c, s.w);
  require_same_grid(s.w, driving_n);
  Field first = fast_residual(s);
  Field second = driving_n - s.w;
  if (kind.tag() == ManifoldKind::Tag::Pes) second = axpy(second, kind.tau(), laplacian(s.w));
  return {std::move(first), std::move(second)};
}

double manifold_distance(const Field& n0, const Field& c0, const Field& w0, const ManifoldKind& kind, int k, int l,
                         double p) {
  if (k < 0 || k > 2 || l < 0 || l > 2) throw InvalidArgument("manifold_distance: k and l must be in {0,1,2}");
  State s;
  s.n = n0;
  s.c = c0;
  s.w = w0;
  const auto [r1, r2] = manifold_residuals(s, kind);
  const double a = norm_sobolev(r1, k, p);
  const double b = norm_sobolev(r2, l, p);
  return std::sqrt(a * a + b * b);
}

InitialLayer initial_layer(const Field& n0, const Field& c0, const Field& w0, const ManifoldKind& kind) {
  require_same_grid(n0, c0);
  require_same_grid(n0, w0);
  InitialLayer out;
  out.w_limit0 = kind.tag() == ManifoldKind::Tag::Pes ? elliptic_solve(kind.tau(), n0) : n0;
  out.c_limit0 = elliptic_solve(1.0, out.w_limit0);
  out.layer_c = norm_lp(c0 - out.c_limit0, 2.0);
  out.layer_w = norm_lp(w0 - out.w_limit0, 2.0);
  return out;
}

}  // namespace chemo
