#include "chemolimit/operators.hpp"

#include <cmath>
#include <numeric>

#include "chemolimit/error.hpp"

namespace chemo {

namespace {

constexpr double kNegativeDensityTolerance = -1e-12;

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  return std::inner_product(a.begin(), a.end(), b.begin(), 0.0);
}

}  // namespace

Field VectorField::magnitude() const {
  if (components.empty()) throw InvalidArgument("VectorField: no components");
  Field out(components.front().grid_ptr());
  for (const Field& comp : components) {
    for (std::size_t k = 0; k < out.size(); ++k) out[k] += comp[k] * comp[k];
  }
  for (std::size_t k = 0; k < out.size(); ++k) out[k] = std::sqrt(out[k]);
  return out;
}

Field laplacian(const Field& f) {
  f.require_finite("laplacian");
  const Grid& g = f.grid();
  Field out(f.grid_ptr());
  for (const Face& face : g.faces()) {
    const double flux = face.area * (f[face.hi] - f[face.lo]) / face.spacing;
    out[face.lo] += flux;
    out[face.hi] -= flux;
  }
  const auto vol = g.volumes();
  for (std::size_t k = 0; k < out.size(); ++k) out[k] /= vol[k];
  return out;
}

VectorField gradient(const Field& f) {
  f.require_finite("gradient");
  const Grid& g = f.grid();
  VectorField out;
  const int nx = g.nodes_x();
  const int ny = g.nodes_y();
  Field gx(f.grid_ptr());
  for (int j = 0; j < ny; ++j) {
    for (int i = 1; i + 1 < nx; ++i) {
      gx[g.index(i, j)] = (f[g.index(i + 1, j)] - f[g.index(i - 1, j)]) / (2.0 * g.spacing_x());
    }
  }
  out.components.push_back(std::move(gx));
  if (g.kind() == GridKind::Rectangle) {
    Field gy(f.grid_ptr());
    for (int j = 1; j + 1 < ny; ++j) {
      for (int i = 0; i < nx; ++i) {
        gy[g.index(i, j)] = (f[g.index(i, j + 1)] - f[g.index(i, j - 1)]) / (2.0 * g.spacing_y());
      }
    }
    out.components.push_back(std::move(gy));
  }
  return out;
}

double gradient_energy(const Field& f) {
  f.require_finite("gradient_energy");
  double sum = 0.0;
  for (const Face& face : f.grid().faces()) {
    const double d = f[face.hi] - f[face.lo];
    sum += face.area * d * d / face.spacing;
  }
  return sum;
}

Field chemotaxis_divergence(const Field& n, const Field& c) {
  require_same_grid(n, c);
  n.require_finite("chemotaxis_divergence(n)");
  c.require_finite("chemotaxis_divergence(c)");
  if (n.min() < kNegativeDensityTolerance) {
    throw NumericalError("chemotaxis_divergence: negative density " + std::to_string(n.min()));
  }
  const Grid& g = n.grid();
  Field out(n.grid_ptr());
  for (const Face& face : g.faces()) {
    const double dc = c[face.hi] - c[face.lo];
    const double upwind = dc > 0.0 ? n[face.lo] : n[face.hi];
    const double flux = face.area * upwind * dc / face.spacing;
    out[face.lo] += flux;
    out[face.hi] -= flux;
  }
  const auto vol = g.volumes();
  for (std::size_t k = 0; k < out.size(); ++k) out[k] /= vol[k];
  return out;
}

// ---------------------------------------------------------------------------
// EllipticOperator

EllipticOperator::EllipticOperator(GridPtr grid, double a) : grid_(std::move(grid)), a_(a) {
  if (!grid_) throw InvalidArgument("EllipticOperator: null grid");
  if (!(a > 0.0) || !std::isfinite(a)) throw InvalidArgument("EllipticOperator: coefficient must be positive");
  const auto vol = grid_->volumes();
  diag_.assign(vol.begin(), vol.end());
  for (const Face& face : grid_->faces()) {
    const double k = a_ * face.area / face.spacing;
    diag_[face.lo] += k;
    diag_[face.hi] += k;
  }
  if (grid_->axes() == 1) {
    // Faces of a one-axis grid are (i, i+1) in order.
    const std::size_t n = grid_->size();
    const auto faces = grid_->faces();
    upper_.assign(n, 0.0);
    pivot_.assign(n, 0.0);
    for (std::size_t i = 0; i + 1 < n; ++i) upper_[i] = -a_ * faces[i].area / faces[i].spacing;
    pivot_[0] = diag_[0];
    for (std::size_t i = 1; i < n; ++i) pivot_[i] = diag_[i] - upper_[i - 1] * upper_[i - 1] / pivot_[i - 1];
  }
}

std::vector<double> EllipticOperator::symmetric_apply(const std::vector<double>& u) const {
  std::vector<double> out(u.size());
  const auto vol = grid_->volumes();
  for (std::size_t k = 0; k < u.size(); ++k) out[k] = vol[k] * u[k];
  for (const Face& face : grid_->faces()) {
    const double flux = a_ * face.area * (u[face.hi] - u[face.lo]) / face.spacing;
    out[face.lo] -= flux;
    out[face.hi] += flux;
  }
  return out;
}

Field EllipticOperator::apply(const Field& u) const {
  if (!(u.grid() == *grid_)) throw InvalidArgument("EllipticOperator::apply: grid mismatch");
  return axpy(u, -a_, laplacian(u));
}

void EllipticOperator::solve_tridiagonal(const std::vector<double>& rhs, std::vector<double>& u) const {
  const std::size_t n = rhs.size();
  u.assign(n, 0.0);
  u[0] = rhs[0];
  for (std::size_t i = 1; i < n; ++i) u[i] = rhs[i] - upper_[i - 1] / pivot_[i - 1] * u[i - 1];
  u[n - 1] /= pivot_[n - 1];
  for (std::size_t i = n - 1; i-- > 0;) u[i] = (u[i] - upper_[i] * u[i + 1]) / pivot_[i];
}

SolveInfo EllipticOperator::solve_cg(const std::vector<double>& rhs, std::vector<double>& u) const {
  const std::size_t n = rhs.size();
  SolveInfo info;
  const double rhs_norm = std::sqrt(dot(rhs, rhs));
  u.assign(n, 0.0);
  if (rhs_norm == 0.0) return info;
  // Start from the Jacobi guess.
  for (std::size_t k = 0; k < n; ++k) u[k] = rhs[k] / diag_[k];
  std::vector<double> r = symmetric_apply(u);
  for (std::size_t k = 0; k < n; ++k) r[k] = rhs[k] - r[k];
  std::vector<double> z(n), p(n);
  for (std::size_t k = 0; k < n; ++k) z[k] = r[k] / diag_[k];
  p = z;
  double rz = dot(r, z);
  const int max_iterations = static_cast<int>(10 * n);
  double res = std::sqrt(dot(r, r)) / rhs_norm;
  while (res > kRelativeTolerance) {
    if (info.iterations >= max_iterations) {
      throw NumericalError("EllipticOperator: conjugate gradients did not converge in " +
                           std::to_string(max_iterations) + " iterations (residual " + std::to_string(res) + ")");
    }
    const std::vector<double> ap = symmetric_apply(p);
    const double alpha = rz / dot(p, ap);
    for (std::size_t k = 0; k < n; ++k) {
      u[k] += alpha * p[k];
      r[k] -= alpha * ap[k];
    }
    for (std::size_t k = 0; k < n; ++k) z[k] = r[k] / diag_[k];
    const double rz_next = dot(r, z);
    const double beta = rz_next / rz;
    rz = rz_next;
    for (std::size_t k = 0; k < n; ++k) p[k] = z[k] + beta * p[k];
    ++info.iterations;
    res = std::sqrt(dot(r, r)) / rhs_norm;
  }
  info.relative_residual = res;
  return info;
}

Field EllipticOperator::solve(const Field& f, SolveInfo* info) const {
  if (!(f.grid() == *grid_)) throw InvalidArgument("EllipticOperator::solve: grid mismatch");
  f.require_finite("elliptic_solve");
  const auto vol = grid_->volumes();
  std::vector<double> rhs(f.size());
  for (std::size_t k = 0; k < rhs.size(); ++k) rhs[k] = vol[k] * f[k];

  std::vector<double> u;
  SolveInfo local;
  if (grid_->axes() == 1) {
    solve_tridiagonal(rhs, u);
  } else {
    local = solve_cg(rhs, u);
  }
  // The constant mode is an exact eigenvector (eigenvalue V); removing the
  // residual's component along it makes the solve mass-exact.
  // The face terms of the symmetric operator sum to zero, so the residual
  // mass is sum(rhs) - sum(V u).
  double residual_mass = 0.0;
  for (std::size_t k = 0; k < u.size(); ++k) residual_mass += rhs[k] - vol[k] * u[k];
  const double shift = residual_mass / grid_->total_volume();
  for (double& v : u) v += shift;

  if (info) *info = local;
  Field out(f.grid_ptr(), std::move(u));
  out.require_finite("elliptic_solve result");
  return out;
}

bool EllipticOperator::is_m_matrix() const {
  const auto vol = grid_->volumes();
  std::vector<double> offdiag_sum(grid_->size(), 0.0);
  for (const Face& face : grid_->faces()) {
    const double k = a_ * face.area / face.spacing;
    if (k < 0.0) return false;
    offdiag_sum[face.lo] += k;
    offdiag_sum[face.hi] += k;
  }
  for (std::size_t i = 0; i < offdiag_sum.size(); ++i) {
    // Non-symmetrized row: 1 + sum/V on the diagonal, -k/V off it.
    const double diag = 1.0 + offdiag_sum[i] / vol[i];
    if (diag < offdiag_sum[i] / vol[i]) return false;
    if (std::abs(diag_[i] / vol[i] - diag) > 1e-12 * diag) return false;
  }
  return true;
}

Field elliptic_solve(double a, const Field& f) { return EllipticOperator(f.grid_ptr(), a).solve(f); }

Field heat_semigroup(const Field& f, double t, double a, int substeps) {
  if (!(t >= 0.0)) throw InvalidArgument("heat_semigroup: t must be >= 0");
  if (substeps < 1) throw InvalidArgument("heat_semigroup: substeps must be >= 1");
  if (t == 0.0) return f;
  // (I - d(aL - I))^{-1} = (1/(1+d)) (I - (d a/(1+d)) L)^{-1}
  const double d = t / substeps;
  const EllipticOperator op(f.grid_ptr(), d * a / (1.0 + d));
  Field u = f;
  for (int s = 0; s < substeps; ++s) {
    u = op.solve(u);
    u *= 1.0 / (1.0 + d);
  }
  return u;
}

Field resolvent_by_semigroup(const Field& g, double a, double horizon, double step) {
  if (!(step > 0.0) || !(horizon > 0.0)) throw InvalidArgument("resolvent_by_semigroup: step and horizon must be positive");
  const auto count = static_cast<long>(std::llround(horizon / step));
  const EllipticOperator op(g.grid_ptr(), step * a / (1.0 + step));
  Field u = g;
  Field sum(g.grid_ptr());
  for (long j = 1; j <= count; ++j) {
    u = op.solve(u);
    u *= 1.0 / (1.0 + step);
    sum = axpy(sum, step, u);
  }
  return sum;
}

}  // namespace chemo
