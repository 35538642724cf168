#pragma once

// Discrete Neumann operators on the control-volume grids of grid.hpp.
//
// Every operator is assembled from the face list of the grid: the flux
// through a face is area * (difference) / spacing, and a node accumulates the
// fluxes of its faces divided by its control volume. Boundary faces do not
// exist, which is the discrete no-flux condition.

#include <vector>

#include "chemolimit/grid.hpp"

namespace chemo {

struct VectorField {
  std::vector<Field> components;
  /// Euclidean norm per node.
  Field magnitude() const;
};

/// Neumann Laplacian. On RadialBall this is f_rr + (N-1)/r f_r with the
/// symmetry limit 2N (f(h) - f(0)) / h^2 at the origin.
Field laplacian(const Field& f);

/// Nodal central differences; the normal component vanishes on the boundary
/// (and at r = 0 on a ball).
VectorField gradient(const Field& f);

/// Face-based Dirichlet energy: the integral of |grad f|^2 realized as
/// sum over faces of area * spacing * ((f_hi - f_lo) / spacing)^2.
/// Satisfies  -integrate(f * laplacian(f)) == gradient_energy(f).
double gradient_energy(const Field& f);

/// Conservative, upwinded discretization of div(n grad c). The face value of
/// n is taken from the node the flux leaves. Integrates to zero exactly.
Field chemotaxis_divergence(const Field& n, const Field& c);

struct SolveInfo {
  int iterations = 0;
  double relative_residual = 0.0;
};

/// The shifted Neumann operator  -a*Laplacian + I  on a fixed grid.
///
/// The system is solved in its symmetric form (V + a G) u = V f, where V is the
/// diagonal of control volumes and G the face graph Laplacian: a direct
/// tridiagonal solve on one-axis grids, Jacobi-preconditioned conjugate
/// gradients on rectangles. After the solve the constant mode of the residual
/// is removed, which keeps integrate(u) == integrate(f) to round-off.
class EllipticOperator {
 public:
  static constexpr double kRelativeTolerance = 1e-10;

  EllipticOperator(GridPtr grid, double a);

  const Grid& grid() const { return *grid_; }
  double coefficient() const { return a_; }

  /// (-a*Laplacian + I) u.
  Field apply(const Field& u) const;
  /// Solves (-a*Laplacian + I) u = f.
  Field solve(const Field& f, SolveInfo* info = nullptr) const;

  /// Off-diagonals <= 0, weak diagonal dominance, zero row sums of the
  /// Laplacian part (checked on the non-symmetrized rows).
  bool is_m_matrix() const;

 private:
  std::vector<double> symmetric_apply(const std::vector<double>& u) const;
  void solve_tridiagonal(const std::vector<double>& rhs, std::vector<double>& u) const;
  SolveInfo solve_cg(const std::vector<double>& rhs, std::vector<double>& u) const;

  GridPtr grid_;
  double a_;
  std::vector<double> diag_;  // V_i + a * sum of face conductances
  // Thomas factorization for one-axis grids.
  std::vector<double> upper_;
  std::vector<double> pivot_;
};

/// u solving (-a*Laplacian + I) u = f with homogeneous Neumann data.
Field elliptic_solve(double a, const Field& f);

/// exp(t (a*Laplacian - I)) f approximated by `substeps` implicit Euler steps.
Field heat_semigroup(const Field& f, double t, double a, int substeps);

/// Right-endpoint quadrature  sum_{j=1..horizon/step} step * exp(j*step (a*Laplacian - I)) g,
/// each exponential realized with one implicit Euler step per quadrature step.
/// Approximates the resolvent (-a*Laplacian + I)^{-1} g.
Field resolvent_by_semigroup(const Field& g, double a, double horizon, double step);

}  // namespace chemo
