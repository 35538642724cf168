#pragma once

// Mass, Lyapunov energy, dissipation, critical-manifold residuals and the
// initial layer of the limit systems.

#include <utility>

#include "chemolimit/dynamics.hpp"
#include "chemolimit/grid.hpp"

namespace chemo {

/// Which limit's critical manifold a residual refers to.
class ManifoldKind {
 public:
  enum class Tag { Pes, Ids };

  static ManifoldKind pes(double tau);
  static ManifoldKind ids() { return ManifoldKind(Tag::Ids, 0.0); }

  Tag tag() const { return tag_; }
  /// Only meaningful for Pes.
  double tau() const { return tau_; }

 private:
  ManifoldKind(Tag tag, double tau) : tag_(tag), tau_(tau) {}
  Tag tag_;
  double tau_;
};

struct EnergyRecord {
  double t = 0.0;
  double E = 0.0;
  double D = 0.0;
};

double mass(const State& s);

/// E = int n(log n - c) + R^2/2 + tau/2 (Lap c)^2 + (1+tau)/2 |grad c|^2 + c^2/2,
/// R = Lap c - c + w. The gradient term uses the face-based gradient_energy.
double lyapunov(const State& s, double tau);

/// D = int n |grad(log n - c)|^2 + (1+tau)/eps |grad R|^2 + 2/eps R^2.
/// The first integrand is evaluated per face as |2 grad sqrt(n) - sqrt(n) grad c|^2
/// with sqrt(n) face-averaged.
double dissipation(const State& s, double eps, double tau);

EnergyRecord energy_record(const State& s, double eps, double tau);

/// Componentwise average of two states on the same grid (t averaged too).
State midpoint(const State& a, const State& b);

/// |(E(b) - E(a)) / (b.t - a.t) + D(midpoint(a, b))| for consecutive states.
double energy_identity_defect(const State& a, const State& b, double eps, double tau);

/// Pes: (Lap c - c + w, tau Lap w - w + n); Ids: (Lap c - c + w, n - w).
std::pair<Field, Field> manifold_residuals(const State& s, const ManifoldKind& kind);
/// As above with the n of the second residual supplied separately. After a
/// step, the signals were driven by the density of the previous state; pairing
/// them with that density removes an O(dt) lag from the residual.
std::pair<Field, Field> manifold_residuals(const State& s, const Field& driving_n, const ManifoldKind& kind);

/// sqrt(|-Lap c0 + c0 - w0|_{W^{k,p}}^2 + |-tau Lap w0 + w0 - n0|_{W^{l,p}}^2);
/// Ids uses w0 - n0 as the second argument.
double manifold_distance(const Field& n0, const Field& c0, const Field& w0, const ManifoldKind& kind, int k = 0,
                         int l = 0, double p = 2.0);

struct InitialLayer {
  Field c_limit0;
  Field w_limit0;
  double layer_c = 0.0;  ///< |c0 - c_limit0|_2
  double layer_w = 0.0;  ///< |w0 - w_limit0|_2
};

/// Signals the limit system assigns to n0 at t = 0, and their L2 distance from
/// the given c0, w0.
InitialLayer initial_layer(const Field& n0, const Field& c0, const Field& w0, const ManifoldKind& kind);

}  // namespace chemo
