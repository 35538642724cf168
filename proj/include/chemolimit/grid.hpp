#pragma once

// Discretized Neumann domains and scalar fields on them.
//
// All grids use a cell-vertex layout: nodes sit on the boundary and every
// node owns the control volume that surrounds it (half cells on the
// boundary). Quadrature, the discrete Laplacian and the chemotactic flux are
// all written in terms of these control volumes and the faces between
// neighbouring nodes, so that summation by parts holds exactly.

#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace chemo {

enum class GridKind { Interval, Rectangle, RadialBall };

/// Connection between two neighbouring nodes.
struct Face {
  std::size_t lo;  ///< node with the smaller coordinate along `axis`
  std::size_t hi;
  double spacing;  ///< distance between the two nodes
  double area;     ///< measure of the dual face separating their control volumes
  int axis;        ///< 0 = x (or r), 1 = y
};

class Grid;
using GridPtr = std::shared_ptr<const Grid>;

class Grid {
 public:
  static GridPtr interval(double length, int nodes);
  static GridPtr rectangle(double length_x, double length_y, int nodes_x, int nodes_y);
  /// Radially symmetric functions on the ball B_R in R^dimension, sampled on r in [0, R].
  static GridPtr radial_ball(int dimension, double radius, int nodes);

  GridKind kind() const { return kind_; }
  /// Spatial dimension of the physical domain (the ball dimension for RadialBall).
  int dimension() const { return dimension_; }
  /// Number of discretized axes (2 for Rectangle, 1 otherwise).
  int axes() const { return kind_ == GridKind::Rectangle ? 2 : 1; }

  int nodes_x() const { return nx_; }
  int nodes_y() const { return ny_; }
  std::size_t size() const { return static_cast<std::size_t>(nx_) * static_cast<std::size_t>(ny_); }
  double length_x() const { return lx_; }
  double length_y() const { return ly_; }
  double spacing_x() const { return hx_; }
  double spacing_y() const { return hy_; }
  double min_spacing() const;

  std::size_t index(int i, int j) const {
    return static_cast<std::size_t>(i) + static_cast<std::size_t>(nx_) * static_cast<std::size_t>(j);
  }
  /// x (or r) coordinate of node `k`.
  double x(std::size_t k) const { return hx_ * static_cast<double>(k % static_cast<std::size_t>(nx_)); }
  double y(std::size_t k) const { return hy_ * static_cast<double>(k / static_cast<std::size_t>(nx_)); }

  std::span<const double> volumes() const { return volumes_; }
  std::span<const Face> faces() const { return faces_; }
  double total_volume() const { return total_volume_; }

  /// Same domain with the mesh width halved on every axis.
  GridPtr refined() const;
  /// Same domain with `factor`-times fewer intervals per axis; nodes of the coarse grid
  /// coincide with every `factor`-th node of this one.
  bool is_refinement_of(const Grid& coarse, int factor) const;

  bool operator==(const Grid& other) const;
  std::string describe() const;

 private:
  Grid() = default;
  void build_geometry();

  GridKind kind_ = GridKind::Interval;
  int dimension_ = 1;
  int nx_ = 0;
  int ny_ = 1;
  double lx_ = 0.0;
  double ly_ = 0.0;
  double hx_ = 0.0;
  double hy_ = 0.0;
  double total_volume_ = 0.0;
  std::vector<double> volumes_;
  std::vector<Face> faces_;
};

/// Surface measure of the unit sphere S^{N-1} in R^N.
double unit_sphere_area(int dimension);

/// Scalar values on the nodes of a grid. Value type; the grid is shared.
class Field {
 public:
  Field() = default;
  explicit Field(GridPtr grid, double value = 0.0);
  Field(GridPtr grid, std::vector<double> values);

  /// Samples f(x, y) (Interval/Rectangle) or f(r, 0) (RadialBall) on the nodes.
  static Field sample(GridPtr grid, const std::function<double(double, double)>& f);

  const Grid& grid() const { return *grid_; }
  const GridPtr& grid_ptr() const { return grid_; }
  std::size_t size() const { return values_.size(); }
  std::span<const double> values() const { return values_; }
  std::span<double> values() { return values_; }
  const std::vector<double>& data() const { return values_; }
  double operator[](std::size_t k) const { return values_[k]; }
  double& operator[](std::size_t k) { return values_[k]; }

  bool is_finite() const;
  /// Throws NumericalError naming `what` when a value is NaN or infinite.
  void require_finite(const std::string& what) const;
  double min() const;
  double max() const;
  double max_abs() const;

  Field& operator+=(const Field& other);
  Field& operator-=(const Field& other);
  Field& operator*=(double s);

 private:
  GridPtr grid_;
  std::vector<double> values_;
};

Field operator+(Field a, const Field& b);
Field operator-(Field a, const Field& b);
Field operator*(double s, Field a);
Field operator*(Field a, double s);
/// Pointwise product.
Field multiply(const Field& a, const Field& b);
/// a + s*b without temporaries.
Field axpy(const Field& a, double s, const Field& b);

bool same_grid(const Field& a, const Field& b);
/// Throws InvalidArgument when the fields live on different grids.
void require_same_grid(const Field& a, const Field& b);

/// Control-volume quadrature of f over the domain (trapezoidal rule on Interval/Rectangle,
/// exact shell volumes |S^{N-1}| r^{N-1} dr on RadialBall).
double integrate(const Field& f);
/// Discrete L^p norm; p = infinity gives the max of |f|.
double norm_lp(const Field& f, double p);
/// Discrete W^{k,p} norm, k in {0,1,2}; derivatives use the stencils of the operators module.
double norm_sobolev(const Field& f, int k, double p);

}  // namespace chemo
