#include "chemolimit/grid.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "chemolimit/error.hpp"
#include "chemolimit/operators.hpp"

namespace chemo {

namespace {

void require_positive(double v, const char* what) {
  if (!(v > 0.0) || !std::isfinite(v)) {
    throw InvalidArgument(std::string(what) + " must be positive and finite");
  }
}

void require_nodes(int nodes, const char* what) {
  if (nodes < 3) throw InvalidArgument(std::string(what) + " must be at least 3");
}

}  // namespace

double unit_sphere_area(int dimension) {
  using std::numbers::pi;
  switch (dimension) {
    case 1: return 2.0;
    case 2: return 2.0 * pi;
    case 3: return 4.0 * pi;
    case 4: return 2.0 * pi * pi;
    default: throw InvalidArgument("unit_sphere_area: dimension must be in 1..4");
  }
}

GridPtr Grid::interval(double length, int nodes) {
  require_positive(length, "interval length");
  require_nodes(nodes, "interval nodes");
  auto g = std::shared_ptr<Grid>(new Grid());
  g->kind_ = GridKind::Interval;
  g->dimension_ = 1;
  g->nx_ = nodes;
  g->lx_ = length;
  g->hx_ = length / (nodes - 1);
  g->build_geometry();
  return g;
}

GridPtr Grid::rectangle(double length_x, double length_y, int nodes_x, int nodes_y) {
  require_positive(length_x, "rectangle length_x");
  require_positive(length_y, "rectangle length_y");
  require_nodes(nodes_x, "rectangle nodes_x");
  require_nodes(nodes_y, "rectangle nodes_y");
  auto g = std::shared_ptr<Grid>(new Grid());
  g->kind_ = GridKind::Rectangle;
  g->dimension_ = 2;
  g->nx_ = nodes_x;
  g->ny_ = nodes_y;
  g->lx_ = length_x;
  g->ly_ = length_y;
  g->hx_ = length_x / (nodes_x - 1);
  g->hy_ = length_y / (nodes_y - 1);
  g->build_geometry();
  return g;
}

GridPtr Grid::radial_ball(int dimension, double radius, int nodes) {
  if (dimension < 2 || dimension > 4) throw InvalidArgument("radial ball dimension must be 2, 3 or 4");
  require_positive(radius, "ball radius");
  require_nodes(nodes, "ball nodes");
  auto g = std::shared_ptr<Grid>(new Grid());
  g->kind_ = GridKind::RadialBall;
  g->dimension_ = dimension;
  g->nx_ = nodes;
  g->lx_ = radius;
  g->hx_ = radius / (nodes - 1);
  g->build_geometry();
  return g;
}

void Grid::build_geometry() {
  volumes_.assign(size(), 0.0);
  faces_.clear();
  switch (kind_) {
    case GridKind::Interval: {
      for (int i = 0; i < nx_; ++i) volumes_[i] = (i == 0 || i == nx_ - 1) ? 0.5 * hx_ : hx_;
      for (int i = 0; i + 1 < nx_; ++i) {
        faces_.push_back({static_cast<std::size_t>(i), static_cast<std::size_t>(i + 1), hx_, 1.0, 0});
      }
      break;
    }
    case GridKind::Rectangle: {
      auto half = [](int i, int n) { return (i == 0 || i == n - 1) ? 0.5 : 1.0; };
      for (int j = 0; j < ny_; ++j) {
        for (int i = 0; i < nx_; ++i) {
          volumes_[index(i, j)] = half(i, nx_) * hx_ * half(j, ny_) * hy_;
        }
      }
      for (int j = 0; j < ny_; ++j) {
        for (int i = 0; i + 1 < nx_; ++i) {
          faces_.push_back({index(i, j), index(i + 1, j), hx_, half(j, ny_) * hy_, 0});
        }
      }
      for (int j = 0; j + 1 < ny_; ++j) {
        for (int i = 0; i < nx_; ++i) {
          faces_.push_back({index(i, j), index(i, j + 1), hy_, half(i, nx_) * hx_, 1});
        }
      }
      break;
    }
    case GridKind::RadialBall: {
      const double sphere = unit_sphere_area(dimension_);
      const int n = dimension_;
      auto shell = [&](double r) { return sphere * std::pow(r, n) / n; };
      for (int i = 0; i < nx_; ++i) {
        const double inner = i == 0 ? 0.0 : (i - 0.5) * hx_;
        const double outer = i == nx_ - 1 ? lx_ : (i + 0.5) * hx_;
        volumes_[i] = shell(outer) - shell(inner);
      }
      for (int i = 0; i + 1 < nx_; ++i) {
        const double r_face = (i + 0.5) * hx_;
        faces_.push_back({static_cast<std::size_t>(i), static_cast<std::size_t>(i + 1), hx_,
                          sphere * std::pow(r_face, n - 1), 0});
      }
      break;
    }
  }
  total_volume_ = 0.0;
  for (double v : volumes_) total_volume_ += v;
}

double Grid::min_spacing() const { return kind_ == GridKind::Rectangle ? std::min(hx_, hy_) : hx_; }

GridPtr Grid::refined() const {
  switch (kind_) {
    case GridKind::Interval: return interval(lx_, 2 * nx_ - 1);
    case GridKind::Rectangle: return rectangle(lx_, ly_, 2 * nx_ - 1, 2 * ny_ - 1);
    case GridKind::RadialBall: return radial_ball(dimension_, lx_, 2 * nx_ - 1);
  }
  return nullptr;
}

bool Grid::is_refinement_of(const Grid& coarse, int factor) const {
  if (kind_ != coarse.kind_ || dimension_ != coarse.dimension_ || factor < 1) return false;
  if (lx_ != coarse.lx_ || (kind_ == GridKind::Rectangle && ly_ != coarse.ly_)) return false;
  if (nx_ - 1 != factor * (coarse.nx_ - 1)) return false;
  return kind_ != GridKind::Rectangle || ny_ - 1 == factor * (coarse.ny_ - 1);
}

bool Grid::operator==(const Grid& other) const {
  return kind_ == other.kind_ && dimension_ == other.dimension_ && nx_ == other.nx_ && ny_ == other.ny_ &&
         lx_ == other.lx_ && ly_ == other.ly_;
}

std::string Grid::describe() const {
  std::ostringstream os;
  switch (kind_) {
    case GridKind::Interval: os << "interval L=" << lx_ << " nodes=" << nx_; break;
    case GridKind::Rectangle:
      os << "rectangle " << lx_ << "x" << ly_ << " nodes=" << nx_ << "x" << ny_;
      break;
    case GridKind::RadialBall: os << "ball N=" << dimension_ << " R=" << lx_ << " nodes=" << nx_; break;
  }
  return os.str();
}

// ---------------------------------------------------------------------------
// Field

Field::Field(GridPtr grid, double value) : grid_(std::move(grid)) {
  if (!grid_) throw InvalidArgument("Field: null grid");
  values_.assign(grid_->size(), value);
}

Field::Field(GridPtr grid, std::vector<double> values) : grid_(std::move(grid)), values_(std::move(values)) {
  if (!grid_) throw InvalidArgument("Field: null grid");
  if (values_.size() != grid_->size()) {
    throw InvalidArgument("Field: " + std::to_string(values_.size()) + " values for a grid of " +
                          std::to_string(grid_->size()) + " nodes");
  }
}

Field Field::sample(GridPtr grid, const std::function<double(double, double)>& f) {
  Field out(grid);
  for (std::size_t k = 0; k < out.size(); ++k) out[k] = f(grid->x(k), grid->y(k));
  return out;
}

bool Field::is_finite() const {
  return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
}

void Field::require_finite(const std::string& what) const {
  if (!is_finite()) throw NumericalError(what + ": non-finite value");
}

double Field::min() const { return *std::min_element(values_.begin(), values_.end()); }
double Field::max() const { return *std::max_element(values_.begin(), values_.end()); }

double Field::max_abs() const {
  double m = 0.0;
  for (double v : values_) m = std::max(m, std::abs(v));
  return m;
}

Field& Field::operator+=(const Field& other) {
  require_same_grid(*this, other);
  for (std::size_t k = 0; k < values_.size(); ++k) values_[k] += other.values_[k];
  return *this;
}

Field& Field::operator-=(const Field& other) {
  require_same_grid(*this, other);
  for (std::size_t k = 0; k < values_.size(); ++k) values_[k] -= other.values_[k];
  return *this;
}

Field& Field::operator*=(double s) {
  for (double& v : values_) v *= s;
  return *this;
}

Field operator+(Field a, const Field& b) { return a += b; }
Field operator-(Field a, const Field& b) { return a -= b; }
Field operator*(double s, Field a) { return a *= s; }
Field operator*(Field a, double s) { return a *= s; }

Field multiply(const Field& a, const Field& b) {
  require_same_grid(a, b);
  Field out = a;
  for (std::size_t k = 0; k < out.size(); ++k) out[k] *= b[k];
  return out;
}

Field axpy(const Field& a, double s, const Field& b) {
  require_same_grid(a, b);
  Field out = a;
  for (std::size_t k = 0; k < out.size(); ++k) out[k] += s * b[k];
  return out;
}

bool same_grid(const Field& a, const Field& b) {
  return a.grid_ptr() == b.grid_ptr() || (a.grid_ptr() && b.grid_ptr() && a.grid() == b.grid());
}

void require_same_grid(const Field& a, const Field& b) {
  if (!same_grid(a, b)) throw InvalidArgument("fields live on different grids");
}

// ---------------------------------------------------------------------------
// Quadrature and norms

double integrate(const Field& f) {
  f.require_finite("integrate");
  const auto vol = f.grid().volumes();
  double sum = 0.0;
  for (std::size_t k = 0; k < f.size(); ++k) sum += vol[k] * f[k];
  return sum;
}

double norm_lp(const Field& f, double p) {
  if (std::isnan(p) || p < 1.0) throw InvalidArgument("norm_lp: p must be >= 1");
  f.require_finite("norm_lp");
  if (std::isinf(p)) return f.max_abs();
  const auto vol = f.grid().volumes();
  const double scale = f.max_abs();
  if (scale == 0.0) return 0.0;
  double sum = 0.0;
  for (std::size_t k = 0; k < f.size(); ++k) sum += vol[k] * std::pow(std::abs(f[k]) / scale, p);
  return scale * std::pow(sum, 1.0 / p);
}

namespace {

// W^{1,2} without temporaries: same quantities as the general path (nodal
// central differences, zero normal component on the boundary).
double norm_h1(const Field& f) {
  f.require_finite("norm_sobolev");
  const Grid& g = f.grid();
  const auto vol = g.volumes();
  const int nx = g.nodes_x();
  const int ny = g.nodes_y();
  const bool planar = g.kind() == GridKind::Rectangle;
  const double sx = 0.5 / g.spacing_x();
  const double sy = planar ? 0.5 / g.spacing_y() : 0.0;
  double sum = 0.0;
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      const std::size_t k = g.index(i, j);
      double acc = f[k] * f[k];
      if (i > 0 && i + 1 < nx) {
        const double d = (f[k + 1] - f[k - 1]) * sx;
        acc += d * d;
      }
      if (planar && j > 0 && j + 1 < ny) {
        const double d = (f[g.index(i, j + 1)] - f[g.index(i, j - 1)]) * sy;
        acc += d * d;
      }
      sum += vol[k] * acc;
    }
  }
  return std::sqrt(sum);
}

}  // namespace

double norm_sobolev(const Field& f, int k, double p) {
  if (k < 0 || k > 2) throw InvalidArgument("norm_sobolev: k must be 0, 1 or 2");
  if (std::isnan(p) || p < 1.0) throw InvalidArgument("norm_sobolev: p must be >= 1");
  if (p == 2.0 && k == 1) return norm_h1(f);
  std::vector<double> parts;
  parts.push_back(norm_lp(f, p));
  if (k >= 1) parts.push_back(norm_lp(gradient(f).magnitude(), p));
  if (k >= 2) parts.push_back(norm_lp(laplacian(f), p));
  if (std::isinf(p)) return *std::max_element(parts.begin(), parts.end());
  double sum = 0.0;
  for (double v : parts) sum += std::pow(v, p);
  return std::pow(sum, 1.0 / p);
}

}  // namespace chemo
