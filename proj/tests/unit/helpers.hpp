#pragma once

#include <array>
#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "chemolimit/grid.hpp"

namespace testing {

using std::numbers::pi;

// Dense Gaussian elimination with partial pivoting; the oracle for small hand systems.
template <std::size_t N>
std::array<double, N> dense_solve(std::array<std::array<double, N>, N> a, std::array<double, N> b) {
  for (std::size_t col = 0; col < N; ++col) {
    std::size_t piv = col;
    for (std::size_t r = col + 1; r < N; ++r) {
      if (std::abs(a[r][col]) > std::abs(a[piv][col])) piv = r;
    }
    std::swap(a[col], a[piv]);
    std::swap(b[col], b[piv]);
    for (std::size_t r = col + 1; r < N; ++r) {
      const double f = a[r][col] / a[col][col];
      for (std::size_t k = col; k < N; ++k) a[r][k] -= f * a[col][k];
      b[r] -= f * b[col];
    }
  }
  std::array<double, N> x{};
  for (std::size_t i = N; i-- > 0;) {
    double s = b[i];
    for (std::size_t k = i + 1; k < N; ++k) s -= a[i][k] * x[k];
    x[i] = s / a[i][i];
  }
  return x;
}

// Row form of -a*Lap + I on a uniform interval with mirrored ghosts.
template <std::size_t N>
std::array<std::array<double, N>, N> shifted_laplacian_rows(double a, double h) {
  std::array<std::array<double, N>, N> m{};
  const double k = a / (h * h);
  for (std::size_t i = 0; i < N; ++i) {
    m[i][i] = 1.0 + 2.0 * k;
    if (i == 0) {
      m[i][1] = -2.0 * k;
    } else if (i == N - 1) {
      m[i][N - 2] = -2.0 * k;
    } else {
      m[i][i - 1] = -k;
      m[i][i + 1] = -k;
    }
  }
  return m;
}

inline chemo::Field random_field(const chemo::GridPtr& g, std::mt19937_64& rng, double lo, double hi) {
  std::uniform_real_distribution<double> dist(lo, hi);
  chemo::Field f(g);
  for (std::size_t k = 0; k < f.size(); ++k) f[k] = dist(rng);
  return f;
}

inline double log_slope(double h1, double e1, double h2, double e2) { return std::log(e1 / e2) / std::log(h1 / h2); }

}  // namespace testing
