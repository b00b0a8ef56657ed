#pragma once

#include <complex>
#include <stdexcept>
#include <vector>

#include "bpns/grid.hpp"

namespace bpns {

using Complex = std::complex<double>;

/// Real scalar sampled at the n x n collocation points, x-major layout:
/// values[i*n + j] = f(x_i, y_j).
struct PhysicalField {
  GridSpec grid;
  std::vector<double> values;

  PhysicalField() = default;
  explicit PhysicalField(const GridSpec& g) : grid(g), values(size_t(g.n) * g.n, 0.0) {}

  double& at(int i, int j) { return values[size_t(i) * grid.n + j]; }
  double at(int i, int j) const { return values[size_t(i) * grid.n + j]; }
};

/// Truncated Fourier coefficients of a real periodic scalar,
/// f(x) = sum_k c_k exp(i k.x), k = kappa0*(l1,l2), FFT index layout.
/// Hermitian symmetry c(-k) = conj(c(k)) is an invariant, not enforced
/// per-write; check_hermitian() asserts it.
struct SpectralField {
  GridSpec grid;
  std::vector<Complex> c;
  bool mean_zero = false;

  SpectralField() = default;
  explicit SpectralField(const GridSpec& g, bool mz = false)
      : grid(g), c(size_t(g.n) * g.n, Complex{0.0, 0.0}), mean_zero(mz) {}

  Complex& at(int ax, int ay) { return c[size_t(ax) * grid.n + ay]; }
  Complex at(int ax, int ay) const { return c[size_t(ax) * grid.n + ay]; }

  // Coefficient at integer wavenumbers (l1, l2), each in [-n/2, n/2).
  Complex& atk(int l1, int l2) { return at(grid.idx(l1), grid.idx(l2)); }
  Complex atk(int l1, int l2) const { return at(grid.idx(l1), grid.idx(l2)); }

  SpectralField& operator+=(const SpectralField& o) {
    require_same_grid(o);
    for (size_t i = 0; i < c.size(); ++i) c[i] += o.c[i];
    mean_zero = mean_zero && o.mean_zero;
    return *this;
  }
  SpectralField& operator-=(const SpectralField& o) {
    require_same_grid(o);
    for (size_t i = 0; i < c.size(); ++i) c[i] -= o.c[i];
    mean_zero = mean_zero && o.mean_zero;
    return *this;
  }
  SpectralField& operator*=(double a) {
    for (auto& z : c) z *= a;
    return *this;
  }

  friend SpectralField operator+(SpectralField a, const SpectralField& b) { return a += b; }
  friend SpectralField operator-(SpectralField a, const SpectralField& b) { return a -= b; }
  friend SpectralField operator*(double s, SpectralField a) { return a *= s; }

  void require_same_grid(const SpectralField& o) const {
    if (grid != o.grid)
      throw std::invalid_argument("SpectralField: grid mismatch");
  }
};

}  // namespace bpns
