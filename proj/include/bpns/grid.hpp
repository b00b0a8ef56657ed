#pragma once

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace bpns {

/// Square periodic grid of side L with n collocation points per dimension.
/// Retained integer wavenumbers are -n/2 <= l <= n/2 (FFT layout), physical
/// wavevectors k = kappa0 * (l1, l2) with kappa0 = 2*pi/L.
struct GridSpec {
  double L = 2.0 * std::numbers::pi;
  int n = 64;
  double kappa0 = 1.0;

  static GridSpec make(double L, int n) {
    if (!(L > 0.0)) throw std::invalid_argument("GridSpec: L must be positive");
    if (n < 8 || n % 2 != 0)
      throw std::invalid_argument("GridSpec: n must be even and >= 8, got " +
                                  std::to_string(n));
    GridSpec g;
    g.L = L;
    g.n = n;
    g.kappa0 = 2.0 * std::numbers::pi / L;
    return g;
  }

  // Integer wavenumber for FFT array index a in [0, n).
  int wav(int a) const { return a <= n / 2 ? a : a - n; }

  // FFT array index for integer wavenumber l in [-n/2, n/2).
  int idx(int l) const { return l >= 0 ? l : l + n; }

  double dx() const { return L / n; }
  double x(int i) const { return i * L / n; }
  double y(int j) const { return j * L / n; }

  bool operator==(const GridSpec& o) const { return L == o.L && n == o.n; }
  bool operator!=(const GridSpec& o) const { return !(*this == o); }
};

}  // namespace bpns
