#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <utility>

#include "bpns/fft.hpp"
#include "bpns/field.hpp"

namespace bpns {

// ---------------------------------------------------------------------------
// Mode iteration

template <typename F>
void for_each_mode(const GridSpec& g, F&& fn) {
  for (int ax = 0; ax < g.n; ++ax) {
    const int l1 = g.wav(ax);
    for (int ay = 0; ay < g.n; ++ay) {
      fn(ax, ay, l1, g.wav(ay));
    }
  }
}

// ---------------------------------------------------------------------------
// Derivatives and Fourier multipliers

inline SpectralField deriv_x(const SpectralField& f) {
  SpectralField out(f.grid, f.mean_zero);
  const double k0 = f.grid.kappa0;
  for_each_mode(f.grid, [&](int ax, int ay, int l1, int) {
    out.at(ax, ay) = Complex{0.0, k0 * l1} * f.at(ax, ay);
  });
  out.mean_zero = true;
  return out;
}

inline SpectralField deriv_y(const SpectralField& f) {
  SpectralField out(f.grid, f.mean_zero);
  const double k0 = f.grid.kappa0;
  for_each_mode(f.grid, [&](int ax, int ay, int, int l2) {
    out.at(ax, ay) = Complex{0.0, k0 * l2} * f.at(ax, ay);
  });
  out.mean_zero = true;
  return out;
}

inline SpectralField laplacian(const SpectralField& f) {
  SpectralField out(f.grid, f.mean_zero);
  const double k02 = f.grid.kappa0 * f.grid.kappa0;
  for_each_mode(f.grid, [&](int ax, int ay, int l1, int l2) {
    out.at(ax, ay) = -k02 * (double(l1) * l1 + double(l2) * l2) * f.at(ax, ay);
  });
  return out;
}

/// |k|^s Fourier multiplier (fractional gradient). Negative s requires a
/// mean-zero field; the k=0 coefficient stays zero.
inline SpectralField grad_pow(const SpectralField& f, double s) {
  if (s < 0.0 && !f.mean_zero)
    throw std::invalid_argument("grad_pow: negative s requires mean-zero field");
  SpectralField out(f.grid, f.mean_zero);
  const double k0 = f.grid.kappa0;
  for_each_mode(f.grid, [&](int ax, int ay, int l1, int l2) {
    if (l1 == 0 && l2 == 0) {
      out.at(ax, ay) = (s == 0.0) ? f.at(ax, ay) : Complex{0.0, 0.0};
      return;
    }
    const double k = k0 * std::sqrt(double(l1) * l1 + double(l2) * l2);
    out.at(ax, ay) = std::pow(k, s) * f.at(ax, ay);
  });
  return out;
}

/// Streamfunction psi = Delta^{-1} omega with zero mean.
inline SpectralField inv_laplacian(const SpectralField& omega) {
  if (!omega.mean_zero)
    throw std::invalid_argument("inv_laplacian: input must be mean-zero");
  SpectralField out(omega.grid, true);
  const double k02 = omega.grid.kappa0 * omega.grid.kappa0;
  for_each_mode(omega.grid, [&](int ax, int ay, int l1, int l2) {
    if (l1 == 0 && l2 == 0) return;
    out.at(ax, ay) = -omega.at(ax, ay) / (k02 * (double(l1) * l1 + double(l2) * l2));
  });
  return out;
}

// ---------------------------------------------------------------------------
// Projections

/// 2/3-rule dealiasing: zero modes with |l1| > n/3 or |l2| > n/3.
inline void dealias_in_place(SpectralField& f) {
  const int cut = f.grid.n / 3;
  for_each_mode(f.grid, [&](int ax, int ay, int l1, int l2) {
    if (std::abs(l1) > cut || std::abs(l2) > cut) f.at(ax, ay) = Complex{0.0, 0.0};
  });
}

inline SpectralField dealias(SpectralField f) {
  dealias_in_place(f);
  return f;
}

/// Low-pass P_kappa: keep modes with |k| <= kappa (Euclidean norm).
inline SpectralField project_low(const SpectralField& f, double kappa) {
  if (kappa < 0.0) throw std::invalid_argument("project_low: kappa must be >= 0");
  SpectralField out(f.grid, f.mean_zero);
  const double k0 = f.grid.kappa0;
  const double kap2 = kappa * kappa;
  for_each_mode(f.grid, [&](int ax, int ay, int l1, int l2) {
    const double k2 = k0 * k0 * (double(l1) * l1 + double(l2) * l2);
    if (k2 <= kap2) out.at(ax, ay) = f.at(ax, ay);
  });
  return out;
}

inline SpectralField project_high(const SpectralField& f, double kappa) {
  return f - project_low(f, kappa);
}

/// Zonal / non-zonal split: (fbar, ftilde), fbar the k_x = 0 part.
inline std::pair<SpectralField, SpectralField> zonal_split(const SpectralField& f) {
  SpectralField fbar(f.grid, f.mean_zero);
  for (int ay = 0; ay < f.grid.n; ++ay) fbar.at(0, ay) = f.at(0, ay);
  return {fbar, f - fbar};
}

/// y-odd part (f(x,y) - f(x,-y))/2. In spectral terms c(l1,l2) ->
/// (c(l1,l2) - c(l1,-l2))/2; the y-Nyquist row is its own reflection and
/// is zeroed.
inline SpectralField enforce_y_antisymmetry(const SpectralField& f) {
  const int n = f.grid.n;
  SpectralField out(f.grid, f.mean_zero);
  for (int ax = 0; ax < n; ++ax) {
    for (int ay = 0; ay < n; ++ay) {
      const int ry = (n - ay) % n;
      out.at(ax, ay) = 0.5 * (f.at(ax, ay) - f.at(ax, ry));
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Inner products and norms

/// L2 inner product over the full domain, (f,g) = L^2 sum_k c_f(k) conj(c_g(k)).
inline double inner_product(const SpectralField& f, const SpectralField& g) {
  f.require_same_grid(g);
  double s = 0.0;
  for (size_t i = 0; i < f.c.size(); ++i)
    s += f.c[i].real() * g.c[i].real() + f.c[i].imag() * g.c[i].imag();
  return f.grid.L * f.grid.L * s;
}

/// |nabla^s f|_{L2} with the domain-area factor, via Parseval.
inline double sobolev_norm(const SpectralField& f, double s = 0.0) {
  double acc = 0.0;
  const double k0 = f.grid.kappa0;
  for_each_mode(f.grid, [&](int ax, int ay, int l1, int l2) {
    const double l2n = double(l1) * l1 + double(l2) * l2;
    if (l2n == 0.0) {
      if (s == 0.0) acc += std::norm(f.at(ax, ay));
      return;
    }
    acc += std::pow(k0 * k0 * l2n, s) * std::norm(f.at(ax, ay));
  });
  return f.grid.L * std::sqrt(acc);
}

inline double norm_l2(const SpectralField& f) { return sobolev_norm(f, 0.0); }

/// Coefficient-sum Sobolev norm sqrt(sum |k|^{2s} |c_k|^2), i.e. the L2 norm
/// with unit-measure Parseval. The forcing-class normalisations and Grashof
/// numbers are stated in this convention.
inline double coeff_norm(const SpectralField& f, double s = 0.0) {
  return sobolev_norm(f, s) / f.grid.L;
}

inline double max_abs_coeff(const SpectralField& f) {
  double m = 0.0;
  for (const auto& z : f.c) m = std::max(m, std::abs(z));
  return m;
}

inline double linf_norm(const SpectralField& f) {
  PhysicalField p = to_physical(f);
  double m = 0.0;
  for (double v : p.values) m = std::max(m, std::abs(v));
  return m;
}

/// Max deviation from Hermitian symmetry c(-k) = conj(c(k)).
inline double hermitian_defect(const SpectralField& f) {
  const int n = f.grid.n;
  double m = 0.0;
  for (int ax = 0; ax < n; ++ax) {
    const int rx = (n - ax) % n;
    for (int ay = 0; ay < n; ++ay) {
      const int ry = (n - ay) % n;
      m = std::max(m, std::abs(f.at(ax, ay) - std::conj(f.at(rx, ry))));
    }
  }
  return m;
}

// ---------------------------------------------------------------------------
// Nonlinear term

/// Dealiased pseudospectral Jacobian d(psi,omega) = psi_x w_y - psi_y w_x.
/// Result is mean-zero (a Jacobian of periodic fields integrates to zero;
/// the k=0 mode is pinned exactly).
inline SpectralField jacobian(const SpectralField& psi, const SpectralField& omega) {
  psi.require_same_grid(omega);
  PhysicalField px = to_physical(deriv_x(psi));
  PhysicalField py = to_physical(deriv_y(psi));
  PhysicalField wx = to_physical(deriv_x(omega));
  PhysicalField wy = to_physical(deriv_y(omega));
  PhysicalField prod(psi.grid);
  for (size_t i = 0; i < prod.values.size(); ++i)
    prod.values[i] = px.values[i] * wy.values[i] - py.values[i] * wx.values[i];
  SpectralField out = to_spectral(prod);
  dealias_in_place(out);
  out.at(0, 0) = Complex{0.0, 0.0};
  out.mean_zero = true;
  return out;
}

// ---------------------------------------------------------------------------
// Deterministic random fields

namespace detail {

// splitmix64; fixed counter-based scheme so a given (seed, l1, l2) always
// maps to the same phase.
inline uint64_t splitmix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline double unit_double(uint64_t h) {
  return double(h >> 11) * 0x1.0p-53;  // [0,1)
}

}  // namespace detail

using SpectrumProfile = std::function<double(double)>;  // |k| -> amplitude

/// Mean-zero Hermitian random field: amplitude from the profile at |k|,
/// phase from a counter-based hash of (seed, l1, l2). Deterministic.
inline SpectralField random_field(uint64_t seed, const SpectrumProfile& profile,
                                  const GridSpec& grid, bool y_antisym = false) {
  SpectralField f(grid, true);
  const int n = grid.n;
  const int half = n / 2;
  for (int l1 = -half + 1; l1 < half; ++l1) {
    for (int l2 = -half + 1; l2 < half; ++l2) {
      // half-spectrum: l2 > 0, or l2 == 0 and l1 > 0
      if (!(l2 > 0 || (l2 == 0 && l1 > 0))) continue;
      const double kabs = grid.kappa0 * std::sqrt(double(l1) * l1 + double(l2) * l2);
      const double amp = profile(kabs);
      if (amp == 0.0) continue;
      const uint64_t h = detail::splitmix64(
          seed ^ detail::splitmix64(uint64_t(uint32_t(l1)) << 32 | uint32_t(l2)));
      const double phase = 2.0 * std::numbers::pi * detail::unit_double(h);
      const Complex z = amp * Complex{std::cos(phase), std::sin(phase)};
      f.atk(l1, l2) = z;
      f.atk(-l1, -l2) = std::conj(z);
    }
  }
  if (y_antisym) f = enforce_y_antisymmetry(f);
  return f;
}

}  // namespace bpns
