#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "bpns/params.hpp"
#include "bpns/spectral.hpp"

namespace bpns {

struct SimState {
  double t = 0.0;
  SpectralField omega;  // mean-zero vorticity
};

struct IntegratorConfig {
  double dt = 1e-2;
  bool enforce_symmetry = false;
  bool dealias = true;  // production setting; off only for experiments
};

struct BlowUpError : std::runtime_error {
  double t;
  double max_coeff;
  BlowUpError(double t_, double m)
      : std::runtime_error("numerical blow-up at t = " + std::to_string(t_) +
                           ", max |omega_k| = " + std::to_string(m)),
        t(t_), max_coeff(m) {}
};

/// Per-mode symbol of the linear part: -mu |k|^2 + i (kappa0/eps) k_x/|k|^2.
/// The beta term rotates phases only (neutral for energy and enstrophy).
inline Complex linear_symbol(double kx, double ky, const PhysicalParams& p) {
  const double k2 = kx * kx + ky * ky;
  if (k2 == 0.0) throw std::invalid_argument("linear_symbol: k = 0 excluded");
  return Complex{-p.mu * k2, (p.kappa0 / p.epsilon) * kx / k2};
}

struct DiagRecord {
  double t = 0.0;
  double energy = 0.0;             // 0.5 |grad psi|^2
  double enstrophy = 0.0;          // 0.5 |omega|^2
  double palinstrophy = 0.0;       // 0.5 |grad omega|^2
  double zonal_enstrophy = 0.0;    // 0.5 |wbar|^2
  double nonzonal_enstrophy = 0.0; // 0.5 |wtilde|^2
  double highpass_zonal = 0.0;     // 0.5 |wbar^{>f}|^2 for given kappa_f
  double beta_flux = 0.0;          // (dpsi/dx, omega); vanishes identically
};

inline DiagRecord diagnostics(const SimState& state, const PhysicalParams& p,
                              double kappa_f) {
  (void)p;
  DiagRecord d;
  d.t = state.t;
  const SpectralField& w = state.omega;
  SpectralField psi = inv_laplacian(w);
  const double gpsi = sobolev_norm(psi, 1.0);
  d.energy = 0.5 * gpsi * gpsi;
  const double nw = norm_l2(w);
  d.enstrophy = 0.5 * nw * nw;
  const double gw = sobolev_norm(w, 1.0);
  d.palinstrophy = 0.5 * gw * gw;
  auto [wbar, wtilde] = zonal_split(w);
  const double nb = norm_l2(wbar), nt = norm_l2(wtilde);
  d.zonal_enstrophy = 0.5 * nb * nb;
  d.nonzonal_enstrophy = 0.5 * nt * nt;
  const double nh = norm_l2(project_high(wbar, kappa_f));
  d.highpass_zonal = 0.5 * nh * nh;
  d.beta_flux = inner_product(deriv_x(psi), w);
  return d;
}

/// Running integral I(t) = int_0^t u(tau) e^{nu0 (tau - t)} dtau, updated by
/// I <- I e^{-nu0 dt} + u dt (rectangle rule).
struct ExpWeightedIntegral {
  double nu0 = 1.0;
  double value = 0.0;
  void add(double u, double dt) { value = value * std::exp(-nu0 * dt) + u * dt; }
};

/// Integrating-factor RK4 stepper for the vorticity equation. The linear
/// part (viscosity + beta term) is propagated exactly per mode; the
/// nonlinear term N(w) = -J(inv_lap(w), w) + f is pseudospectral with
/// 2/3-rule dealiasing.
class Stepper {
 public:
  Stepper(const GridSpec& grid, const PhysicalParams& params,
          const IntegratorConfig& cfg, SpectralField forcing)
      : grid_(grid), params_(params), cfg_(cfg), forcing_(std::move(forcing)) {
    build_propagators(cfg_.dt);
  }

  const PhysicalParams& params() const { return params_; }
  const IntegratorConfig& config() const { return cfg_; }
  const SpectralField& forcing() const { return forcing_; }

  double max_im_symbol() const { return max_im_; }

  SpectralField nonlinear(const SpectralField& w) const {
    SpectralField psi = inv_laplacian(w);
    SpectralField N = jacobian(psi, w);
    N *= -1.0;
    if (!cfg_.dealias) {
      // recompute without the dealias mask (experiments only)
      PhysicalField px = to_physical(deriv_x(psi)), py = to_physical(deriv_y(psi));
      PhysicalField wx = to_physical(deriv_x(w)), wy = to_physical(deriv_y(w));
      PhysicalField prod(grid_);
      for (size_t i = 0; i < prod.values.size(); ++i)
        prod.values[i] = -(px.values[i] * wy.values[i] - py.values[i] * wx.values[i]);
      N = to_spectral(prod);
      N.at(0, 0) = Complex{0.0, 0.0};
      N.mean_zero = true;
    }
    N += forcing_;
    N.at(0, 0) = Complex{0.0, 0.0};
    N.mean_zero = true;
    return N;
  }

  /// One IFRK4 step of size dt (defaulting to the configured dt).
  void step(SimState& state, double dt_opt = -1.0) {
    const double dt = dt_opt > 0.0 ? dt_opt : cfg_.dt;
    if (dt != dt_cached_) build_propagators(dt);
    const SpectralField& u = state.omega;

    SpectralField k1 = nonlinear(u);
    SpectralField s2 = apply(E_, u + (0.5 * dt) * k1);
    SpectralField k2 = nonlinear(s2);
    SpectralField s3 = apply(E_, u) + (0.5 * dt) * k2;
    SpectralField k3 = nonlinear(s3);
    SpectralField s4 = apply(E2_, u) + dt * apply(E_, k3);
    SpectralField k4 = nonlinear(s4);

    SpectralField out = apply(E2_, u) +
                        (dt / 6.0) * (apply(E2_, k1) + 2.0 * apply(E_, k2 + k3) + k4);
    out.at(0, 0) = Complex{0.0, 0.0};
    out.mean_zero = true;
    if (cfg_.enforce_symmetry) out = enforce_y_antisymmetry(out);
    double m = 0.0;
    bool finite = true;
    for (const auto& z : out.c) {
      if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) finite = false;
      m = std::max(m, std::abs(z));
    }
    if (!finite) throw BlowUpError(state.t + dt, m);
    state.omega = std::move(out);
    state.t += dt;
  }

  struct Observer {
    double cadence;
    std::function<void(const SimState&)> fn;
  };

  /// Advance to T_end; each observer fires at t0, then every cadence, and the
  /// last step is shortened exactly. Observers fire on the state at or just
  /// past their due time (step boundaries are not adjusted per observer).
  void integrate(SimState& state, double T_end, std::vector<Observer> observers = {}) {
    if (T_end < state.t)
      throw std::invalid_argument("integrate: T_end must be >= state.t");
    std::vector<double> next(observers.size(), state.t);
    auto fire = [&]() {
      for (size_t i = 0; i < observers.size(); ++i) {
        if (state.t >= next[i] - 1e-12 * std::max(1.0, std::abs(state.t))) {
          observers[i].fn(state);
          next[i] += observers[i].cadence;
        }
      }
    };
    fire();
    const double eps = 1e-12 * std::max(1.0, std::abs(T_end));
    while (state.t < T_end - eps) {
      const double dt = std::min(cfg_.dt, T_end - state.t);
      step(state, dt);
      fire();
    }
  }

 private:
  SpectralField apply(const std::vector<Complex>& prop, SpectralField f) const {
    for (size_t i = 0; i < f.c.size(); ++i) f.c[i] *= prop[i];
    return f;
  }

  void build_propagators(double dt) {
    const int n = grid_.n;
    E_.assign(size_t(n) * n, Complex{1.0, 0.0});
    E2_.assign(size_t(n) * n, Complex{1.0, 0.0});
    max_im_ = 0.0;
    for_each_mode(grid_, [&](int ax, int ay, int l1, int l2) {
      if (l1 == 0 && l2 == 0) return;
      const Complex s =
          linear_symbol(grid_.kappa0 * l1, grid_.kappa0 * l2, params_);
      max_im_ = std::max(max_im_, std::abs(s.imag()));
      E_[size_t(ax) * n + ay] = std::exp(s * (0.5 * dt));
      E2_[size_t(ax) * n + ay] = std::exp(s * dt);
    });
    if (dt * max_im_ > 0.5 && !warned_) {
      std::fprintf(stderr,
                   "warning: dt*max|Im symbol| = %g > 0.5; Rossby oscillation "
                   "marginally resolved\n",
                   dt * max_im_);
      warned_ = true;
    }
    dt_cached_ = dt;
  }

  GridSpec grid_;
  PhysicalParams params_;
  IntegratorConfig cfg_;
  SpectralField forcing_;
  std::vector<Complex> E_, E2_;
  double dt_cached_ = -1.0;
  double max_im_ = 0.0;
  bool warned_ = false;
};

/// Per-mode linear propagator exp(symbol * dt), k = 0 fixed at 1.
inline std::vector<Complex> propagator(const GridSpec& grid,
                                       const PhysicalParams& params, double dt) {
  std::vector<Complex> E(size_t(grid.n) * grid.n, Complex{1.0, 0.0});
  for_each_mode(grid, [&](int ax, int ay, int l1, int l2) {
    if (l1 == 0 && l2 == 0) return;
    E[size_t(ax) * grid.n + ay] =
        std::exp(linear_symbol(grid.kappa0 * l1, grid.kappa0 * l2, params) * dt);
  });
  return E;
}

/// Convenience one-off step matching the operation signature.
inline SimState step(const SimState& state, const SpectralField& forcing,
                     const PhysicalParams& params, const IntegratorConfig& cfg) {
  Stepper st(state.omega.grid, params, cfg, forcing);
  SimState s = state;
  st.step(s);
  return s;
}

/// Default time step: resolve the fastest retained Rossby oscillation and the
/// advective CFL at the given velocity scale.
inline double default_dt(const GridSpec& grid, const PhysicalParams& params,
                         double max_velocity) {
  double max_im = 0.0;
  for_each_mode(grid, [&](int, int, int l1, int l2) {
    if (l1 == 0 && l2 == 0) return;
    const double k2 = grid.kappa0 * grid.kappa0 * (double(l1) * l1 + double(l2) * l2);
    max_im = std::max(max_im, (grid.kappa0 / params.epsilon) *
                                  std::abs(grid.kappa0 * l1) / k2);
  });
  double dt = max_im > 0.0 ? 0.5 / max_im : 1e30;
  if (max_velocity > 0.0) dt = std::min(dt, 0.5 * grid.dx() / max_velocity);
  return dt;
}

}  // namespace bpns
