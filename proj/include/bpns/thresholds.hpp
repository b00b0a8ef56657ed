#pragma once

#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>

#include "bpns/forcing.hpp"
#include "bpns/params.hpp"
#include "bpns/spectral.hpp"

namespace bpns {

/// Tunable dimensionless constants of the threshold formulas. The underlying
/// bounds fix scaling only; all constants default to 1 and are configurable.
struct Constants {
  double c1 = 1.0, c2 = 1.0, c3 = 1.0, c4 = 1.0, c5 = 1.0;
  double c6 = 1.0, c7 = 1.0, c8 = 1.0, c9 = 1.0;
  double c_star = 1.0;   // epsilon-smallness conditions
  double c_alpha = 1.0;  // F_alpha inversion
  double c_eta = 1.0;    // nodal inequalities

  void validate() const {
    for (double v : {c1, c2, c3, c4, c5, c6, c7, c8, c9, c_star, c_alpha, c_eta})
      if (!(v > 0.0)) throw std::invalid_argument("Constants: all must be > 0");
  }
};

struct GrashofSet {
  double G0 = 0.0, G1 = 0.0, G2 = 0.0, G3 = 0.0;
};

/// G_m = |grad^m f_v| / (mu kappa0)^{2-m}, evaluated from the vorticity
/// forcing f = curl f_v using |grad^{m-1} f| = |grad^m f_v| (curl isometry
/// on mean-zero fields). Coefficient-norm convention.
inline double grashof(int m, const SpectralField& f, const PhysicalParams& p) {
  if (m < 0 || m > 3) throw std::invalid_argument("grashof: m must be in 0..3");
  if (!f.mean_zero) throw std::invalid_argument("grashof: forcing must be mean-zero");
  return coeff_norm(f, double(m) - 1.0) / std::pow(p.mu * p.kappa0, 2.0 - m);
}

inline GrashofSet grashof_set(const SpectralField& f, const PhysicalParams& p) {
  return {grashof(0, f, p), grashof(1, f, p), grashof(2, f, p), grashof(3, f, p)};
}

/// M0 = c3 G2 G3 (1 + G0^2).
inline double m0(const GrashofSet& gs, const Constants& consts) {
  return consts.c3 * gs.G2 * gs.G3 * (1.0 + gs.G0 * gs.G0);
}

/// Non-rotating Jones-Titi thresholds: (kappa/kappa0, N) = (c1 G0^{1/2}, c2 G0).
inline std::pair<double, double> classical_thresholds(double G0, const Constants& c) {
  if (G0 < 0.0) throw std::invalid_argument("classical_thresholds: G0 >= 0");
  return {c.c1 * std::sqrt(G0), c.c2 * G0};
}

/// 1/c_zeta(s) = (2s+1) zeta(2s+2), s > 5/2.
inline double c_zeta(double s) {
  if (!(s > 2.5)) throw std::invalid_argument("c_zeta: requires s > 5/2");
  return 1.0 / ((2.0 * s + 1.0) * zeta(2.0 * s + 2.0));
}

enum class FAlphaVariant { modes, nodes };

inline double f_alpha_forward(double y, double alpha, double c_alpha,
                              FAlphaVariant variant) {
  const double p = variant == FAlphaVariant::modes ? 2.5 : 2.0 / 3.0;
  return std::pow(y, p) * std::exp(2.0 * alpha * (y - 1.0)) / c_alpha;
}

/// Inverse of y -> y^p e^{2 alpha (y-1)} / c_alpha (p = 5/2 modes, 2/3 nodes);
/// bisection on the strictly increasing forward map, Newton-polished.
inline double f_alpha(double u, double alpha, double c_alpha, FAlphaVariant variant) {
  if (!(u > 0.0)) throw std::invalid_argument("f_alpha: requires u > 0");
  if (!(alpha > 0.0)) throw std::invalid_argument("f_alpha: requires alpha > 0");
  const double p = variant == FAlphaVariant::modes ? 2.5 : 2.0 / 3.0;
  double lo = std::min(1.0, u * c_alpha);
  double hi = std::max(1.0, 1.0 + std::log1p(u * c_alpha) / (2.0 * alpha) +
                                std::pow(u, 1.0 / p));
  while (f_alpha_forward(lo, alpha, c_alpha, variant) > u) lo *= 0.5;
  while (f_alpha_forward(hi, alpha, c_alpha, variant) < u) hi *= 2.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (f_alpha_forward(mid, alpha, c_alpha, variant) < u)
      lo = mid;
    else
      hi = mid;
  }
  double y = 0.5 * (lo + hi);
  for (int it = 0; it < 50; ++it) {
    const double fy = f_alpha_forward(y, alpha, c_alpha, variant);
    const double dfy = fy * (p / y + 2.0 * alpha);
    const double step = (fy - u) / dfy;
    y -= step;
    if (std::abs(fy - u) <= 1e-13 * u) break;
  }
  return y;
}

struct ThresholdInputs {
  std::string forcing_case;  // "band" | "algebraic" | "analytic"
  double eps = 1.0;
  GrashofSet gs;
  Constants consts;
  double nu0 = 1.0;
  double alpha_or_s = 0.0;                 // alpha (analytic) or s (algebraic)
  std::optional<double> kappa_f_over_k0;   // band-limited case
};

struct ThresholdReport {
  std::string forcing_case;
  double kappa_over_kappa0 = 0.0;  // modes result (0 when nodes)
  double N_nodes = 0.0;            // nodes result (0 when modes)
  double kappa_f_over_kappa0 = 0.0;
  bool epsilon_valid = false;
  double classical_kappa = 0.0;
  double classical_N = 0.0;
  ThresholdInputs inputs;
};

namespace detail {

inline void check_case(const ThresholdInputs& in) {
  in.consts.validate();
  if (in.forcing_case == "band") {
    if (!in.kappa_f_over_k0)
      throw std::invalid_argument("thresholds: band case requires kappa_f");
  } else if (in.forcing_case == "algebraic") {
    if (!(in.alpha_or_s > 2.5))
      throw std::invalid_argument("thresholds: algebraic case requires s > 5/2");
  } else if (in.forcing_case == "analytic") {
    if (!(in.alpha_or_s > 0.0))
      throw std::invalid_argument("thresholds: analytic case requires alpha > 0");
  } else {
    throw std::invalid_argument("thresholds: unknown forcing case '" +
                                in.forcing_case + "'");
  }
}

}  // namespace detail

/// Determining-modes threshold. The nu0-dependence of c4..c6 is realised as
/// the explicit nu0 powers of the proof: the eps term is (eps M0 / nu0^3)^{1/4}
/// and the zonal term nu0^{-1/8} (kappa_f/kappa0)^{3/8} G0^{1/4}, with the
/// configurable c_i multiplying the max.
inline ThresholdReport modes_threshold(const ThresholdInputs& in) {
  detail::check_case(in);
  ThresholdReport r;
  r.forcing_case = in.forcing_case;
  r.inputs = in;
  const double G0 = in.gs.G0;
  const double M0 = m0(in.gs, in.consts);
  const double nu0 = in.nu0;
  const double eps_term = std::pow(in.eps * M0 / std::pow(nu0, 3.0), 0.25);

  double kf = 0.0, zonal = 0.0, ci = 1.0;
  bool eps_ok = false;
  if (in.forcing_case == "band") {
    kf = *in.kappa_f_over_k0;
    zonal = std::pow(nu0, -0.125) * std::pow(kf, 3.0 / 8.0) * std::pow(G0, 0.25);
    ci = in.consts.c4;
    eps_ok = in.eps * M0 <= in.consts.c_star * nu0 * nu0 * kf;
  } else if (in.forcing_case == "algebraic") {
    const double s = in.alpha_or_s;
    const double cz = c_zeta(s);
    // balanced cutoff: (kf/k0)^{2s+7/2} = c_zeta(s) nu0^{-1/2} G0
    kf = std::pow(cz * G0 / std::sqrt(nu0), 1.0 / (2.0 * s + 3.5));
    zonal = std::pow(nu0, -0.125) * std::pow(kf, 3.0 / 8.0) * std::pow(G0, 0.25);
    ci = in.consts.c5;
    const double cs = std::pow(cz, -1.0 / (8.0 * s + 14.0));
    eps_ok = in.eps * M0 <=
             in.consts.c_star * std::pow(cs, -4.0) *
                 std::pow(nu0, 2.0 - 1.0 / (4.0 * s + 7.0)) *
                 std::pow(G0, 2.0 / (4.0 * s + 7.0));
  } else {  // analytic
    kf = G0 > 0.0 ? f_alpha(G0 / std::sqrt(nu0), in.alpha_or_s, in.consts.c_alpha,
                            FAlphaVariant::modes)
                  : 0.0;
    zonal = std::pow(nu0, -0.125) * std::pow(kf, 3.0 / 8.0) * std::pow(G0, 0.25);
    ci = in.consts.c6;
    eps_ok = in.eps * M0 <= in.consts.c_star * nu0 * nu0 * kf;
  }
  r.kappa_f_over_kappa0 = kf;
  r.kappa_over_kappa0 = ci * std::max(eps_term, zonal);
  r.epsilon_valid = eps_ok;
  auto [ck, cn] = classical_thresholds(G0, in.consts);
  r.classical_kappa = ck;
  r.classical_N = cn;
  return r;
}

/// Determining-nodes threshold. The eps term is (eps M0 / nu0^3)^{1/2}; the
/// zonal terms carry the nu0^{-1/3} prefactor of the proof. The global
/// smallness flag is eps M0 <= c nu0^2.
inline ThresholdReport nodes_threshold(const ThresholdInputs& in) {
  detail::check_case(in);
  ThresholdReport r;
  r.forcing_case = in.forcing_case;
  r.inputs = in;
  const double G0 = in.gs.G0;
  const double M0 = m0(in.gs, in.consts);
  const double nu0 = in.nu0;
  const double eps_term = std::sqrt(in.eps * M0 / std::pow(nu0, 3.0));

  double kf = 0.0, zonal = 0.0, ci = 1.0;
  if (in.forcing_case == "band") {
    kf = *in.kappa_f_over_k0;
    zonal = std::pow(nu0, -1.0 / 3.0) * std::cbrt(kf) * std::pow(G0, 2.0 / 3.0);
    ci = in.consts.c7;
  } else if (in.forcing_case == "algebraic") {
    const double s = in.alpha_or_s;
    const double cz = c_zeta(s);
    // balanced cutoff: (kf/k0)^{2s+5/3} = c_zeta(s) nu0^{-1} G0^{2/3}
    kf = std::pow(cz * std::pow(G0, 2.0 / 3.0) / nu0, 1.0 / (2.0 * s + 5.0 / 3.0));
    zonal = std::pow(cz / nu0 * std::pow(G0, 4.0 * s + 5.0), 1.0 / (6.0 * s + 5.0));
    ci = in.consts.c8;
  } else {  // analytic
    kf = G0 > 0.0 ? f_alpha(std::pow(G0, 2.0 / 3.0) / nu0, in.alpha_or_s,
                            in.consts.c_alpha, FAlphaVariant::nodes)
                  : 0.0;
    zonal = std::pow(nu0, -1.0 / 3.0) * std::cbrt(kf) * std::pow(G0, 2.0 / 3.0);
    ci = in.consts.c9;
  }
  r.kappa_f_over_kappa0 = kf;
  r.N_nodes = ci * std::max(eps_term, zonal);
  r.epsilon_valid = in.eps * M0 <= in.consts.c_star * nu0 * nu0;
  auto [ck, cn] = classical_thresholds(G0, in.consts);
  r.classical_kappa = ck;
  r.classical_N = cn;
  return r;
}

}  // namespace bpns
