#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "bpns/dynamics.hpp"
#include "bpns/forcing.hpp"
#include "bpns/spectral.hpp"
#include "bpns/thresholds.hpp"

namespace bpns {

// ---------------------------------------------------------------------------
// Node lattices and the nodal functional eta

/// Regular sqrt(N) x sqrt(N) lattice of nodes on collocation points.
struct NodeSet {
  GridSpec grid;
  int side = 0;    // sqrt(N)
  int stride = 0;  // n / side

  static NodeSet regular(const GridSpec& grid, int N) {
    const int side = int(std::lround(std::sqrt(double(N))));
    if (side * side != N || N <= 0)
      throw std::invalid_argument("NodeSet: N must be a positive perfect square");
    if (grid.n % side != 0)
      throw std::invalid_argument("NodeSet: sqrt(N) must divide n");
    return NodeSet{grid, side, grid.n / side};
  }

  int count() const { return side * side; }
};

/// eta(u) = max_i |u(x_i)| over the node set; nodes are collocation points
/// by construction, no interpolation.
inline double eta(const PhysicalField& u, const NodeSet& nodes) {
  if (u.grid != nodes.grid)
    throw std::invalid_argument("eta: field/node grid mismatch");
  double m = 0.0;
  for (int a = 0; a < nodes.side; ++a)
    for (int b = 0; b < nodes.side; ++b)
      m = std::max(m, std::abs(u.at(a * nodes.stride, b * nodes.stride)));
  return m;
}

/// Piecewise-bilinear interpolant of u sampled at the node lattice,
/// evaluated back on the full collocation grid (periodic in both directions).
inline PhysicalField bilinear_interpolant(const PhysicalField& u, const NodeSet& nodes) {
  if (u.grid != nodes.grid)
    throw std::invalid_argument("bilinear_interpolant: grid mismatch");
  const int n = u.grid.n, side = nodes.side, h = nodes.stride;
  PhysicalField out(u.grid);
  auto node_val = [&](int a, int b) {
    return u.at(((a % side) + side) % side * h, ((b % side) + side) % side * h);
  };
  for (int i = 0; i < n; ++i) {
    const int a = i / h;
    const double tx = double(i - a * h) / h;
    for (int j = 0; j < n; ++j) {
      const int b = j / h;
      const double ty = double(j - b * h) / h;
      out.at(i, j) = (1 - tx) * (1 - ty) * node_val(a, b) +
                     tx * (1 - ty) * node_val(a + 1, b) +
                     (1 - tx) * ty * node_val(a, b + 1) +
                     tx * ty * node_val(a + 1, b + 1);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Experiment configuration and results

enum class Coupling { replace, nudge };

struct IcSpec {
  uint64_t seed = 1;
  double amplitude = 1.0;
  double kmin = 1.0;  // excited band, units of kappa0
  double kmax = 4.0;
  bool y_antisym = false;
};

struct ModesSyncConfig {
  double kappa = 0.0;  // coupling cutoff wavenumber
  Coupling coupling = Coupling::replace;
  double lambda = 0.0;  // nudging gain (nudge coupling)
  double T = 10.0;
  double burn_in = 0.0;
  IcSpec ic_master, ic_slave;
  double tol_converged = 1e-6;
  double tol_diverged = 1e-1;
  double cadence = 0.1;

  void validate() const {
    if (kappa < 0.0) throw std::invalid_argument("ModesSyncConfig: kappa >= 0");
    if (!(T > burn_in)) throw std::invalid_argument("ModesSyncConfig: T > burn_in");
    if (!(tol_converged > 0.0 && tol_converged < 1.0) ||
        !(tol_diverged > 0.0 && tol_diverged < 1.0))
      throw std::invalid_argument("ModesSyncConfig: tolerances must be in (0,1)");
  }
};

struct NodesSyncConfig {
  int N = 16;           // perfect square
  double lambda = 1.0;  // nudging gain
  double T = 10.0;
  double burn_in = 0.0;
  IcSpec ic_master, ic_slave;
  double tol_converged = 1e-6;
  double tol_diverged = 1e-1;
  double cadence = 0.1;

  void validate() const {
    if (!(lambda >= 0.0)) throw std::invalid_argument("NodesSyncConfig: lambda >= 0");
    if (!(T > burn_in)) throw std::invalid_argument("NodesSyncConfig: T > burn_in");
  }
};

struct SyncSample {
  double t = 0.0;
  double delta_norm = 0.0;  // |delta omega|
  double observed = 0.0;    // |P_kappa delta omega| or eta(grad delta psi)
  double energy_master = 0.0;
  double energy_slave = 0.0;
};

struct SyncResult {
  std::vector<SyncSample> series;
  bool converged = false;
  double decay_rate = 0.0;  // fitted log-slope of |delta omega| after burn_in
  double delta_at_burn_in = 0.0;
  double delta_at_end = 0.0;
};

namespace detail {

inline SpectralField make_ic(const IcSpec& ic, const GridSpec& grid) {
  return random_field(
      ic.seed,
      [&](double k) {
        const double kk = k / grid.kappa0;
        return (kk >= ic.kmin && kk <= ic.kmax) ? ic.amplitude : 0.0;
      },
      grid, ic.y_antisym);
}

inline double energy_of(const SpectralField& w) {
  const double g = sobolev_norm(inv_laplacian(w), 1.0);
  return 0.5 * g * g;
}

inline void finish_verdict(SyncResult& r, double burn_in, double tol_converged) {
  double at_burn = 0.0, at_end = 0.0;
  bool seen_burn = false;
  for (const auto& s : r.series) {
    if (!seen_burn && s.t >= burn_in - 1e-12) {
      at_burn = s.delta_norm;
      seen_burn = true;
    }
    at_end = s.delta_norm;
  }
  r.delta_at_burn_in = at_burn;
  r.delta_at_end = at_end;
  r.converged = at_end <= tol_converged * at_burn;
  // least-squares log-slope after burn-in
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int np = 0;
  for (const auto& s : r.series) {
    if (s.t < burn_in || s.delta_norm <= 0.0) continue;
    const double x = s.t, y = std::log(s.delta_norm);
    sx += x; sy += y; sxx += x * x; sxy += x * y;
    ++np;
  }
  if (np >= 2 && sxx * np - sx * sx > 0.0)
    r.decay_rate = (np * sxy - sx * sy) / (np * sxx - sx * sx);
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Master-slave synchronization experiments

/// Determining-modes experiment: master and slave advanced in lockstep with
/// identical forcing; after each step the slave's low modes are replaced by
/// the master's (or nudged toward them). Records |delta omega| and
/// |P_kappa delta omega| at the observer cadence.
inline SyncResult run_modes_sync(const ModesSyncConfig& cfg, const SpectralField& forcing,
                                 const PhysicalParams& params,
                                 const IntegratorConfig& icfg) {
  cfg.validate();
  const GridSpec& grid = forcing.grid;
  Stepper stepper(grid, params, icfg, forcing);
  SimState master{0.0, detail::make_ic(cfg.ic_master, grid)};
  SimState slave{0.0, detail::make_ic(cfg.ic_slave, grid)};

  auto couple = [&]() {
    if (cfg.kappa <= 0.0) return;
    if (cfg.coupling == Coupling::replace) {
      SpectralField low = project_low(master.omega, cfg.kappa);
      slave.omega = project_high(slave.omega, cfg.kappa) + low;
    } else {
      slave.omega += (cfg.lambda * icfg.dt) *
                     project_low(master.omega - slave.omega, cfg.kappa);
    }
  };
  couple();

  SyncResult r;
  auto record = [&]() {
    SpectralField d = master.omega - slave.omega;
    SyncSample s;
    s.t = master.t;
    s.delta_norm = norm_l2(d);
    s.observed = norm_l2(project_low(d, cfg.kappa));
    s.energy_master = detail::energy_of(master.omega);
    s.energy_slave = detail::energy_of(slave.omega);
    r.series.push_back(s);
  };
  record();
  double next = cfg.cadence;
  const double eps = 1e-12 * std::max(1.0, cfg.T);
  try {
    while (master.t < cfg.T - eps) {
      const double dt = std::min(icfg.dt, cfg.T - master.t);
      stepper.step(master, dt);
      stepper.step(slave, dt);
      couple();
      if (master.t >= next - eps) {
        record();
        next += cfg.cadence;
      }
    }
  } catch (const BlowUpError& e) {
    throw std::runtime_error(std::string("modes sync: ") + e.what());
  }
  if (r.series.empty() || r.series.back().t < cfg.T - eps) record();
  detail::finish_verdict(r, cfg.burn_in, cfg.tol_converged);
  return r;
}

/// Determining-nodes experiment: slave relaxed toward the master through the
/// piecewise-bilinear interpolant of delta omega sampled at the node lattice.
/// Records |delta omega| and eta(grad delta psi).
inline SyncResult run_nodes_sync(const NodesSyncConfig& cfg, const SpectralField& forcing,
                                 const PhysicalParams& params,
                                 const IntegratorConfig& icfg) {
  cfg.validate();
  const GridSpec& grid = forcing.grid;
  const NodeSet nodes = NodeSet::regular(grid, cfg.N);
  Stepper stepper(grid, params, icfg, forcing);
  SimState master{0.0, detail::make_ic(cfg.ic_master, grid)};
  SimState slave{0.0, detail::make_ic(cfg.ic_slave, grid)};

  auto couple = [&](double dt) {
    if (cfg.lambda == 0.0) return;
    PhysicalField d = to_physical(master.omega - slave.omega);
    SpectralField nudge = to_spectral(bilinear_interpolant(d, nodes));
    dealias_in_place(nudge);
    nudge.at(0, 0) = Complex{0.0, 0.0};
    nudge.mean_zero = true;
    slave.omega += (cfg.lambda * dt) * nudge;
  };

  SyncResult r;
  auto record = [&]() {
    SpectralField d = master.omega - slave.omega;
    SyncSample s;
    s.t = master.t;
    s.delta_norm = norm_l2(d);
    // eta applied to |grad delta psi| via its components
    SpectralField dpsi = inv_laplacian(d);
    PhysicalField gx = to_physical(deriv_x(dpsi));
    PhysicalField gy = to_physical(deriv_y(dpsi));
    PhysicalField gmag(grid);
    for (size_t i = 0; i < gmag.values.size(); ++i)
      gmag.values[i] = std::hypot(gx.values[i], gy.values[i]);
    s.observed = eta(gmag, nodes);
    s.energy_master = detail::energy_of(master.omega);
    s.energy_slave = detail::energy_of(slave.omega);
    r.series.push_back(s);
  };
  record();
  double next = cfg.cadence;
  const double eps = 1e-12 * std::max(1.0, cfg.T);
  try {
    while (master.t < cfg.T - eps) {
      const double dt = std::min(icfg.dt, cfg.T - master.t);
      stepper.step(master, dt);
      stepper.step(slave, dt);
      couple(dt);
      if (master.t >= next - eps) {
        record();
        next += cfg.cadence;
      }
    }
  } catch (const BlowUpError& e) {
    throw std::runtime_error(std::string("nodes sync: ") + e.what());
  }
  if (r.series.empty() || r.series.back().t < cfg.T - eps) record();
  detail::finish_verdict(r, cfg.burn_in, cfg.tol_converged);
  return r;
}

// ---------------------------------------------------------------------------
// Nodal inequality estimates

/// Empirical estimates of c_eta in |u|^2 <= c_eta L^2 eta(u)^2
/// + c_eta L^4/N^2 |Lap u|^2 and |grad u|^2, |u|_inf^2 <= c_eta N eta(u)^2
/// + c_eta L^2/N |Lap u|^2: max over random trials of lhs/(term1 + term2)
/// with c_eta = 1. Recorded, not asserted.
inline std::pair<double, double> nodal_inequality_check(const GridSpec& grid,
                                                        const NodeSet& nodes,
                                                        int trials,
                                                        uint64_t seed_base = 7777) {
  const double L = grid.L;
  const double N = nodes.count();
  double max_l2 = 0.0, max_h1 = 0.0;
  for (int tr = 0; tr < trials; ++tr) {
    SpectralField u = random_field(
        seed_base + uint64_t(tr),
        [&](double k) {
          const double kk = k / grid.kappa0;
          return kk <= grid.n / 3.0 ? std::pow(1.0 + kk, -2.0) : 0.0;
        },
        grid);
    PhysicalField up = to_physical(u);
    const double e = eta(up, nodes);
    const double nu = norm_l2(u);
    if (nu == 0.0) continue;  // degenerate input skipped
    const double glap = norm_l2(laplacian(u));
    const double gnrm = sobolev_norm(u, 1.0);
    const double uinf = linf_norm(u);
    const double den_l2 = L * L * e * e + std::pow(L, 4.0) / (N * N) * glap * glap;
    const double den_h1 = N * e * e + L * L / N * glap * glap;
    if (den_l2 > 0.0) max_l2 = std::max(max_l2, nu * nu / den_l2);
    if (den_h1 > 0.0) {
      max_h1 = std::max(max_h1, gnrm * gnrm / den_h1);
      max_h1 = std::max(max_h1, uinf * uinf / den_h1);
    }
  }
  return {max_l2, max_h1};
}

// ---------------------------------------------------------------------------
// Empirical threshold search

struct ThresholdSearchResult {
  enum class Status { found, too_dissipative, inconclusive };
  Status status = Status::inconclusive;
  double threshold = 0.0;
  std::vector<std::pair<double, bool>> verdicts;  // (value, converged), eval order
};

/// Bisect a sorted sweep of coupling strengths (kappa or N) for the smallest
/// converged value. Aborts if the uncoupled control run converges (regime too
/// dissipative); reports inconclusive on non-monotone verdicts.
template <typename RunFn>
ThresholdSearchResult threshold_search(const std::vector<double>& sweep_values,
                                       RunFn&& run_at,  // double -> SyncResult
                                       const SyncResult& control) {
  ThresholdSearchResult res;
  if (control.converged) {
    res.status = ThresholdSearchResult::Status::too_dissipative;
    return res;
  }
  std::vector<double> vals = sweep_values;
  std::sort(vals.begin(), vals.end());
  std::vector<int> verdict(vals.size(), -1);  // -1 unknown, 0 no, 1 yes
  auto conv = [&](size_t i) {
    if (verdict[i] < 0) {
      const bool c = run_at(vals[i]).converged;
      verdict[i] = c ? 1 : 0;
      res.verdicts.emplace_back(vals[i], c);
    }
    return verdict[i] == 1;
  };
  size_t lo = 0, hi = vals.size() - 1;
  if (!conv(hi)) {
    res.status = ThresholdSearchResult::Status::inconclusive;
    return res;
  }
  if (conv(lo)) {
    res.status = ThresholdSearchResult::Status::found;
    res.threshold = vals[lo];
    return res;
  }
  while (hi - lo > 1) {
    const size_t mid = (lo + hi) / 2;
    if (conv(mid))
      hi = mid;
    else
      lo = mid;
  }
  // monotonicity check over everything evaluated
  for (size_t i = 0; i < vals.size(); ++i)
    for (size_t j = i + 1; j < vals.size(); ++j)
      if (verdict[i] == 1 && verdict[j] == 0) {
        res.status = ThresholdSearchResult::Status::inconclusive;
        return res;
      }
  res.status = ThresholdSearchResult::Status::found;
  res.threshold = vals[hi];
  return res;
}

// ---------------------------------------------------------------------------
// Zonalization scaling

struct ZonalizationRow {
  double eps = 0.0;
  double sup_nonzonal_sq = 0.0;    // sup_t |wtilde|^2 over [burn_in, T]
  double sup_window_diss = 0.0;    // sup_t mu int_t^{t+1} |grad wtilde|^2
  double bound = 0.0;              // eps * M0 / kappa0^2 (current constants)
  double ratio = 0.0;              // sup_nonzonal_sq / bound
};

/// For each eps, run the flow with the same forcing and initial data and
/// record the long-time size of the non-zonal part against eps*M0/kappa0^2.
inline std::vector<ZonalizationRow> zonalization_check(
    const SpectralField& forcing, const PhysicalParams& base_params,
    const std::vector<double>& eps_list, double T, double burn_in,
    const IntegratorConfig& icfg, const IcSpec& ic,
    const Constants& consts = Constants{}) {
  const GridSpec& grid = forcing.grid;
  const GrashofSet gs = grashof_set(forcing, base_params);
  const double M0 = m0(gs, consts);
  std::vector<ZonalizationRow> rows;
  for (double eps : eps_list) {
    PhysicalParams p = PhysicalParams::make(base_params.mu, eps, base_params.kappa0);
    Stepper stepper(grid, p, icfg, forcing);
    SimState s{0.0, detail::make_ic(ic, grid)};
    std::vector<std::pair<double, double>> diss_samples;  // (t, |grad wtilde|^2)
    double sup_nz = 0.0;
    Stepper::Observer obs{icfg.dt * 10.0, [&](const SimState& st) {
                            auto [wb, wt] = zonal_split(st.omega);
                            (void)wb;
                            if (st.t >= burn_in) {
                              const double nt = norm_l2(wt);
                              sup_nz = std::max(sup_nz, nt * nt);
                            }
                            const double g = sobolev_norm(wt, 1.0);
                            diss_samples.emplace_back(st.t, g * g);
                          }};
    stepper.integrate(s, T, {obs});
    // windowed dissipation sup over windows [t, t+1] inside [burn_in, T]
    double sup_w = 0.0;
    for (size_t i = 0; i < diss_samples.size(); ++i) {
      if (diss_samples[i].first < burn_in) continue;
      double acc = 0.0;
      size_t j = i;
      while (j + 1 < diss_samples.size() &&
             diss_samples[j + 1].first <= diss_samples[i].first + 1.0) {
        const double dt = diss_samples[j + 1].first - diss_samples[j].first;
        acc += 0.5 * dt * (diss_samples[j].second + diss_samples[j + 1].second);
        ++j;
      }
      if (diss_samples[j].first >= diss_samples[i].first + 1.0 - 1e-9)
        sup_w = std::max(sup_w, p.mu * acc);
    }
    ZonalizationRow row;
    row.eps = eps;
    row.sup_nonzonal_sq = sup_nz;
    row.sup_window_diss = sup_w;
    row.bound = eps * M0 / (grid.kappa0 * grid.kappa0);
    row.ratio = row.bound > 0.0 ? sup_nz / row.bound : 0.0;
    rows.push_back(row);
  }
  return rows;
}

// ---------------------------------------------------------------------------
// Difference-equation consistency

/// Integrate the difference equation
///   d(dw)/dt + J(psi_slave, dw) + J(dpsi, w) + (kappa0/eps) dx dpsi = mu Lap dw
/// directly, in lockstep with the (master, slave) pair, sharing the IFRK4
/// stages. Returns the max over observer ticks of
/// |dw_direct - (w - w_slave)| / |w - w_slave|.
inline double delta_consistency(const SimState& master0, const SimState& slave0,
                                const SpectralField& forcing,
                                const PhysicalParams& params,
                                const IntegratorConfig& icfg, double T,
                                double cadence = 0.5) {
  const GridSpec& grid = forcing.grid;
  Stepper stepper(grid, params, icfg, forcing);  // nonlinear evaluations

  SpectralField u = master0.omega, v = slave0.omega;
  SpectralField d = u - v;
  d.mean_zero = true;

  // difference-equation nonlinear term; linear part shares the symbol
  auto D = [&](const SpectralField& dd, const SpectralField& uu,
               const SpectralField& vv) {
    SpectralField out = jacobian(inv_laplacian(vv), dd);
    out += jacobian(inv_laplacian(dd), uu);
    out *= -1.0;
    out.at(0, 0) = Complex{0.0, 0.0};
    out.mean_zero = true;
    return out;
  };

  const double dt = icfg.dt;
  const std::vector<Complex> E = propagator(grid, params, 0.5 * dt);
  const std::vector<Complex> E2 = propagator(grid, params, dt);
  auto ap = [&](const std::vector<Complex>& P, SpectralField f) {
    for (size_t i = 0; i < f.c.size(); ++i) f.c[i] *= P[i];
    return f;
  };

  double t = master0.t;
  double max_res = 0.0;
  double next = t;
  const double eps = 1e-12 * std::max(1.0, T);
  while (true) {
    if (t >= next - eps) {
      SpectralField diff = d - (u - v);
      const double den = norm_l2(u - v);
      const double num = norm_l2(diff);
      max_res = std::max(max_res, den < 1e-14 ? num : num / den);
      next += cadence;
    }
    if (t >= T - eps) break;

    SpectralField k1u = stepper.nonlinear(u), k1v = stepper.nonlinear(v);
    SpectralField k1d = D(d, u, v);
    SpectralField u2 = ap(E, u + (0.5 * dt) * k1u), v2 = ap(E, v + (0.5 * dt) * k1v);
    SpectralField d2 = ap(E, d + (0.5 * dt) * k1d);
    SpectralField k2u = stepper.nonlinear(u2), k2v = stepper.nonlinear(v2);
    SpectralField k2d = D(d2, u2, v2);
    SpectralField u3 = ap(E, u) + (0.5 * dt) * k2u, v3 = ap(E, v) + (0.5 * dt) * k2v;
    SpectralField d3 = ap(E, d) + (0.5 * dt) * k2d;
    SpectralField k3u = stepper.nonlinear(u3), k3v = stepper.nonlinear(v3);
    SpectralField k3d = D(d3, u3, v3);
    SpectralField u4 = ap(E2, u) + dt * ap(E, k3u), v4 = ap(E2, v) + dt * ap(E, k3v);
    SpectralField d4 = ap(E2, d) + dt * ap(E, k3d);
    SpectralField k4u = stepper.nonlinear(u4), k4v = stepper.nonlinear(v4);
    SpectralField k4d = D(d4, u4, v4);

    u = ap(E2, u) + (dt / 6.0) * (ap(E2, k1u) + 2.0 * ap(E, k2u + k3u) + k4u);
    v = ap(E2, v) + (dt / 6.0) * (ap(E2, k1v) + 2.0 * ap(E, k2v + k3v) + k4v);
    d = ap(E2, d) + (dt / 6.0) * (ap(E2, k1d) + 2.0 * ap(E, k2d + k3d) + k4d);
    for (auto* f : {&u, &v, &d}) {
      f->at(0, 0) = Complex{0.0, 0.0};
      f->mean_zero = true;
    }
    t += dt;
  }
  return max_res;
}

}  // namespace bpns
