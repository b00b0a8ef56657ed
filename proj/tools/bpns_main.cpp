// bpns: beta-plane Navier-Stokes experiments
//
// Subcommands: simulate, sync-modes, sync-nodes, thresholds, sweep,
// check-bounds. Exit codes: 0 success, 2 config error, 3 numerical blow-up,
// 4 inconclusive threshold search.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "bpns/io.hpp"
#include "bpns/sync.hpp"

namespace fs = std::filesystem;
using namespace bpns;

namespace {

struct CliOptions {
  std::string config_path;
  std::string out_dir = ".";
  std::optional<uint64_t> seed_override;
  bool quiet = false;
};

RunConfig load_config(const CliOptions& opt, const std::string& subcommand) {
  std::ifstream in(opt.config_path);
  if (!in) throw ConfigError("cannot open config file: " + opt.config_path);
  std::stringstream ss;
  ss << in.rdbuf();
  RunConfig cfg = parse_config(ss.str());
  if (cfg.exp.type != subcommand)
    throw ConfigError("config experiment.type '" + cfg.exp.type +
                      "' does not match subcommand '" + subcommand + "'");
  if (opt.seed_override) cfg.exp.ic_seed = *opt.seed_override;
  return cfg;
}

std::string series_path(const CliOptions& opt, const RunConfig& cfg) {
  fs::create_directories(opt.out_dir);
  return (fs::path(opt.out_dir) / cfg.output.series).string();
}

double resolve_dt(const RunConfig& cfg, const SpectralField& ic) {
  if (cfg.integrator.dt > 0.0) return cfg.integrator.dt;
  // velocity scale from the initial streamfunction gradient
  SpectralField psi = inv_laplacian(ic);
  PhysicalField vx = to_physical(deriv_y(psi)), vy = to_physical(deriv_x(psi));
  double vmax = 0.0;
  for (size_t i = 0; i < vx.values.size(); ++i)
    vmax = std::max(vmax, std::hypot(vx.values[i], vy.values[i]));
  return default_dt(cfg.grid, cfg.params, std::max(vmax, 1e-6));
}

IcSpec ic_from(const RunConfig& cfg, uint64_t seed) {
  IcSpec ic;
  ic.seed = seed;
  ic.amplitude = cfg.exp.ic_amplitude;
  ic.kmin = cfg.exp.ic_kmin;
  ic.kmax = cfg.exp.ic_kmax;
  ic.y_antisym = cfg.integrator.enforce_symmetry;
  return ic;
}

json sync_summary(const SyncResult& r) {
  return {{"converged", r.converged},
          {"decay_rate", r.decay_rate},
          {"delta_at_burn_in", r.delta_at_burn_in},
          {"delta_at_end", r.delta_at_end}};
}

void write_sync_series(SeriesWriter& w, const SyncResult& r, const char* observed_name) {
  for (const auto& s : r.series) {
    w.record({{"t", s.t},
              {"delta_norm", s.delta_norm},
              {observed_name, s.observed},
              {"energy_master", s.energy_master},
              {"energy_slave", s.energy_slave}});
  }
}

int cmd_simulate(const CliOptions& opt) {
  RunConfig cfg = load_config(opt, "simulate");
  SpectralField f = build_forcing(cfg.forcing);
  SimState state{0.0, detail::make_ic(ic_from(cfg, cfg.exp.ic_seed), cfg.grid)};
  IntegratorConfig icfg = cfg.integrator;
  icfg.dt = resolve_dt(cfg, state.omega);
  Stepper stepper(cfg.grid, cfg.params, icfg, f);
  SeriesWriter w(series_path(opt, cfg), cfg);
  const double kappa_f_diag = 4.0 * cfg.grid.kappa0;
  long records = 0;
  Stepper::Observer obs{cfg.exp.cadence, [&](const SimState& s) {
                          DiagRecord d = diagnostics(s, cfg.params, kappa_f_diag);
                          w.record({{"t", d.t},
                                    {"energy", d.energy},
                                    {"enstrophy", d.enstrophy},
                                    {"palinstrophy", d.palinstrophy},
                                    {"zonal_enstrophy", d.zonal_enstrophy},
                                    {"nonzonal_enstrophy", d.nonzonal_enstrophy},
                                    {"highpass_zonal", d.highpass_zonal},
                                    {"beta_flux", d.beta_flux}});
                          ++records;
                        }};
  stepper.integrate(state, cfg.exp.T, {obs});
  if (cfg.output.snapshot_final)
    write_snapshot((fs::path(opt.out_dir) / "final.bpns").string(), state);
  w.summary({{"t_final", state.t}, {"records", records}, {"dt", icfg.dt}});
  if (!opt.quiet)
    std::printf("simulate: t = %g, %ld records, dt = %g\n", state.t, records, icfg.dt);
  return 0;
}

int cmd_sync_modes(const CliOptions& opt) {
  RunConfig cfg = load_config(opt, "sync-modes");
  SpectralField f = build_forcing(cfg.forcing);
  ModesSyncConfig mc;
  mc.kappa = cfg.exp.kappa * cfg.grid.kappa0;
  mc.coupling = cfg.exp.coupling == "nudge" ? Coupling::nudge : Coupling::replace;
  mc.lambda = cfg.exp.lambda;
  mc.T = cfg.exp.T;
  mc.burn_in = cfg.burn_in_resolved();
  mc.cadence = cfg.exp.cadence;
  mc.ic_master = ic_from(cfg, cfg.exp.ic_seed);
  mc.ic_slave = ic_from(cfg, cfg.exp.ic_seed2);
  IntegratorConfig icfg = cfg.integrator;
  icfg.dt = resolve_dt(cfg, detail::make_ic(mc.ic_master, cfg.grid));
  SyncResult r = run_modes_sync(mc, f, cfg.params, icfg);
  SeriesWriter w(series_path(opt, cfg), cfg);
  write_sync_series(w, r, "observed_low_mode_norm");
  w.summary(sync_summary(r));
  if (!opt.quiet)
    std::printf("sync-modes: %s, decay rate %.4g\n",
                r.converged ? "converged" : "not_converged", r.decay_rate);
  return 0;
}

int cmd_sync_nodes(const CliOptions& opt) {
  RunConfig cfg = load_config(opt, "sync-nodes");
  SpectralField f = build_forcing(cfg.forcing);
  NodesSyncConfig nc;
  nc.N = cfg.exp.N;
  nc.lambda = cfg.exp.lambda;
  nc.T = cfg.exp.T;
  nc.burn_in = cfg.burn_in_resolved();
  nc.cadence = cfg.exp.cadence;
  nc.ic_master = ic_from(cfg, cfg.exp.ic_seed);
  nc.ic_slave = ic_from(cfg, cfg.exp.ic_seed2);
  IntegratorConfig icfg = cfg.integrator;
  icfg.dt = resolve_dt(cfg, detail::make_ic(nc.ic_master, cfg.grid));
  SyncResult r = run_nodes_sync(nc, f, cfg.params, icfg);
  SeriesWriter w(series_path(opt, cfg), cfg);
  write_sync_series(w, r, "eta_grad_delta_psi");
  w.summary(sync_summary(r));
  if (!opt.quiet)
    std::printf("sync-nodes: %s, decay rate %.4g\n",
                r.converged ? "converged" : "not_converged", r.decay_rate);
  return 0;
}

json report_to_json(const char* kind, const ThresholdReport& r) {
  return {{"kind", kind},
          {"case", r.forcing_case},
          {"kappa_over_kappa0", r.kappa_over_kappa0},
          {"N_nodes", r.N_nodes},
          {"kappa_f_over_kappa0", r.kappa_f_over_kappa0},
          {"epsilon_valid", r.epsilon_valid},
          {"classical_kappa", r.classical_kappa},
          {"classical_N", r.classical_N}};
}

int cmd_thresholds(const CliOptions& opt) {
  RunConfig cfg = load_config(opt, "thresholds");
  SpectralField f = build_forcing(cfg.forcing);
  ThresholdInputs in;
  in.eps = cfg.params.epsilon;
  in.gs = grashof_set(f, cfg.params);
  in.consts = cfg.consts;
  in.nu0 = cfg.params.nu0;
  if (const auto* b = std::get_if<BandLimited>(&cfg.forcing.zonal_class)) {
    in.forcing_case = "band";
    in.kappa_f_over_k0 = b->kappa_f / cfg.grid.kappa0;
  } else if (const auto* a = std::get_if<Algebraic>(&cfg.forcing.zonal_class)) {
    in.forcing_case = "algebraic";
    in.alpha_or_s = a->s;
  } else {
    in.forcing_case = "analytic";
    in.alpha_or_s = std::get<Analytic>(cfg.forcing.zonal_class).alpha;
  }

  SeriesWriter w(series_path(opt, cfg), cfg);
  const std::string kind = cfg.exp.threshold_kind;
  auto print_report = [&](const char* name, const ThresholdReport& r) {
    w.record(report_to_json(name, r));
    if (opt.quiet) return;
    std::printf("--- %s thresholds (%s forcing) ---\n", name, r.forcing_case.c_str());
    std::printf("  G0=%.6g G1=%.6g G2=%.6g G3=%.6g  M0=%.6g\n", in.gs.G0, in.gs.G1,
                in.gs.G2, in.gs.G3, m0(in.gs, in.consts));
    if (r.kappa_over_kappa0 > 0.0)
      std::printf("  kappa/kappa0 > %.6g\n", r.kappa_over_kappa0);
    if (r.N_nodes > 0.0) std::printf("  N > %.6g\n", r.N_nodes);
    std::printf("  balanced kappa_f/kappa0 = %.6g\n", r.kappa_f_over_kappa0);
    std::printf("  epsilon smallness %s\n", r.epsilon_valid ? "satisfied" : "NOT satisfied");
    std::printf("  classical: kappa/kappa0 >= %.6g, N >= %.6g\n", r.classical_kappa,
                r.classical_N);
  };
  if (kind == "modes" || kind == "both") print_report("modes", modes_threshold(in));
  if (kind == "nodes" || kind == "both") print_report("nodes", nodes_threshold(in));
  if (kind != "modes" && kind != "nodes" && kind != "both")
    throw ConfigError("experiment.threshold_kind must be modes, nodes or both");
  w.summary({{"threshold_kind", kind}});
  return 0;
}

int cmd_sweep(const CliOptions& opt) {
  RunConfig cfg = load_config(opt, "sweep");
  if (cfg.exp.sweep_values.empty())
    throw ConfigError("sweep requires experiment.sweep_values");
  SpectralField f = build_forcing(cfg.forcing);
  IntegratorConfig icfg = cfg.integrator;
  icfg.dt = resolve_dt(cfg, detail::make_ic(ic_from(cfg, cfg.exp.ic_seed), cfg.grid));
  SeriesWriter w(series_path(opt, cfg), cfg);

  const bool modes = cfg.exp.sweep_family == "modes";
  auto run_at = [&](double value) {
    if (modes) {
      ModesSyncConfig mc;
      mc.kappa = value * cfg.grid.kappa0;
      mc.coupling = cfg.exp.coupling == "nudge" ? Coupling::nudge : Coupling::replace;
      mc.lambda = cfg.exp.lambda;
      mc.T = cfg.exp.T;
      mc.burn_in = cfg.burn_in_resolved();
      mc.cadence = cfg.exp.cadence;
      mc.ic_master = ic_from(cfg, cfg.exp.ic_seed);
      mc.ic_slave = ic_from(cfg, cfg.exp.ic_seed2);
      return run_modes_sync(mc, f, cfg.params, icfg);
    }
    NodesSyncConfig nc;
    nc.N = int(std::lround(value));
    nc.lambda = cfg.exp.lambda > 0.0 ? cfg.exp.lambda : 1.0;
    nc.T = cfg.exp.T;
    nc.burn_in = cfg.burn_in_resolved();
    nc.cadence = cfg.exp.cadence;
    nc.ic_master = ic_from(cfg, cfg.exp.ic_seed);
    nc.ic_slave = ic_from(cfg, cfg.exp.ic_seed2);
    return run_nodes_sync(nc, f, cfg.params, icfg);
  };

  // uncoupled control: kappa = 0 / lambda = 0
  SyncResult control;
  {
    ModesSyncConfig mc;
    mc.kappa = 0.0;
    mc.T = cfg.exp.T;
    mc.burn_in = cfg.burn_in_resolved();
    mc.cadence = cfg.exp.cadence;
    mc.ic_master = ic_from(cfg, cfg.exp.ic_seed);
    mc.ic_slave = ic_from(cfg, cfg.exp.ic_seed2);
    control = run_modes_sync(mc, f, cfg.params, icfg);
  }
  w.record({{"control_converged", control.converged},
            {"control_delta_end", control.delta_at_end}});

  ThresholdSearchResult res = threshold_search(cfg.exp.sweep_values, run_at, control);
  for (const auto& [v, c] : res.verdicts)
    w.record({{"value", v}, {"converged", c}});

  std::string status;
  switch (res.status) {
    case ThresholdSearchResult::Status::found: status = "found"; break;
    case ThresholdSearchResult::Status::too_dissipative: status = "too_dissipative"; break;
    default: status = "inconclusive";
  }
  w.summary({{"status", status}, {"threshold", res.threshold}});
  if (!opt.quiet)
    std::printf("sweep: %s%s\n", status.c_str(),
                res.status == ThresholdSearchResult::Status::found
                    ? (" at " + std::to_string(res.threshold)).c_str()
                    : "");
  return res.status == ThresholdSearchResult::Status::found ? 0 : 4;
}

int cmd_check_bounds(const CliOptions& opt) {
  RunConfig cfg = load_config(opt, "check-bounds");
  SpectralField f = build_forcing(cfg.forcing);
  const GrashofSet gs = grashof_set(f, cfg.params);
  const double M0 = m0(gs, cfg.consts);
  SimState state{0.0, detail::make_ic(ic_from(cfg, cfg.exp.ic_seed), cfg.grid)};
  IntegratorConfig icfg = cfg.integrator;
  icfg.dt = resolve_dt(cfg, state.omega);
  Stepper stepper(cfg.grid, cfg.params, icfg, f);
  SeriesWriter w(series_path(opt, cfg), cfg);

  const double burn_in = cfg.burn_in_resolved();
  ExpWeightedIntegral palin_int{cfg.params.nu0, 0.0};     // int |grad w|^2 e^{nu0(tau-t)}
  ExpWeightedIntegral nz_diss_int{cfg.params.nu0, 0.0};   // int |grad wtilde|^2 e^{...}
  double last_t = 0.0;
  double sup_nz = 0.0;
  Stepper::Observer obs{cfg.exp.cadence, [&](const SimState& s) {
    const double dt = s.t - last_t;
    last_t = s.t;
    auto [wb, wt] = zonal_split(s.omega);
    (void)wb;
    const double g = sobolev_norm(s.omega, 1.0);
    const double gt = sobolev_norm(wt, 1.0);
    const double nt = norm_l2(wt);
    if (dt > 0.0) {
      palin_int.add(g * g, dt);
      nz_diss_int.add(gt * gt, dt);
    }
    if (s.t >= burn_in) sup_nz = std::max(sup_nz, nt * nt);
    // enstrophy-bound and zonalization-bound monitors; observational only,
    // since the bound constants are not pinned down
    const double wgm_rhs = gs.G0 * gs.G0 * std::pow(cfg.params.mu * cfg.grid.kappa0, 2.0);
    const double aw_rhs = cfg.params.epsilon * M0 / (cfg.grid.kappa0 * cfg.grid.kappa0);
    const double nw = norm_l2(s.omega);
    w.record({{"t", s.t},
              {"enstrophy", 0.5 * nw * nw},
              {"exp_int_palinstrophy", cfg.params.mu * palin_int.value},
              {"wgm_m0_lhs", nw * nw + cfg.params.mu * palin_int.value},
              {"wgm_m0_scale", wgm_rhs},
              {"nonzonal_sq", nt * nt},
              {"thm23_lhs", nt * nt + cfg.params.mu * nz_diss_int.value},
              {"thm23_scale", aw_rhs}});
  }};
  stepper.integrate(state, cfg.exp.T, {obs});

  if (!cfg.exp.eps_list.empty()) {
    auto rows = zonalization_check(f, cfg.params, cfg.exp.eps_list, cfg.exp.T, burn_in,
                                   icfg, ic_from(cfg, cfg.exp.ic_seed), cfg.consts);
    for (const auto& r : rows)
      w.record({{"zonalization_eps", r.eps},
                {"sup_nonzonal_sq", r.sup_nonzonal_sq},
                {"sup_window_dissipation", r.sup_window_diss},
                {"bound", r.bound},
                {"ratio", r.ratio}});
  }
  w.summary({{"t_final", state.t}, {"sup_nonzonal_sq", sup_nz}});
  if (!opt.quiet) std::printf("check-bounds: t = %g, sup |wtilde|^2 = %g\n", state.t, sup_nz);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"beta-plane Navier-Stokes solver and determining-modes experiments"};
  app.require_subcommand(1);
  CliOptions opt;

  std::map<std::string, int (*)(const CliOptions&)> handlers = {
      {"simulate", cmd_simulate},       {"sync-modes", cmd_sync_modes},
      {"sync-nodes", cmd_sync_nodes},   {"thresholds", cmd_thresholds},
      {"sweep", cmd_sweep},             {"check-bounds", cmd_check_bounds}};

  for (auto& [name, fn] : handlers) {
    CLI::App* sub = app.add_subcommand(name);
    sub->add_option("--config", opt.config_path, "run configuration file")->required();
    sub->add_option("--out", opt.out_dir, "output directory");
    sub->add_option("--seed", opt.seed_override, "override experiment.ic_seed");
    sub->add_flag("--quiet", opt.quiet, "suppress stdout");
  }

  CLI11_PARSE(app, argc, argv);
  const std::string name = app.get_subcommands().front()->get_name();
  try {
    return handlers.at(name)(opt);
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const BlowUpError& e) {
    std::fprintf(stderr, "%s\n", e.what());
    return 3;
  } catch (const std::exception& e) {
    const std::string msg = e.what();
    if (msg.find("blow-up") != std::string::npos) {
      std::fprintf(stderr, "%s\n", msg.c_str());
      return 3;
    }
    std::fprintf(stderr, "error: %s\n", msg.c_str());
    return 1;
  }
}
