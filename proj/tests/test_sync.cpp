#include <doctest.h>

#include <cmath>
#include <numbers>

#include "bpns/sync.hpp"

using namespace bpns;
constexpr double pi = std::numbers::pi;

namespace {

GridSpec g2pi(int n) { return GridSpec::make(2.0 * pi, n); }

SpectralField small_forcing(const GridSpec& g) {
  SpectralField f(g, true);
  f.atk(0, 2) = Complex{0.0, -0.01};
  f.atk(0, -2) = Complex{0.0, 0.01};
  return f;
}

}  // namespace

TEST_CASE("node lattices and eta") {
  GridSpec g = g2pi(16);
  SUBCASE("construction rules") {
    NodeSet ns = NodeSet::regular(g, 16);
    CHECK(ns.side == 4);
    CHECK(ns.stride == 4);
    CHECK_THROWS_AS(NodeSet::regular(g, 15), std::invalid_argument);
    CHECK_THROWS_AS(NodeSet::regular(g, 36), std::invalid_argument);  // 6 !| 16
  }
  SUBCASE("eta examples") {
    NodeSet ns = NodeSet::regular(g, 16);
    PhysicalField z(g);
    CHECK(eta(z, ns) == 0.0);
    PhysicalField cx(g);
    for (int i = 0; i < g.n; ++i)
      for (int j = 0; j < g.n; ++j) cx.at(i, j) = std::cos(g.x(i));
    CHECK(eta(cx, ns) == doctest::Approx(1.0));  // node at x = 0
    PhysicalField r(g);
    uint64_t h = 3;
    for (auto& v : r.values) v = detail::unit_double(h = detail::splitmix64(h)) - 0.5;
    double gmax = 0.0;
    for (double v : r.values) gmax = std::max(gmax, std::abs(v));
    CHECK(eta(r, ns) <= gmax);
    // exact homogeneity
    PhysicalField r3 = r;
    for (auto& v : r3.values) v *= -3.0;
    CHECK(eta(r3, ns) == 3.0 * eta(r, ns));
  }
  SUBCASE("bilinear interpolant reproduces node values and constants") {
    NodeSet ns = NodeSet::regular(g, 16);
    PhysicalField u(g);
    uint64_t h = 8;
    for (auto& v : u.values) v = detail::unit_double(h = detail::splitmix64(h));
    PhysicalField iu = bilinear_interpolant(u, ns);
    for (int a = 0; a < ns.side; ++a)
      for (int b = 0; b < ns.side; ++b)
        CHECK(iu.at(a * ns.stride, b * ns.stride) ==
              doctest::Approx(u.at(a * ns.stride, b * ns.stride)).epsilon(1e-14));
    PhysicalField c(g);
    for (auto& v : c.values) v = 2.5;
    PhysicalField ic = bilinear_interpolant(c, ns);
    for (double v : ic.values) CHECK(v == doctest::Approx(2.5).epsilon(1e-14));
  }
}

TEST_CASE("modes synchronization") {
  GridSpec g = g2pi(32);
  PhysicalParams p = PhysicalParams::make(5e-3, 0.5, g.kappa0);
  IntegratorConfig icfg;
  icfg.dt = 0.02;
  SpectralField f = small_forcing(g);

  ModesSyncConfig cfg;
  cfg.T = 4.0;
  cfg.burn_in = 1.0;
  cfg.cadence = 0.2;
  cfg.ic_master.seed = 10;
  cfg.ic_slave.seed = 20;
  cfg.ic_master.amplitude = cfg.ic_slave.amplitude = 0.5;

  SUBCASE("identical seeds stay identical") {
    ModesSyncConfig c2 = cfg;
    c2.ic_slave = c2.ic_master;
    c2.kappa = 2.0;
    SyncResult r = run_modes_sync(c2, f, p, icfg);
    for (const auto& s : r.series) CHECK(s.delta_norm == 0.0);
    CHECK(r.converged);
  }
  SUBCASE("full replacement converges in one step") {
    ModesSyncConfig c2 = cfg;
    c2.kappa = g.n / 2 * g.kappa0 * 2.0;
    SyncResult r = run_modes_sync(c2, f, p, icfg);
    CHECK(r.series.back().delta_norm == 0.0);
    CHECK(r.converged);
  }
  SUBCASE("replace coupling pins the observed low modes to zero") {
    ModesSyncConfig c2 = cfg;
    c2.kappa = 2.0;
    SyncResult r = run_modes_sync(c2, f, p, icfg);
    for (const auto& s : r.series) CHECK(s.observed <= 1e-13);
  }
  SUBCASE("uncoupled control decays only viscously at nu0 = 1") {
    PhysicalParams pv = PhysicalParams::make(1.0, 0.5, g.kappa0);
    ModesSyncConfig c2 = cfg;
    c2.kappa = 0.0;
    c2.T = 3.0;
    IntegratorConfig ic2 = icfg;
    ic2.dt = 0.005;
    SyncResult r = run_modes_sync(c2, small_forcing(g), pv, ic2);
    const double d0 = r.series.front().delta_norm;
    for (const auto& s : r.series)
      CHECK(s.delta_norm <= d0 * std::exp(-pv.nu0 * s.t) * 1.3);
    CHECK(r.decay_rate < 0.0);
  }
  SUBCASE("determinism: rerun is bit-exact") {
    ModesSyncConfig c2 = cfg;
    c2.kappa = 2.0;
    c2.coupling = Coupling::nudge;
    c2.lambda = 5.0;
    SyncResult a = run_modes_sync(c2, f, p, icfg);
    SyncResult b = run_modes_sync(c2, f, p, icfg);
    REQUIRE(a.series.size() == b.series.size());
    for (size_t i = 0; i < a.series.size(); ++i) {
      CHECK(a.series[i].delta_norm == b.series[i].delta_norm);
      CHECK(a.series[i].energy_slave == b.series[i].energy_slave);
    }
  }
  SUBCASE("config validation") {
    ModesSyncConfig bad = cfg;
    bad.T = 0.5;  // below burn_in
    CHECK_THROWS_AS(run_modes_sync(bad, f, p, icfg), std::invalid_argument);
  }
}

TEST_CASE("nodes synchronization") {
  GridSpec g = g2pi(32);
  PhysicalParams p = PhysicalParams::make(5e-3, 0.5, g.kappa0);
  IntegratorConfig icfg;
  icfg.dt = 0.02;
  SpectralField f = small_forcing(g);

  NodesSyncConfig cfg;
  cfg.N = 64;
  cfg.lambda = 1.0;
  cfg.T = 4.0;
  cfg.burn_in = 1.0;
  cfg.cadence = 0.2;
  cfg.ic_master.seed = 10;
  cfg.ic_slave.seed = 20;
  cfg.ic_master.amplitude = cfg.ic_slave.amplitude = 0.5;

  SUBCASE("identical seeds stay identical") {
    NodesSyncConfig c2 = cfg;
    c2.ic_slave = c2.ic_master;
    SyncResult r = run_nodes_sync(c2, f, p, icfg);
    for (const auto& s : r.series) CHECK(s.delta_norm == 0.0);
  }
  SUBCASE("lambda = 0 matches the uncoupled modes run bit-for-bit") {
    NodesSyncConfig c2 = cfg;
    c2.lambda = 0.0;
    SyncResult rn = run_nodes_sync(c2, f, p, icfg);
    ModesSyncConfig mc;
    mc.kappa = 0.0;
    mc.T = cfg.T;
    mc.burn_in = cfg.burn_in;
    mc.cadence = cfg.cadence;
    mc.ic_master = cfg.ic_master;
    mc.ic_slave = cfg.ic_slave;
    SyncResult rm = run_modes_sync(mc, f, p, icfg);
    REQUIRE(rn.series.size() == rm.series.size());
    for (size_t i = 0; i < rn.series.size(); ++i)
      CHECK(rn.series[i].delta_norm == rm.series[i].delta_norm);
  }
  SUBCASE("dense nodes with strong gain contract the difference") {
    NodesSyncConfig c2 = cfg;
    c2.N = g.n * g.n;  // every collocation point
    c2.lambda = 1.0 / icfg.dt;
    c2.T = 2.0;
    SyncResult r = run_nodes_sync(c2, f, p, icfg);
    CHECK(r.series.back().delta_norm <= 1e-6 * r.series.front().delta_norm);
    CHECK(r.series.back().observed <= 1e-6 * r.series.front().observed);
  }
}

TEST_CASE("nodal inequality estimates") {
  GridSpec g = g2pi(32);
  NodeSet ns = NodeSet::regular(g, 64);
  auto [l2_500, h1_500] = nodal_inequality_check(g, ns, 500);
  auto [l2_1000, h1_1000] = nodal_inequality_check(g, ns, 1000);
  CHECK(l2_500 > 0.0);
  CHECK(h1_500 > 0.0);
  CHECK(std::isfinite(l2_1000));
  CHECK(std::isfinite(h1_1000));
  CHECK(std::abs(l2_1000 - l2_500) <= 0.2 * l2_1000);
  CHECK(std::abs(h1_1000 - h1_500) <= 0.2 * h1_1000);
  MESSAGE("empirical c_eta estimates: L2 " << l2_1000 << ", H1 " << h1_1000);
}

TEST_CASE("threshold search") {
  auto fake_run = [](bool converged) {
    SyncResult r;
    r.converged = converged;
    return r;
  };
  SyncResult control_bad = fake_run(false);
  SUBCASE("two-point bracket") {
    auto run_at = [&](double v) { return fake_run(v >= 10.0); };
    auto res = threshold_search({0.0, 10.0}, run_at, control_bad);
    CHECK(res.status == ThresholdSearchResult::Status::found);
    CHECK(res.threshold == 10.0);
  }
  SUBCASE("bisection finds the boundary") {
    auto run_at = [&](double v) { return fake_run(v >= 6.0); };
    auto res = threshold_search({1, 2, 4, 6, 8, 12, 16}, run_at, control_bad);
    CHECK(res.status == ThresholdSearchResult::Status::found);
    CHECK(res.threshold == 6.0);
  }
  SUBCASE("dissipative control aborts") {
    auto run_at = [&](double) { return fake_run(true); };
    auto res = threshold_search({1.0, 2.0}, run_at, fake_run(true));
    CHECK(res.status == ThresholdSearchResult::Status::too_dissipative);
  }
  SUBCASE("nothing converges -> inconclusive") {
    auto run_at = [&](double) { return fake_run(false); };
    auto res = threshold_search({1.0, 2.0, 4.0}, run_at, control_bad);
    CHECK(res.status == ThresholdSearchResult::Status::inconclusive);
  }
}

TEST_CASE("zonalization invariant subspace") {
  GridSpec g = g2pi(32);
  PhysicalParams p = PhysicalParams::make(5e-3, 0.2, g.kappa0);
  IntegratorConfig icfg;
  icfg.dt = 0.02;
  SpectralField f = small_forcing(g);  // purely zonal
  IcSpec ic;
  ic.amplitude = 0.0;  // zonal initial data (zero non-zonal part)
  auto rows = zonalization_check(f, p, {0.5, 0.25}, 8.0, 2.0, icfg, ic);
  REQUIRE(rows.size() == 2);
  for (const auto& r : rows) {
    CHECK(r.sup_nonzonal_sq <= 1e-20);
    CHECK(std::isfinite(r.ratio));
    CHECK(r.bound > 0.0);
  }
}

TEST_CASE("difference-equation consistency") {
  GridSpec g = g2pi(32);
  PhysicalParams p = PhysicalParams::make(5e-3, 0.5, g.kappa0);
  IntegratorConfig icfg;
  icfg.dt = 0.02;
  SpectralField f = small_forcing(g);
  SUBCASE("zero difference stays zero") {
    SimState m{0.0, detail::make_ic({10, 0.5, 1.0, 3.0, false}, g)};
    SimState s = m;
    CHECK(delta_consistency(m, s, f, p, icfg, 2.0) <= 1e-12);
  }
  SUBCASE("linear regime residual at round-off") {
    SpectralField zero_f(g, true);
    SimState m{0.0, detail::make_ic({10, 1e-9, 1.0, 3.0, false}, g)};
    SimState s{0.0, detail::make_ic({20, 1e-9, 1.0, 3.0, false}, g)};
    CHECK(delta_consistency(m, s, zero_f, p, icfg, 2.0) <= 1e-10);
  }
  SUBCASE("nonlinear regime stays at rounding level") {
    SimState m{0.0, detail::make_ic({10, 0.5, 1.0, 3.0, false}, g)};
    SimState s{0.0, detail::make_ic({20, 0.5, 1.0, 3.0, false}, g)};
    CHECK(delta_consistency(m, s, f, p, icfg, 5.0) <= 1e-8);
  }
}
