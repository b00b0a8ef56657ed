#include <doctest.h>

#include <cmath>
#include <numbers>

#include "bpns/forcing.hpp"

using namespace bpns;
constexpr double pi = std::numbers::pi;

namespace {

ForcingSpec base_spec(const ZonalClass& cls, double g0, int n = 64) {
  ForcingSpec s;
  s.zonal_class = cls;
  s.G0_target = g0;
  s.grid = GridSpec::make(2.0 * pi, n);
  s.params = PhysicalParams::make(1e-2, 0.1, s.grid.kappa0);
  return s;
}

}  // namespace

TEST_CASE("Riemann zeta") {
  CHECK(zeta(2.0) == doctest::Approx(pi * pi / 6.0).epsilon(1e-13));
  CHECK(zeta(4.0) == doctest::Approx(std::pow(pi, 4.0) / 90.0).epsilon(1e-13));
  CHECK(zeta(30.0) - 1.0 < 1e-9);
  CHECK(zeta(30.0) > 1.0);
  CHECK(zeta(2.0) > zeta(3.0));  // monotone decreasing toward 1
  CHECK_THROWS_AS(zeta(1.0), std::invalid_argument);
}

TEST_CASE("zonal class construction") {
  SUBCASE("band-limited with kappa_f = kappa0 has one sine mode") {
    ForcingSpec s = base_spec(BandLimited{1.0}, 5.0, 32);
    SpectralField f = build_forcing(s);
    CHECK(std::abs(f.atk(0, 1)) > 0.0);
    CHECK(std::abs(f.atk(0, -1)) > 0.0);
    for (int k = 2; k < s.grid.n / 2; ++k) {
      CHECK(std::abs(f.atk(0, k)) == 0.0);
      CHECK(std::abs(f.atk(0, -k)) == 0.0);
    }
    // normalized with equality
    CHECK(normalization_check(f, s.params) == doctest::Approx(5.0).epsilon(1e-12));
  }
  SUBCASE("analytic decay ratio e^{-alpha}") {
    SpectralField f = build_forcing(base_spec(Analytic{1.0}, 10.0));
    const double r = std::abs(f.atk(0, 2)) / std::abs(f.atk(0, 1));
    CHECK(r == doctest::Approx(std::exp(-1.0)).epsilon(1e-12));
  }
  SUBCASE("algebraic decay ratio 2^{-s}") {
    SpectralField f = build_forcing(base_spec(Algebraic{3.0}, 10.0));
    const double r = std::abs(f.atk(0, 2)) / std::abs(f.atk(0, 1));
    CHECK(r == doctest::Approx(std::pow(2.0, -3.0)).epsilon(1e-12));
  }
  SUBCASE("invalid class parameters rejected") {
    CHECK_THROWS_AS(build_forcing(base_spec(Algebraic{2.0}, 1.0)), std::invalid_argument);
    CHECK_THROWS_AS(build_forcing(base_spec(Analytic{0.0}, 1.0)), std::invalid_argument);
  }
}

TEST_CASE("forcing symmetries") {
  ForcingSpec s = base_spec(Analytic{0.7}, 8.0);
  NonZonalSpec nz;
  nz.amplitude = 0.01;
  nz.kmin = 1.0;
  nz.kmax = 3.0;
  nz.seed = 5;
  s.nonzonal = nz;
  SpectralField f = build_forcing(s);
  CHECK(f.mean_zero);
  CHECK(std::abs(f.at(0, 0)) == 0.0);
  CHECK(hermitian_defect(f) < 1e-14);
  SpectralField odd = enforce_y_antisymmetry(f);
  CHECK(norm_l2(odd - f) <= 1e-14 * norm_l2(f));
  // the non-zonal part does not change the zonal class magnitudes
  SpectralField fz = build_forcing(base_spec(Analytic{0.7}, 8.0));
  auto [fb, ft] = zonal_split(f);
  CHECK(norm_l2(fb - fz) < 1e-14);
  CHECK(norm_l2(ft) > 0.0);
}

TEST_CASE("normalization check") {
  ForcingSpec s = base_spec(Analytic{1.0}, 10.0, 128);
  SUBCASE("zero field and homogeneity") {
    SpectralField z(s.grid, true);
    CHECK(normalization_check(z, s.params) == 0.0);
    SpectralField f = build_forcing(s);
    const double v = normalization_check(f, s.params);
    SpectralField f2 = f;
    f2 *= 2.0;
    CHECK(normalization_check(f2, s.params) == doctest::Approx(2.0 * v).epsilon(1e-12));
  }
  SUBCASE("analytic class built at the bound stays within G0") {
    const double v = normalization_check(build_forcing(s), s.params);
    CHECK(v > 0.0);
    CHECK(v <= 10.0 * (1.0 + 1e-12));
  }
  SUBCASE("algebraic class stays within G0") {
    ForcingSpec a = base_spec(Algebraic{3.0}, 7.0, 128);
    const double v = normalization_check(build_forcing(a), a.params);
    CHECK(v > 0.0);
    CHECK(v <= 7.0 * (1.0 + 1e-12));
  }
}

TEST_CASE("high-pass tail bounds") {
  SUBCASE("algebraic: |grad^{-1} fbar^{>f}|^2 against the zeta tail bound") {
    const double svals[] = {2.6, 3.0, 4.0};
    for (double s : svals) {
      ForcingSpec sp = base_spec(Algebraic{s}, 9.0, 128);
      SpectralField f = build_forcing(sp);
      const double nu0 = sp.params.nu0, k0 = sp.grid.kappa0, G0 = sp.G0_target;
      for (double kf : {1.0, 2.0, 4.0, 8.0}) {
        SpectralField tail = project_high(zonal_split(f).first, kf * k0);
        const double lhs = std::pow(coeff_norm(tail, -1.0), 2.0);
        const double rhs = std::pow(nu0, 4.0) * std::pow(1.0 / kf, 2.0 * s + 1.0) /
                           ((2.0 * s + 1.0) * zeta(2.0 * s + 2.0)) * G0 * G0 /
                           std::pow(k0, 4.0);
        CHECK(lhs <= rhs * (1.0 + 1e-10));
      }
    }
  }
  SUBCASE("analytic: exponential tail bound") {
    ForcingSpec sp = base_spec(Analytic{1.3}, 6.0, 128);
    SpectralField f = build_forcing(sp);
    const double nu0 = sp.params.nu0, k0 = sp.grid.kappa0, G0 = sp.G0_target;
    const double alpha = 1.3;
    for (double kf : {1.0, 2.0, 4.0, 8.0}) {
      SpectralField tail = project_high(zonal_split(f).first, kf * k0);
      const double lhs = std::pow(coeff_norm(tail, -1.0), 2.0);
      const double rhs = std::pow(nu0, 4.0) / std::pow(k0, 4.0) *
                         std::exp(2.0 * alpha * (1.0 - kf)) * G0 * G0;
      CHECK(lhs <= rhs * (1.0 + 1e-10));
    }
  }
}
