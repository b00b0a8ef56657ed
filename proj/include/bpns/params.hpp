#pragma once

#include <cstdio>
#include <stdexcept>

namespace bpns {

/// Nondimensional parameter set of the vorticity equation
///   dw/dt + J(psi,w) + (kappa0/eps) dpsi/dx = mu Lap w + f.
struct PhysicalParams {
  double mu = 1e-2;       // viscosity (length^2)
  double epsilon = 1.0;   // inverse rotation rate, > 0
  double kappa0 = 1.0;    // fundamental wavenumber 2*pi/L
  double nu0 = 1e-2;      // mu * kappa0^2

  static PhysicalParams make(double mu, double epsilon, double kappa0) {
    if (!(mu > 0.0)) throw std::invalid_argument("PhysicalParams: mu must be > 0");
    if (!(epsilon > 0.0))
      throw std::invalid_argument("PhysicalParams: epsilon must be > 0");
    PhysicalParams p;
    p.mu = mu;
    p.epsilon = epsilon;
    p.kappa0 = kappa0;
    p.nu0 = mu * kappa0 * kappa0;
    if (p.nu0 > 1.0)
      std::fprintf(stderr, "warning: nu0 = %g exceeds 1; bound monitors assume nu0 <= 1\n",
                   p.nu0);
    return p;
  }
};

}  // namespace bpns
