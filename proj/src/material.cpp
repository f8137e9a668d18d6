#include "pumpd/material.hpp"

#include <cmath>

#include "pumpd/errors.hpp"

namespace pumpd {

std::pair<double, double> derive_pd_constants(double E, double Gc) {
  if (!(E > 0.0)) throw ConfigError("invalid-parameter: E must be > 0");
  if (!(Gc > 0.0)) throw ConfigError("invalid-parameter: Gc must be > 0");
  const double nu = 1.0 / 3.0;
  double C = M_PI * Gc / 4.0;
  double beta = 4.0 * E * nu / (C * (1.0 - nu) * (1.0 - 2.0 * nu));
  return {C, beta};
}

std::pair<double, double> lame_constants(double E, double nu) {
  if (!(E > 0.0)) throw ConfigError("invalid-parameter: E must be > 0");
  if (!(nu > 0.0 && nu < 0.5)) throw ConfigError("invalid-parameter: nu must lie in (0, 1/2)");
  double lambda = E * nu / ((1.0 + nu) * (1.0 - 2.0 * nu));
  double mu = E / (2.0 * (1.0 + nu));
  return {lambda, mu};
}

MaterialParams MaterialParams::make(double E, double Gc, double rho, double nu) {
  if (!(rho > 0.0)) throw ConfigError("invalid-parameter: rho must be > 0");
  if (nu != 1.0 / 3.0)
    throw ConfigError("invalid-parameter: the bond-based model requires nu = 1/3 exactly");
  auto [C, beta] = derive_pd_constants(E, Gc);
  auto [lambda, mu] = lame_constants(E, nu);
  return MaterialParams{E, nu, Gc, rho, C, beta, lambda, mu};
}

}  // namespace pumpd
