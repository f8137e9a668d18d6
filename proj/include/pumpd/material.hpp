#pragma once

#include <utility>

namespace pumpd {

// Isotropic elastic constants plus the derived constants of the bond-based
// softening model. Plane strain throughout; the bond-based model restricts
// Poisson's ratio to exactly 1/3.
//
// Immutable after construction; freely shareable across threads.
struct MaterialParams {
  double E;        // Young's modulus [Pa]
  double nu;       // Poisson's ratio, fixed 1/3
  double Gc;       // critical energy release rate [J/m^2]
  double rho;      // mass density [kg/m^3]
  double C;        // softening potential amplitude [J/m^2]
  double beta;     // softening exponent [1/m]
  double lambda;   // first Lame constant [Pa]
  double mu_lame;  // shear modulus [Pa]

  static MaterialParams make(double E, double Gc, double rho, double nu = 1.0 / 3.0);
};

// C = pi*Gc/4, beta = 4*E*nu / (C*(1-nu)*(1-2nu)) at nu = 1/3 (i.e. 6E/C).
// Throws ConfigError for non-positive inputs.
std::pair<double, double> derive_pd_constants(double E, double Gc);

// Standard isotropic conversion. Requires E > 0 and 0 < nu < 1/2.
std::pair<double, double> lame_constants(double E, double nu);

}  // namespace pumpd
