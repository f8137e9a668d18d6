#pragma once

#include <cmath>
#include <span>

#include "pumpd/errors.hpp"
#include "pumpd/geometry.hpp"
#include "pumpd/material.hpp"

namespace pumpd {

// Interaction radius and the 2D measure of the horizon disc.
struct HorizonGeometry {
  double delta;    // horizon radius [m]
  double measure;  // pi * delta^2 [m^2]

  explicit HorizonGeometry(double delta_);
};

// A single reference bond between two material points.
// softened is a monotone history flag: set once |S| first exceeds the
// critical stretch, never reset within a local solve.
struct Bond {
  Vec2 dx;        // reference offset y - x [m]
  double length;  // |dx| [m]
  bool softened = false;
};

// dx / |dx|. Throws SolverError for the zero vector.
inline Vec2 unit_bond_vector(Vec2 dx) {
  double n = dx.norm();
  if (n == 0.0) throw SolverError("degenerate-bond: zero bond vector");
  return dx / n;
}

// S = (du / |dx|) . e_dx. Zero for rigid translations and for displacement
// differences orthogonal to the bond.
inline double bond_stretch(Vec2 dx, Vec2 du) {
  double len2 = dx.norm2();
  if (len2 == 0.0) throw SolverError("degenerate-bond: zero bond vector");
  return du.dot(dx) / len2;
}

// Piecewise constant influence: 1 on 0 <= r < delta, 0 otherwise.
inline double influence(double r, const HorizonGeometry& horizon) {
  return (r >= 0.0 && r < horizon.delta) ? 1.0 : 0.0;
}

// Double well potential g(r) = C (1 - exp(-beta r)).
inline double double_well(double r, double C, double beta) {
  return C * (1.0 - std::exp(-beta * r));
}

// Stretch derivative of the pair-wise force potential:
//   J(|dx|) * 2 C beta |dx| S exp(-beta |dx| S^2) / (delta * measure)
inline double potential_derivative(const Bond& bond, double S, const MaterialParams& mat,
                                   const HorizonGeometry& horizon) {
  if (influence(bond.length, horizon) == 0.0) return 0.0;
  double arg = mat.beta * bond.length * S * S;
  return 2.0 * mat.C * mat.beta * bond.length * S * std::exp(-arg) /
         (horizon.delta * horizon.measure);
}

// Pair-wise force density f = (d_S psi / |dx|) e_dx  [N/m^4 in 2D].
// Antisymmetric under bond reversal.
inline Vec2 pair_force_density(const Bond& bond, Vec2 du, const MaterialParams& mat,
                               const HorizonGeometry& horizon) {
  double S = bond_stretch(bond.dx, du);
  double dpsi = potential_derivative(bond, S, mat, horizon);
  return bond.dx * (dpsi / (bond.length * bond.length));
}

// Stretch at which the pair force magnitude peaks: 1 / sqrt(2 beta length).
// Compression is treated symmetrically, so |S| > S_c marks softening.
inline double critical_stretch(double length, double beta) {
  return 1.0 / std::sqrt(2.0 * beta * length);
}

// Fraction of softened bonds. Throws SolverError for an isolated node.
double node_damage(std::span<const Bond> bonds);

}  // namespace pumpd
