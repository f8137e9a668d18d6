#include "pumpd/pd_model.hpp"

namespace pumpd {

HorizonGeometry::HorizonGeometry(double delta_) : delta(delta_), measure(M_PI * delta_ * delta_) {
  if (!(delta_ > 0.0)) throw ConfigError("invalid-parameter: horizon delta must be > 0");
}

double node_damage(std::span<const Bond> bonds) {
  if (bonds.empty()) throw SolverError("undefined-damage: node has no bonds");
  std::size_t softened = 0;
  for (const Bond& b : bonds) softened += b.softened ? 1 : 0;
  return static_cast<double>(softened) / static_cast<double>(bonds.size());
}

}  // namespace pumpd
