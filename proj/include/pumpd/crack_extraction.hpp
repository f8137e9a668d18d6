#pragma once

#include <vector>

#include "pumpd/crack_path.hpp"
#include "pumpd/geometry.hpp"
#include "pumpd/pd_solver.hpp"

namespace pumpd {

// Scalar damage sampled on a uniform grid.
struct DamageGrid {
  Vec2 origin;     // position of node (0, 0)
  double spacing;  // > 0
  int nx = 0;
  int ny = 0;
  std::vector<double> values;  // row-major, ny rows of nx, all in [0, 1]

  double at(int i, int j) const { return values[static_cast<std::size_t>(j) * nx + i]; }
  double& at(int i, int j) { return values[static_cast<std::size_t>(j) * nx + i]; }
  Vec2 node(int i, int j) const { return {origin.x + i * spacing, origin.y + j * spacing}; }
  // Bilinear interpolation, clamped to the grid.
  double sample(Vec2 p) const;
};

// Nodal damage averaged onto a grid with inverse-distance weights over PD
// nodes within one spacing. Requires spacing >= h_pd.
DamageGrid resample_damage(const PDState& state, double spacing);

// Marching-squares iso-contour of the grid at the given threshold, with
// segments linked into polylines. Ambiguous saddle cells are resolved by the
// cell-average rule. Open and closed polylines are both possible; the output
// may be empty.
std::vector<std::vector<Vec2>> iso_contour(const DamageGrid& grid, double threshold);

// Centerline of the contour band by pairing each contour sample with the
// nearest point across the band and chaining the midpoints from the previous
// tip. Returns previous extended by the new segment (previous unchanged when
// the contours yield no advance). Throws if the band is wider than
// max_band_width (damage not localized).
CrackPath centerline(const std::vector<std::vector<Vec2>>& contours, const CrackPath& previous,
                     double spacing, double max_band_width);

// Full extraction pipeline: resample -> iso-contour -> centerline.
CrackPath extract_crack(const PDState& state, const CrackPath& previous, double threshold,
                        double spacing, double max_band_width);

}  // namespace pumpd
