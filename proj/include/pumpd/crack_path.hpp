#pragma once

#include <vector>

#include "pumpd/geometry.hpp"

namespace pumpd {

// Ordered, simple polyline in beam coordinates; the last vertex is the tip.
// This is the object exchanged between the global elastic solver and the
// local peridynamic solver.
struct CrackPath {
  std::vector<Vec2> points;

  CrackPath() = default;
  explicit CrackPath(std::vector<Vec2> pts) : points(std::move(pts)) {}

  const Vec2& tip() const { return points.back(); }
  const Vec2& base() const { return points.front(); }
  std::size_t size() const { return points.size(); }

  double arc_length() const;

  struct Projection {
    Vec2 closest;   // nearest point on the polyline
    double arc;     // arc-length parameter of the nearest point in [0, L]
    double dist;    // distance to the polyline
    double side;    // +1 / -1 side of the nearest segment (+1 if exactly on it)
    int segment;    // index of the nearest segment
  };
  Projection project(Vec2 p) const;

  // Sign of p relative to the nearest segment (bisector rule at vertices).
  double side_of(Vec2 p) const { return project(p).side; }

  // True if [a, b] shares any point with the polyline (touch counts).
  bool intersects_segment(Vec2 a, Vec2 b) const;

  bool is_simple() const;

  // Checks the type invariants (>= 2 distinct consecutive points, simple).
  // Throws SolverError on violation.
  void validate() const;
};

// Concatenates previous and extension into one simple polyline. The extension
// must start within `gap_tol` of the previous tip; the junction vertex is
// deduplicated and near-collinear interior vertices of the appended part are
// simplified with tolerance `simplify_tol`.
CrackPath update_crack(const CrackPath& previous, const CrackPath& extension, double gap_tol,
                       double simplify_tol);

// Douglas-Peucker polyline simplification keeping the end points.
std::vector<Vec2> simplify_polyline(const std::vector<Vec2>& pts, double tol);

// Uniform arc-length resampling (original vertices kept). Useful before the
// discrete Frechet comparison of paths with very different vertex densities.
CrackPath resample_path(const CrackPath& path, double step);

}  // namespace pumpd
