#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <vector>

#include "pumpd/crack_path.hpp"
#include "pumpd/domain.hpp"
#include "pumpd/geometry.hpp"
#include "pumpd/material.hpp"

namespace pumpd {

// One overlapping cover patch. Local coordinates are normalized to the patch
// half-extents, so the bilinear basis is {1, xi, eta, xi*eta} on [-1,1]^2.
struct Patch {
  Vec2 center;
  Vec2 half;   // alpha * cell/2
  Rect rect;   // support
  int cell_i = 0;
  int cell_j = 0;
};

// Uniform grid-of-patches cover of the beam with Shepard-normalized
// tensor-product cubic B-spline weights.
struct Cover {
  DomainSpec domain;
  Rect bbox;       // beam bounding box
  double hx, hy;   // cell spacing (h_PUM)
  int nx = 0, ny = 0;
  double alpha = 1.3;
  std::vector<Patch> patches;
  std::vector<int> cell_patch;  // nx*ny -> patch index, -1 if removed

  int patch_at(int ci, int cj) const {
    if (ci < 0 || ci >= nx || cj < 0 || cj >= ny) return -1;
    return cell_patch[static_cast<std::size_t>(cj) * nx + ci];
  }
  Rect cell_rect(int ci, int cj) const {
    return {{bbox.lo.x + ci * hx, bbox.lo.y + cj * hy},
            {bbox.lo.x + (ci + 1) * hx, bbox.lo.y + (cj + 1) * hy}};
  }

  // Partition-of-unity value of patch k at p (0 outside its support).
  double pu_value(int k, Vec2 p) const;
  // Raw Shepard denominator at p (0 outside the cover).
  double pu_sum_weights(Vec2 p) const;
  // Sum of all PU values at p (1 inside the cover, for testing).
  double pu_sum(Vec2 p) const;
};

// Patch grid over the beam bounding box, spacing h_pum, stretch alpha > 1;
// patches not intersecting the beam removed.
Cover build_cover(const DomainSpec& domain, double h_pum, double alpha);

// Local approximation space attached to one patch: a bilinear polynomial
// part plus an optional crack step enrichment.
struct LocalSpace {
  int n_poly = 4;
  int n_enrichments = 0;  // 0 or 1 step function
};

// Crack enrichment shared by all cut patches: the +/-1 side of the polyline,
// tapered to zero over `tip_taper` of arc length behind the tip so the field
// is continuous ahead of the tip.
struct EnrichmentData {
  std::optional<CrackPath> crack;
  double tip_taper = 0.0;
  std::vector<LocalSpace> spaces;   // one per patch
  std::vector<int> enr_scalar;      // per patch: scalar id of its step function, -1 if none
  int n_scalar = 0;                 // total scalar functions (poly + enrichment)

  int n_enriched() const {
    int c = 0;
    for (const auto& s : spaces) c += s.n_enrichments > 0 ? 1 : 0;
    return c;
  }
};

// Marks patches properly cut by the crack (a jump of both signs must be
// representable inside the patch; grazing touches are skipped).
EnrichmentData enrich_cracked_patches(const Cover& cover, const CrackPath& crack,
                                      double tip_taper);
EnrichmentData no_enrichment(const Cover& cover);

// Step enrichment value/gradient at p. side_hint (a vector pointing from the
// crack toward the desired side) resolves points on the polyline.
double crack_enrichment(const CrackPath& crack, double tip_taper, Vec2 p,
                        const Vec2* side_hint = nullptr, Vec2* grad = nullptr);

struct BoundaryConditions {
  double penalty = 0.0;  // spec default: 1e6 * E / h_PUM

  // Penalty point supports (pin/roller).
  struct PointConstraint {
    Vec2 p;
    bool fix_x = true;
    bool fix_y = true;
    Vec2 value{};
  };
  std::vector<PointConstraint> points;

  // Prescribed displacement on the outer boundary and hole rims by penalty.
  std::function<Vec2(Vec2)> boundary_displacement;

  // Consistent traction on the outer boundary and hole rims (pos, outward n).
  std::function<Vec2(Vec2, Vec2)> boundary_traction;

  // Constant tractions on segments, scaled by load_factor (the applied load).
  struct SegTraction {
    Vec2 a, b;
    Vec2 t;
  };
  std::vector<SegTraction> tractions;
};

// Galerkin solution: coefficients over the cover's local spaces.
struct GlobalSolution {
  std::shared_ptr<const Cover> cover;
  EnrichmentData enrichment;
  std::vector<double> coeffs;  // 2 dofs (x, y) per scalar function
  double load_factor = 0.0;

  struct SolveStats {
    double stiffness_asymmetry = 0.0;  // max |K - K^T| / max |K|
    double min_pivot = 0.0;            // LDLT pivot range (PSD check)
    double max_pivot = 0.0;
  };
  SolveStats stats;

  // u(p). Throws out-of-domain for points outside the beam and requires a
  // side hint for points within 1e-12 m of the crack polyline.
  Vec2 evaluate(Vec2 p, const Vec2* side_hint = nullptr) const;
};

// Stateful solver: caches the polynomial-block volume stiffness, which is
// independent of the crack; per solve only enrichment blocks and boundary
// terms are re-integrated.
class GlobalSolver {
 public:
  GlobalSolver(Cover cover, MaterialParams mat);
  ~GlobalSolver();
  GlobalSolver(GlobalSolver&&) noexcept;
  GlobalSolver& operator=(GlobalSolver&&) noexcept;

  const Cover& cover() const;

  GlobalSolution solve(const EnrichmentData& enrichment, const BoundaryConditions& bcs,
                       double load_factor);

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

// One-shot Galerkin solve of the plane-strain weak form.
GlobalSolution assemble_and_solve(const Cover& cover, const EnrichmentData& enrichment,
                                  const MaterialParams& mat, const BoundaryConditions& bcs,
                                  double load_factor);

}  // namespace pumpd
