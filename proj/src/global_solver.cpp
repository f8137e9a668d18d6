#include "pumpd/global_solver.hpp"

#include <Eigen/SparseCholesky>
#include <Eigen/SparseCore>

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <unordered_map>

#include "pumpd/errors.hpp"

namespace pumpd {

namespace {

constexpr int kMaxQuadtreeDepth = 6;

// Cubic B-spline bump on [-1, 1], normalized to w(0) = 1.
inline double spline_weight(double s) {
  s = std::abs(s);
  if (s >= 1.0) return 0.0;
  if (s <= 0.5) return 1.0 - 6.0 * s * s + 6.0 * s * s * s;
  double t = 1.0 - s;
  return 2.0 * t * t * t;
}

inline double spline_weight_deriv(double s) {
  double a = std::abs(s);
  if (a >= 1.0) return 0.0;
  double d = a <= 0.5 ? -12.0 * a + 18.0 * a * a : -6.0 * (1.0 - a) * (1.0 - a);
  return s < 0.0 ? -d : d;
}

struct GaussRule {
  const double* x;
  const double* w;
  int n;
};

GaussRule gauss_rule(int n) {
  static const double x2[] = {-0.5773502691896257, 0.5773502691896257};
  static const double w2[] = {1.0, 1.0};
  static const double x3[] = {-0.7745966692414834, 0.0, 0.7745966692414834};
  static const double w3[] = {5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0};
  static const double x4[] = {-0.8611363115940526, -0.3399810435848563, 0.3399810435848563,
                              0.8611363115940526};
  static const double w4[] = {0.3478548451374538, 0.6521451548625461, 0.6521451548625461,
                              0.3478548451374538};
  switch (n) {
    case 2: return {x2, w2, 2};
    case 3: return {x3, w3, 3};
    default: return {x4, w4, 4};
  }
}

int order_for_width(double frac) {
  if (frac <= 0.05) return 2;
  if (frac <= 0.22) return 3;
  return 4;
}

double patch_weight(const Patch& pa, Vec2 p) {
  return spline_weight((p.x - pa.center.x) / pa.half.x) *
         spline_weight((p.y - pa.center.y) / pa.half.y);
}

}  // namespace

double Cover::pu_value(int k, Vec2 p) const {
  double w = patch_weight(patches[k], p);
  if (w <= 0.0) return 0.0;
  return w / pu_sum_weights(p);
}

double Cover::pu_sum_weights(Vec2 p) const {
  int ci = std::clamp(static_cast<int>((p.x - bbox.lo.x) / hx), 0, nx - 1);
  int cj = std::clamp(static_cast<int>((p.y - bbox.lo.y) / hy), 0, ny - 1);
  double sum = 0.0;
  for (int dj = -1; dj <= 1; ++dj)
    for (int di = -1; di <= 1; ++di) {
      int k = patch_at(ci + di, cj + dj);
      if (k >= 0) sum += patch_weight(patches[k], p);
    }
  return sum;
}

double Cover::pu_sum(Vec2 p) const {
  double s = pu_sum_weights(p);
  if (s <= 0.0) throw SolverError("out-of-domain: point outside the cover");
  int ci = std::clamp(static_cast<int>((p.x - bbox.lo.x) / hx), 0, nx - 1);
  int cj = std::clamp(static_cast<int>((p.y - bbox.lo.y) / hy), 0, ny - 1);
  double total = 0.0;
  for (int dj = -1; dj <= 1; ++dj)
    for (int di = -1; di <= 1; ++di) {
      int k = patch_at(ci + di, cj + dj);
      if (k >= 0) total += patch_weight(patches[k], p) / s;
    }
  return total;
}

Cover build_cover(const DomainSpec& domain, double h_pum, double alpha) {
  if (!(h_pum > 0.0)) throw ConfigError("invalid-parameter: h_PUM must be > 0");
  if (!(alpha > 1.0)) throw ConfigError("invalid-parameter: cover stretch alpha must be > 1");
  domain.validate();

  Cover cover;
  cover.domain = domain;
  cover.bbox = domain.bounds();
  cover.hx = h_pum;
  cover.hy = h_pum;
  cover.nx = static_cast<int>(std::ceil(cover.bbox.width() / h_pum - 1e-12));
  cover.ny = static_cast<int>(std::ceil(cover.bbox.height() / h_pum - 1e-12));
  cover.alpha = alpha;
  cover.cell_patch.assign(static_cast<std::size_t>(cover.nx) * cover.ny, -1);

  Vec2 half{alpha * cover.hx / 2.0, alpha * cover.hy / 2.0};
  for (int cj = 0; cj < cover.ny; ++cj) {
    for (int ci = 0; ci < cover.nx; ++ci) {
      Vec2 center{cover.bbox.lo.x + (ci + 0.5) * cover.hx,
                  cover.bbox.lo.y + (cj + 0.5) * cover.hy};
      Rect rect{center - half, center + half};
      // Remove patches whose support is fully inside a hole or off the beam.
      bool removed = !rect.intersects(cover.bbox);
      for (const auto& hole : cover.domain.holes) {
        double fx = std::max(std::abs(rect.lo.x - hole.center.x),
                             std::abs(rect.hi.x - hole.center.x));
        double fy = std::max(std::abs(rect.lo.y - hole.center.y),
                             std::abs(rect.hi.y - hole.center.y));
        if (fx * fx + fy * fy <= hole.radius * hole.radius) removed = true;
      }
      if (removed) continue;
      cover.cell_patch[static_cast<std::size_t>(cj) * cover.nx + ci] =
          static_cast<int>(cover.patches.size());
      cover.patches.push_back(Patch{center, half, rect, ci, cj});
    }
  }
  return cover;
}

double crack_enrichment(const CrackPath& crack, double tip_taper, Vec2 p, const Vec2* side_hint,
                        Vec2* grad) {
  auto proj = crack.project(p);
  double side = proj.side;
  if (proj.dist < 1e-12) {
    if (!side_hint)
      throw SolverError("out-of-domain: evaluation point on the crack without a side hint");
    Vec2 dir = (crack.points[proj.segment + 1] - crack.points[proj.segment]).normalized();
    side = dir.cross(*side_hint) < 0.0 ? -1.0 : 1.0;
  }
  double L = crack.arc_length();
  double taper = std::min(tip_taper > 0.0 ? tip_taper : L, L);
  double r = std::clamp((L - proj.arc) / taper, 0.0, 1.0);
  if (grad) {
    *grad = Vec2{};
    if (r > 0.0 && r < 1.0) {
      Vec2 t = (crack.points[proj.segment + 1] - crack.points[proj.segment]).normalized();
      *grad = t * (-side / taper);
    }
  }
  return side * r;
}

EnrichmentData no_enrichment(const Cover& cover) {
  EnrichmentData enr;
  enr.spaces.assign(cover.patches.size(), LocalSpace{});
  enr.enr_scalar.assign(cover.patches.size(), -1);
  enr.n_scalar = 4 * static_cast<int>(cover.patches.size());
  return enr;
}

EnrichmentData enrich_cracked_patches(const Cover& cover, const CrackPath& crack,
                                      double tip_taper) {
  crack.validate();
  EnrichmentData enr = no_enrichment(cover);
  enr.crack = crack;
  enr.tip_taper = tip_taper;

  int next_scalar = enr.n_scalar;
  for (std::size_t k = 0; k < cover.patches.size(); ++k) {
    const Patch& pa = cover.patches[k];
    bool touches = false;
    for (std::size_t s = 1; s < crack.points.size() && !touches; ++s)
      touches = segment_intersects_rect(crack.points[s - 1], crack.points[s], pa.rect);
    if (!touches) continue;

    // The step must be representable inside the patch: sample the enrichment
    // and require both signs. This skips grazing touches and tip patches the
    // taper has already zeroed out.
    Rect r = pa.rect.intersection(cover.bbox);
    if (r.empty()) continue;
    const int m = 13;
    bool pos = false, neg = false;
    for (int j = 0; j < m && !(pos && neg); ++j) {
      for (int i = 0; i < m && !(pos && neg); ++i) {
        Vec2 p{r.lo.x + (i + 0.5) * r.width() / m, r.lo.y + (j + 0.5) * r.height() / m};
        if (!cover.domain.inside(p)) continue;
        double eta = crack_enrichment(crack, tip_taper, p);
        pos = pos || eta > 0.02;
        neg = neg || eta < -0.02;
      }
    }
    if (!(pos && neg)) continue;

    enr.spaces[k].n_enrichments = 1;
    enr.enr_scalar[k] = next_scalar++;
  }
  enr.n_scalar = next_scalar;
  return enr;
}

namespace {

// All basis functions active at a point: per covering patch the 4 bilinear
// functions plus, on cut patches, the step function.
struct BasisEval {
  static constexpr int kMax = 24;
  int n = 0;
  int scalar[kMax];
  double val[kMax];
  double gx[kMax];
  double gy[kMax];
};

void eval_basis(const Cover& cover, const EnrichmentData& enr, Vec2 p, bool need_grad,
                const Vec2* side_hint, BasisEval& out) {
  int cand[9];
  double W[9];
  Vec2 gW[9];
  int ncand = 0;
  int ci = std::clamp(static_cast<int>((p.x - cover.bbox.lo.x) / cover.hx), 0, cover.nx - 1);
  int cj = std::clamp(static_cast<int>((p.y - cover.bbox.lo.y) / cover.hy), 0, cover.ny - 1);
  double S = 0.0;
  Vec2 gS{};
  for (int dj = -1; dj <= 1; ++dj) {
    for (int di = -1; di <= 1; ++di) {
      int k = cover.patch_at(ci + di, cj + dj);
      if (k < 0) continue;
      const Patch& pa = cover.patches[k];
      double sx = (p.x - pa.center.x) / pa.half.x;
      double sy = (p.y - pa.center.y) / pa.half.y;
      double wx = spline_weight(sx), wy = spline_weight(sy);
      double w = wx * wy;
      if (w <= 0.0) continue;
      W[ncand] = w;
      if (need_grad)
        gW[ncand] = Vec2{spline_weight_deriv(sx) / pa.half.x * wy,
                         wx * spline_weight_deriv(sy) / pa.half.y};
      S += w;
      if (need_grad) gS += gW[ncand];
      cand[ncand++] = k;
    }
  }
  if (ncand == 0 || S <= 0.0) throw SolverError("out-of-domain: point outside the cover");

  out.n = 0;
  double eta = 0.0;
  Vec2 geta{};
  bool have_eta = false;
  for (int c = 0; c < ncand; ++c) {
    const Patch& pa = cover.patches[cand[c]];
    double phi = W[c] / S;
    Vec2 gphi = need_grad ? (gW[c] - gS * phi) / S : Vec2{};
    double xi = (p.x - pa.center.x) / pa.half.x;
    double yi = (p.y - pa.center.y) / pa.half.y;
    const double psi[4] = {1.0, xi, yi, xi * yi};
    const Vec2 gpsi[4] = {{0.0, 0.0},
                          {1.0 / pa.half.x, 0.0},
                          {0.0, 1.0 / pa.half.y},
                          {yi / pa.half.x, xi / pa.half.y}};
    int base = 4 * cand[c];
    for (int f = 0; f < 4; ++f) {
      out.scalar[out.n] = base + f;
      out.val[out.n] = phi * psi[f];
      if (need_grad) {
        out.gx[out.n] = gphi.x * psi[f] + phi * gpsi[f].x;
        out.gy[out.n] = gphi.y * psi[f] + phi * gpsi[f].y;
      }
      ++out.n;
    }
    if (enr.enr_scalar[cand[c]] >= 0) {
      if (!have_eta) {
        eta = crack_enrichment(*enr.crack, enr.tip_taper, p, side_hint,
                               need_grad ? &geta : nullptr);
        have_eta = true;
      }
      out.scalar[out.n] = enr.enr_scalar[cand[c]];
      out.val[out.n] = phi * eta;
      if (need_grad) {
        out.gx[out.n] = gphi.x * eta + phi * geta.x;
        out.gy[out.n] = gphi.y * eta + phi * geta.y;
      }
      ++out.n;
    }
  }
}

// ---------------------------------------------------------------------------
// Quadrature

using PointFn = std::function<void(Vec2, double)>;

// Breakpoints of the spline weights of patches near cell (ci, cj), one axis.
std::vector<double> collect_knots(const Cover& cover, bool x_axis, int ci, int cj, double a,
                                  double b) {
  std::vector<double> out;
  double tol = 1e-12 * (b - a);
  double h = x_axis ? cover.hx : cover.hy;
  double lo = x_axis ? cover.bbox.lo.x : cover.bbox.lo.y;
  double half = cover.alpha * h / 2.0;
  int c0 = x_axis ? ci : cj;
  for (int d = -1; d <= 1; ++d) {
    double c = lo + (c0 + d + 0.5) * h;
    const double offs[5] = {-half, -half / 2.0, 0.0, half / 2.0, half};
    for (double o : offs) {
      double v = c + o;
      if (v > a + tol && v < b - tol) out.push_back(v);
    }
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end(),
                        [tol](double u, double v) { return std::abs(u - v) <= tol; }),
            out.end());
  return out;
}

std::vector<double> split_by(double a, double b, const std::vector<double>& breaks) {
  std::vector<double> xs{a};
  for (double v : breaks)
    if (v > a && v < b) xs.push_back(v);
  xs.push_back(b);
  return xs;
}

void gauss_interval(double a, double b, double ref_width,
                    std::vector<std::pair<double, double>>& out) {
  if (b - a <= 0.0) return;
  GaussRule g = gauss_rule(order_for_width((b - a) / ref_width));
  double mid = 0.5 * (a + b), half = 0.5 * (b - a);
  for (int i = 0; i < g.n; ++i) out.push_back({mid + half * g.x[i], half * g.w[i]});
}

// Tensor Gauss over the rect, split at the given breakpoints per axis.
void tensor_gauss(const Rect& r, const std::vector<double>& kx, const std::vector<double>& ky,
                  double ref, const PointFn& fn) {
  std::vector<double> xs = split_by(r.lo.x, r.hi.x, kx);
  std::vector<double> ys = split_by(r.lo.y, r.hi.y, ky);
  std::vector<std::pair<double, double>> px, py;
  for (std::size_t i = 0; i + 1 < xs.size(); ++i) gauss_interval(xs[i], xs[i + 1], ref, px);
  for (std::size_t j = 0; j + 1 < ys.size(); ++j) gauss_interval(ys[j], ys[j + 1], ref, py);
  for (const auto& [y, wy] : py)
    for (const auto& [x, wx] : px) fn({x, y}, wx * wy);
}

// Region (rect minus one disc): x-strips with exact circular y-limits.
void strip_gauss_minus_disc(const Rect& r, Vec2 c, double rad, const std::vector<double>& kx,
                            const std::vector<double>& ky, double ref, const PointFn& fn) {
  std::vector<double> breaks = kx;
  if (c.x - rad > r.lo.x && c.x - rad < r.hi.x) breaks.push_back(c.x - rad);
  if (c.x + rad > r.lo.x && c.x + rad < r.hi.x) breaks.push_back(c.x + rad);
  std::sort(breaks.begin(), breaks.end());
  std::vector<double> xs = split_by(r.lo.x, r.hi.x, breaks);
  GaussRule gy4 = gauss_rule(4);
  std::vector<std::pair<double, double>> px;
  for (std::size_t i = 0; i + 1 < xs.size(); ++i) {
    px.clear();
    gauss_interval(xs[i], xs[i + 1], ref, px);
    for (const auto& [x, wx] : px) {
      double dx = x - c.x;
      std::vector<std::pair<double, double>> yints;
      if (std::abs(dx) < rad) {
        double s = std::sqrt(rad * rad - dx * dx);
        if (c.y - s > r.lo.y) yints.push_back({r.lo.y, std::min(c.y - s, r.hi.y)});
        if (c.y + s < r.hi.y) yints.push_back({std::max(c.y + s, r.lo.y), r.hi.y});
      } else {
        yints.push_back({r.lo.y, r.hi.y});
      }
      for (auto [ya, yb] : yints) {
        if (yb <= ya) continue;
        std::vector<double> yss = split_by(ya, yb, ky);
        for (std::size_t j = 0; j + 1 < yss.size(); ++j) {
          double mid = 0.5 * (yss[j] + yss[j + 1]), half = 0.5 * (yss[j + 1] - yss[j]);
          for (int q = 0; q < gy4.n; ++q)
            fn({x, mid + half * gy4.x[q]}, wx * half * gy4.w[q]);
        }
      }
    }
  }
}

enum class CellCut { None, Hole, Crack, Inside };  // Inside: fully inside a hole

CellCut classify_cell(const Rect& r, const DomainSpec& domain, const CrackPath* crack) {
  for (const auto& hole : domain.holes) {
    double r2 = hole.radius * hole.radius;
    double fx = std::max(std::abs(r.lo.x - hole.center.x), std::abs(r.hi.x - hole.center.x));
    double fy = std::max(std::abs(r.lo.y - hole.center.y), std::abs(r.hi.y - hole.center.y));
    if (fx * fx + fy * fy <= r2) return CellCut::Inside;
    Vec2 close{std::clamp(hole.center.x, r.lo.x, r.hi.x),
               std::clamp(hole.center.y, r.lo.y, r.hi.y)};
    if (dist2(close, hole.center) < r2) {
      // A crack crossing the same cell takes precedence (quadtree first).
      if (crack)
        for (std::size_t s = 1; s < crack->points.size(); ++s)
          if (segment_intersects_rect(crack->points[s - 1], crack->points[s], r))
            return CellCut::Crack;
      return CellCut::Hole;
    }
  }
  if (crack) {
    for (std::size_t s = 1; s < crack->points.size(); ++s)
      if (segment_intersects_rect(crack->points[s - 1], crack->points[s], r))
        return CellCut::Crack;
  }
  return CellCut::None;
}

const DomainSpec::Hole* cutting_hole(const Rect& r, const DomainSpec& domain) {
  for (const auto& hole : domain.holes) {
    Vec2 close{std::clamp(hole.center.x, r.lo.x, r.hi.x),
               std::clamp(hole.center.y, r.lo.y, r.hi.y)};
    if (dist2(close, hole.center) < hole.radius * hole.radius) return &hole;
  }
  return nullptr;
}

// Quadtree refinement for cells cut by the crack; leaves cut by a hole use
// the strip rule, clean leaves a plain 4x4 tensor Gauss.
void quadtree_gauss(const Rect& r, int depth, const DomainSpec& domain, const CrackPath* crack,
                    const PointFn& fn) {
  CellCut cut = classify_cell(r, domain, crack);
  if (cut == CellCut::Inside) return;
  if (cut == CellCut::Crack && depth < kMaxQuadtreeDepth) {
    Vec2 m = r.center();
    quadtree_gauss({r.lo, m}, depth + 1, domain, crack, fn);
    quadtree_gauss({{m.x, r.lo.y}, {r.hi.x, m.y}}, depth + 1, domain, crack, fn);
    quadtree_gauss({{r.lo.x, m.y}, {m.x, r.hi.y}}, depth + 1, domain, crack, fn);
    quadtree_gauss({m, r.hi}, depth + 1, domain, crack, fn);
    return;
  }
  static const std::vector<double> no_knots;
  if (const auto* hole = cutting_hole(r, domain)) {
    strip_gauss_minus_disc(r, hole->center, hole->radius, no_knots, no_knots, r.width(), fn);
    return;
  }
  tensor_gauss(r, no_knots, no_knots, r.width(), fn);
}

// ---------------------------------------------------------------------------
// Assembly

using Triplets = std::vector<Eigen::Triplet<double>>;

// Plane-strain isotropic pairing of two scalar shape functions.
inline void accumulate_block(double w, double lambda, double mu, double gax, double gay,
                             double gbx, double gby, double* k2x2) {
  double dot = gax * gbx + gay * gby;
  k2x2[0] += w * (lambda * gax * gbx + mu * gbx * gax + mu * dot);
  k2x2[1] += w * (lambda * gax * gby + mu * gbx * gay);
  k2x2[2] += w * (lambda * gay * gbx + mu * gby * gax);
  k2x2[3] += w * (lambda * gay * gby + mu * gby * gay + mu * dot);
}

// Accumulates the volume stiffness over one cell into a dense local block
// indexed by scalar ids, then flushes touched pairs to triplets.
class CellAccumulator {
 public:
  CellAccumulator(const Cover& cover, const EnrichmentData& enr, int ci, int cj) {
    for (int dj = -1; dj <= 1; ++dj)
      for (int di = -1; di <= 1; ++di) {
        int k = cover.patch_at(ci + di, cj + dj);
        if (k < 0) continue;
        for (int f = 0; f < 4; ++f) local_of_[4 * k + f] = static_cast<int>(ids_.size() + f);
        ids_.push_back(4 * k);
        ids_.push_back(4 * k + 1);
        ids_.push_back(4 * k + 2);
        ids_.push_back(4 * k + 3);
        if (enr.enr_scalar[k] >= 0) {
          local_of_[enr.enr_scalar[k]] = static_cast<int>(ids_.size());
          ids_.push_back(enr.enr_scalar[k]);
        }
      }
    int n = static_cast<int>(ids_.size());
    k_.assign(static_cast<std::size_t>(n) * n * 4, 0.0);
    touched_.assign(static_cast<std::size_t>(n) * n, 0);
  }

  // pair_filter: 0 = all pairs, 1 = only pairs involving an enrichment dof.
  void add_point(const BasisEval& be, double w, double lambda, double mu, int n_poly_total,
                 int pair_filter) {
    int n = static_cast<int>(ids_.size());
    for (int a = 0; a < be.n; ++a) {
      int la = local_of_.at(be.scalar[a]);
      bool a_enr = be.scalar[a] >= n_poly_total;
      for (int b = 0; b < be.n; ++b) {
        if (pair_filter == 1 && !a_enr && be.scalar[b] < n_poly_total) continue;
        int lb = local_of_.at(be.scalar[b]);
        std::size_t idx = (static_cast<std::size_t>(la) * n + lb);
        touched_[idx] = 1;
        accumulate_block(w, lambda, mu, be.gx[a], be.gy[a], be.gx[b], be.gy[b], &k_[idx * 4]);
      }
    }
  }

  void flush(Triplets& out) const {
    int n = static_cast<int>(ids_.size());
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b) {
        std::size_t idx = static_cast<std::size_t>(a) * n + b;
        if (!touched_[idx]) continue;
        const double* blk = &k_[idx * 4];
        int ga = 2 * ids_[a], gb = 2 * ids_[b];
        out.emplace_back(ga, gb, blk[0]);
        out.emplace_back(ga, gb + 1, blk[1]);
        out.emplace_back(ga + 1, gb, blk[2]);
        out.emplace_back(ga + 1, gb + 1, blk[3]);
      }
  }

 private:
  std::vector<int> ids_;
  std::unordered_map<int, int> local_of_;
  std::vector<double> k_;
  std::vector<char> touched_;
};

struct EdgePiece {
  Vec2 a, b;
};

// Splits a straight boundary segment at cell lines, spline knots and crack
// crossings so each piece carries a smooth integrand.
std::vector<EdgePiece> split_edge(const Cover& cover, const CrackPath* crack, Vec2 a, Vec2 b) {
  Vec2 d = b - a;
  double len = d.norm();
  std::vector<double> ts{0.0, 1.0};
  auto add_axis = [&](double lo, double h, int n, bool is_x) {
    double da = is_x ? d.x : d.y;
    if (std::abs(da) < 1e-15) return;
    double aa = is_x ? a.x : a.y;
    for (int k = 0; k <= n; ++k) {
      for (double frac : {0.0, 0.5 - cover.alpha / 4.0, 0.5, 0.5 + cover.alpha / 4.0,
                          0.5 - cover.alpha / 2.0, 0.5 + cover.alpha / 2.0}) {
        double v = lo + (k + frac) * h;
        double t = (v - aa) / da;
        if (t > 1e-12 && t < 1.0 - 1e-12) ts.push_back(t);
      }
    }
  };
  add_axis(cover.bbox.lo.x, cover.hx, cover.nx, true);
  add_axis(cover.bbox.lo.y, cover.hy, cover.ny, false);
  if (crack) {
    for (std::size_t s = 1; s < crack->points.size(); ++s) {
      Vec2 p = crack->points[s - 1], q = crack->points[s];
      double denom = d.cross(q - p);
      if (std::abs(denom) < 1e-30) continue;
      double t = (p - a).cross(q - p) / denom;
      double u = (p - a).cross(d) / denom;
      if (t > 1e-12 && t < 1.0 - 1e-12 && u >= -1e-12 && u <= 1.0 + 1e-12) ts.push_back(t);
    }
  }
  std::sort(ts.begin(), ts.end());
  std::vector<EdgePiece> pieces;
  for (std::size_t i = 0; i + 1 < ts.size(); ++i) {
    if ((ts[i + 1] - ts[i]) * len < 1e-14) continue;
    pieces.push_back({a + d * ts[i], a + d * ts[i + 1]});
  }
  return pieces;
}

// Gauss points along the outer boundary (counter-clockwise, outward normals)
// and along hole rims (normals pointing into the hole).
void for_boundary_points(const Cover& cover, const CrackPath* crack,
                         const std::function<void(Vec2, double, Vec2)>& fn) {
  Rect b = cover.bbox;
  const Vec2 corners[5] = {b.lo, {b.hi.x, b.lo.y}, b.hi, {b.lo.x, b.hi.y}, b.lo};
  const Vec2 normals[4] = {{0, -1}, {1, 0}, {0, 1}, {-1, 0}};
  GaussRule g = gauss_rule(4);
  for (int e = 0; e < 4; ++e) {
    for (const EdgePiece& piece : split_edge(cover, crack, corners[e], corners[e + 1])) {
      Vec2 mid = (piece.a + piece.b) * 0.5;
      Vec2 half = (piece.b - piece.a) * 0.5;
      double jac = half.norm();
      for (int q = 0; q < g.n; ++q) fn(mid + half * g.x[q], jac * g.w[q], normals[e]);
    }
  }
  for (const auto& hole : cover.domain.holes) {
    // Split the rim at spline-knot crossings via a fine angular partition.
    int narc = std::max(48, static_cast<int>(2.0 * M_PI * hole.radius / (cover.hx / 6.0)));
    double dth = 2.0 * M_PI / narc;
    for (int s = 0; s < narc; ++s) {
      double th0 = s * dth;
      for (int q = 0; q < g.n; ++q) {
        double th = th0 + 0.5 * dth * (1.0 + g.x[q]);
        Vec2 p{hole.center.x + hole.radius * std::cos(th),
               hole.center.y + hole.radius * std::sin(th)};
        Vec2 n{-std::cos(th), -std::sin(th)};  // outward from the material
        fn(p, hole.radius * 0.5 * dth * g.w[q], n);
      }
    }
  }
}

}  // namespace

// ---------------------------------------------------------------------------
// GlobalSolver

struct GlobalSolver::Impl {
  Cover cover;
  MaterialParams mat;
  Triplets poly_triplets;  // volume stiffness of the polynomial blocks
  std::shared_ptr<const Cover> shared_cover;

  Impl(Cover c, MaterialParams m) : cover(std::move(c)), mat(m) {
    shared_cover = std::make_shared<Cover>(cover);
    build_poly_triplets();
  }

  void build_poly_triplets() {
    EnrichmentData none = no_enrichment(cover);
    BasisEval be;
    for (int cj = 0; cj < cover.ny; ++cj) {
      for (int ci = 0; ci < cover.nx; ++ci) {
        Rect cell = cover.cell_rect(ci, cj).intersection(cover.bbox);
        if (cell.empty()) continue;
        CellCut cut = classify_cell(cell, cover.domain, nullptr);
        if (cut == CellCut::Inside) continue;
        CellAccumulator acc(cover, none, ci, cj);
        auto kx = collect_knots(cover, true, ci, cj, cell.lo.x, cell.hi.x);
        auto ky = collect_knots(cover, false, ci, cj, cell.lo.y, cell.hi.y);
        PointFn fn = [&](Vec2 p, double w) {
          eval_basis(cover, none, p, true, nullptr, be);
          acc.add_point(be, w, mat.lambda, mat.mu_lame, none.n_scalar, 0);
        };
        if (cut == CellCut::Hole) {
          const auto* hole = cutting_hole(cell, cover.domain);
          strip_gauss_minus_disc(cell, hole->center, hole->radius, kx, ky, cover.hx, fn);
        } else {
          tensor_gauss(cell, kx, ky, cover.hx, fn);
        }
        acc.flush(poly_triplets);
      }
    }
  }

  GlobalSolution solve(const EnrichmentData& enr, const BoundaryConditions& bcs,
                       double load_factor) {
    const int n_dofs = 2 * enr.n_scalar;
    const int n_poly_scalar = 4 * static_cast<int>(cover.patches.size());
    const CrackPath* crack = enr.crack ? &*enr.crack : nullptr;

    Triplets triplets = poly_triplets;
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n_dofs);
    BasisEval be;

    // Enrichment blocks: cells whose 3x3 patch window contains a cut patch.
    if (enr.n_scalar > n_poly_scalar) {
      for (int cj = 0; cj < cover.ny; ++cj) {
        for (int ci = 0; ci < cover.nx; ++ci) {
          bool active = false;
          for (int dj = -1; dj <= 1 && !active; ++dj)
            for (int di = -1; di <= 1 && !active; ++di) {
              int k = cover.patch_at(ci + di, cj + dj);
              active = k >= 0 && enr.enr_scalar[k] >= 0;
            }
          if (!active) continue;
          Rect cell = cover.cell_rect(ci, cj).intersection(cover.bbox);
          if (cell.empty()) continue;
          if (classify_cell(cell, cover.domain, nullptr) == CellCut::Inside) continue;
          CellAccumulator acc(cover, enr, ci, cj);
          PointFn fn = [&](Vec2 p, double w) {
            eval_basis(cover, enr, p, true, nullptr, be);
            acc.add_point(be, w, mat.lambda, mat.mu_lame, n_poly_scalar, 1);
          };
          quadtree_gauss(cell, 0, cover.domain, crack, fn);
          acc.flush(triplets);
        }
      }
    }

    // Penalty point constraints.
    for (const auto& pc : bcs.points) {
      eval_basis(cover, enr, pc.p, false, nullptr, be);
      for (int a = 0; a < be.n; ++a) {
        for (int b = 0; b < be.n; ++b) {
          double kab = bcs.penalty * be.val[a] * be.val[b];
          if (pc.fix_x) triplets.emplace_back(2 * be.scalar[a], 2 * be.scalar[b], kab);
          if (pc.fix_y) triplets.emplace_back(2 * be.scalar[a] + 1, 2 * be.scalar[b] + 1, kab);
        }
        if (pc.fix_x) rhs[2 * be.scalar[a]] += bcs.penalty * be.val[a] * pc.value.x;
        if (pc.fix_y) rhs[2 * be.scalar[a] + 1] += bcs.penalty * be.val[a] * pc.value.y;
      }
    }

    // Boundary penalty Dirichlet and consistent tractions.
    if (bcs.boundary_displacement || bcs.boundary_traction) {
      for_boundary_points(cover, crack, [&](Vec2 p, double w, Vec2 n) {
        if (!cover.domain.inside(p)) {
          // Points exactly on the rim/edge: nudge inward for the side test.
          Vec2 q = p - n * (1e-9 * cover.hx);
          if (!cover.domain.bounds().contains(q)) return;
          eval_basis(cover, enr, q, false, nullptr, be);
        } else {
          eval_basis(cover, enr, p, false, nullptr, be);
        }
        if (bcs.boundary_displacement) {
          Vec2 u = bcs.boundary_displacement(p);
          for (int a = 0; a < be.n; ++a) {
            for (int b = 0; b < be.n; ++b) {
              double kab = bcs.penalty * w * be.val[a] * be.val[b];
              triplets.emplace_back(2 * be.scalar[a], 2 * be.scalar[b], kab);
              triplets.emplace_back(2 * be.scalar[a] + 1, 2 * be.scalar[b] + 1, kab);
            }
            rhs[2 * be.scalar[a]] += bcs.penalty * w * be.val[a] * u.x;
            rhs[2 * be.scalar[a] + 1] += bcs.penalty * w * be.val[a] * u.y;
          }
        }
        if (bcs.boundary_traction) {
          Vec2 t = bcs.boundary_traction(p, n);
          for (int a = 0; a < be.n; ++a) {
            rhs[2 * be.scalar[a]] += w * be.val[a] * t.x;
            rhs[2 * be.scalar[a] + 1] += w * be.val[a] * t.y;
          }
        }
      });
    }

    // Applied load tractions, scaled by the load factor.
    GaussRule g = gauss_rule(4);
    for (const auto& tr : bcs.tractions) {
      for (const EdgePiece& piece : split_edge(cover, crack, tr.a, tr.b)) {
        Vec2 mid = (piece.a + piece.b) * 0.5;
        Vec2 half = (piece.b - piece.a) * 0.5;
        double jac = half.norm();
        for (int q = 0; q < g.n; ++q) {
          Vec2 p = mid + half * g.x[q];
          double w = jac * g.w[q];
          eval_basis(cover, enr, p, false, nullptr, be);
          for (int a = 0; a < be.n; ++a) {
            rhs[2 * be.scalar[a]] += w * be.val[a] * load_factor * tr.t.x;
            rhs[2 * be.scalar[a] + 1] += w * be.val[a] * load_factor * tr.t.y;
          }
        }
      }
    }

    Eigen::SparseMatrix<double> K(n_dofs, n_dofs);
    K.setFromTriplets(triplets.begin(), triplets.end());

    GlobalSolution::SolveStats stats;
    {
      Eigen::SparseMatrix<double> Kt = K.transpose();
      double kmax = 0.0, diff = 0.0;
      for (int c = 0; c < K.outerSize(); ++c)
        for (Eigen::SparseMatrix<double>::InnerIterator it(K, c); it; ++it)
          kmax = std::max(kmax, std::abs(it.value()));
      Eigen::SparseMatrix<double> D = K - Kt;
      for (int c = 0; c < D.outerSize(); ++c)
        for (Eigen::SparseMatrix<double>::InnerIterator it(D, c); it; ++it)
          diff = std::max(diff, std::abs(it.value()));
      stats.stiffness_asymmetry = kmax > 0.0 ? diff / kmax : 0.0;
    }

    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt;
    ldlt.compute(K);
    bool failed = ldlt.info() != Eigen::Success;
    int null_dim = 0;
    if (!failed) {
      const auto& D = ldlt.vectorD();
      double dmax = 0.0, dmin = std::numeric_limits<double>::infinity();
      for (int i = 0; i < D.size(); ++i) dmax = std::max(dmax, std::abs(D[i]));
      for (int i = 0; i < D.size(); ++i) {
        dmin = std::min(dmin, D[i]);
        if (!(std::abs(D[i]) > 1e-14 * dmax)) ++null_dim;
      }
      stats.min_pivot = dmin;
      stats.max_pivot = dmax;
      failed = null_dim > 0;
    } else {
      null_dim = n_dofs;
    }
    if (failed) {
      std::ostringstream msg;
      msg << "assembly: singular system (estimated null-space dimension " << null_dim << ")";
      throw SolverError(msg.str());
    }

    Eigen::VectorXd x = ldlt.solve(rhs);
    if (!x.allFinite()) throw SolverError("assembly: solve produced non-finite coefficients");

    GlobalSolution sol;
    sol.cover = shared_cover;
    sol.enrichment = enr;
    sol.load_factor = load_factor;
    sol.coeffs.assign(x.data(), x.data() + x.size());
    sol.stats = stats;
    return sol;
  }
};

GlobalSolver::GlobalSolver(Cover cover, MaterialParams mat)
    : impl_(std::make_unique<Impl>(std::move(cover), mat)) {}
GlobalSolver::~GlobalSolver() = default;
GlobalSolver::GlobalSolver(GlobalSolver&&) noexcept = default;
GlobalSolver& GlobalSolver::operator=(GlobalSolver&&) noexcept = default;

const Cover& GlobalSolver::cover() const { return impl_->cover; }

GlobalSolution GlobalSolver::solve(const EnrichmentData& enrichment,
                                   const BoundaryConditions& bcs, double load_factor) {
  return impl_->solve(enrichment, bcs, load_factor);
}

GlobalSolution assemble_and_solve(const Cover& cover, const EnrichmentData& enrichment,
                                  const MaterialParams& mat, const BoundaryConditions& bcs,
                                  double load_factor) {
  GlobalSolver solver(cover, mat);
  return solver.solve(enrichment, bcs, load_factor);
}

Vec2 GlobalSolution::evaluate(Vec2 p, const Vec2* side_hint) const {
  if (!cover->domain.inside(p)) throw SolverError("out-of-domain: evaluation point outside the beam");
  if (enrichment.crack && !side_hint) {
    if (enrichment.crack->project(p).dist < 1e-12)
      throw SolverError("out-of-domain: evaluation point on the crack without a side hint");
  }
  BasisEval be;
  eval_basis(*cover, enrichment, p, false, side_hint, be);
  Vec2 u{};
  for (int a = 0; a < be.n; ++a) {
    u.x += coeffs[2 * be.scalar[a]] * be.val[a];
    u.y += coeffs[2 * be.scalar[a] + 1] * be.val[a];
  }
  return u;
}

}  // namespace pumpd
