#include "pumpd/crack_path.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <utility>

#include "pumpd/errors.hpp"

namespace pumpd {

double CrackPath::arc_length() const {
  double L = 0.0;
  for (std::size_t k = 1; k < points.size(); ++k) L += dist(points[k - 1], points[k]);
  return L;
}

CrackPath::Projection CrackPath::project(Vec2 p) const {
  Projection best;
  best.dist = std::numeric_limits<double>::infinity();
  best.segment = -1;
  double arc_before = 0.0;
  double best_t = 0.0;
  for (std::size_t k = 1; k < points.size(); ++k) {
    Vec2 a = points[k - 1], b = points[k];
    Vec2 ab = b - a;
    double len2 = ab.norm2();
    double t = len2 > 0.0 ? std::clamp((p - a).dot(ab) / len2, 0.0, 1.0) : 0.0;
    Vec2 c = a + ab * t;
    double d = dist(p, c);
    if (d < best.dist) {
      best.dist = d;
      best.closest = c;
      best.segment = static_cast<int>(k - 1);
      best.arc = arc_before + t * std::sqrt(len2);
      best_t = t;
    }
    arc_before += std::sqrt(len2);
  }
  // Side sign: nearest segment; at a shared vertex use the bisector of the
  // two adjacent directions so the sign field is consistent around corners.
  int k = best.segment;
  Vec2 dir = (points[k + 1] - points[k]).normalized();
  bool at_start_vertex = best_t == 0.0 && k > 0;
  bool at_end_vertex = best_t == 1.0 && k + 2 < static_cast<int>(points.size());
  if (at_start_vertex) dir = (dir + (points[k] - points[k - 1]).normalized()).normalized();
  if (at_end_vertex) dir = (dir + (points[k + 2] - points[k + 1]).normalized()).normalized();
  double s = dir.cross(p - best.closest);
  best.side = s < 0.0 ? -1.0 : 1.0;
  return best;
}

bool CrackPath::intersects_segment(Vec2 a, Vec2 b) const {
  for (std::size_t k = 1; k < points.size(); ++k)
    if (segments_intersect(a, b, points[k - 1], points[k])) return true;
  return false;
}

bool CrackPath::is_simple() const {
  // Segment-pair sweep; adjacent segments may share only their joint vertex.
  for (std::size_t i = 1; i < points.size(); ++i) {
    for (std::size_t j = i + 2; j < points.size(); ++j) {
      if (segments_intersect(points[i - 1], points[i], points[j - 1], points[j])) return false;
    }
  }
  // Adjacent segments must not fold back onto each other.
  for (std::size_t i = 2; i < points.size(); ++i) {
    Vec2 u = points[i - 1] - points[i - 2];
    Vec2 v = points[i] - points[i - 1];
    if (u.cross(v) == 0.0 && u.dot(v) < 0.0) return false;
  }
  return true;
}

void CrackPath::validate() const {
  if (points.size() < 2) throw SolverError("crack path must have at least 2 points");
  for (std::size_t k = 1; k < points.size(); ++k)
    if (points[k] == points[k - 1]) throw SolverError("crack path has duplicate consecutive points");
  if (!is_simple()) throw SolverError("crack path is self-intersecting");
}

std::vector<Vec2> simplify_polyline(const std::vector<Vec2>& pts, double tol) {
  if (pts.size() <= 2) return pts;
  std::vector<bool> keep(pts.size(), false);
  keep.front() = keep.back() = true;
  // Iterative Douglas-Peucker on an explicit stack.
  std::vector<std::pair<std::size_t, std::size_t>> stack{{0, pts.size() - 1}};
  while (!stack.empty()) {
    auto [lo, hi] = stack.back();
    stack.pop_back();
    double worst = 0.0;
    std::size_t worst_k = lo;
    for (std::size_t k = lo + 1; k < hi; ++k) {
      double d = dist_point_segment(pts[k], pts[lo], pts[hi]);
      if (d > worst) {
        worst = d;
        worst_k = k;
      }
    }
    if (worst > tol) {
      keep[worst_k] = true;
      stack.push_back({lo, worst_k});
      stack.push_back({worst_k, hi});
    }
  }
  std::vector<Vec2> out;
  for (std::size_t k = 0; k < pts.size(); ++k)
    if (keep[k]) out.push_back(pts[k]);
  return out;
}

CrackPath resample_path(const CrackPath& path, double step) {
  if (path.points.size() < 2 || !(step > 0.0)) return path;
  CrackPath out;
  for (std::size_t k = 1; k < path.points.size(); ++k) {
    Vec2 a = path.points[k - 1], b = path.points[k];
    out.points.push_back(a);
    double len = dist(a, b);
    int pieces = static_cast<int>(len / step);
    for (int i = 1; i <= pieces; ++i) {
      Vec2 p = a + (b - a) * (static_cast<double>(i) / (pieces + 1));
      out.points.push_back(p);
    }
  }
  out.points.push_back(path.points.back());
  return out;
}

CrackPath update_crack(const CrackPath& previous, const CrackPath& extension, double gap_tol,
                       double simplify_tol) {
  previous.validate();
  if (extension.points.empty()) return previous;

  double gap = dist(previous.tip(), extension.points.front());
  if (gap > gap_tol) {
    std::ostringstream msg;
    msg << "gap: crack extension starts " << gap << " m from the previous tip (tolerance "
        << gap_tol << " m)";
    throw SolverError(msg.str());
  }

  // Simplify across the junction, anchored at the vertex before the previous
  // tip so earlier geometry stays untouched.
  std::vector<Vec2> tail;
  tail.push_back(previous.points[previous.points.size() - 2]);
  tail.push_back(previous.tip());
  for (const Vec2& p : extension.points)
    if (p != tail.back()) tail.push_back(p);
  if (tail.size() < 3) return previous;
  tail = simplify_polyline(tail, simplify_tol);

  CrackPath merged;
  merged.points.assign(previous.points.begin(), previous.points.end() - 2);
  merged.points.insert(merged.points.end(), tail.begin(), tail.end());
  merged.validate();
  return merged;
}

}  // namespace pumpd
