#pragma once

#include <algorithm>
#include <cmath>

namespace pumpd {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  Vec2() = default;
  Vec2(double x_, double y_) : x(x_), y(y_) {}

  Vec2 operator+(Vec2 o) const { return {x + o.x, y + o.y}; }
  Vec2 operator-(Vec2 o) const { return {x - o.x, y - o.y}; }
  Vec2 operator*(double s) const { return {x * s, y * s}; }
  Vec2 operator/(double s) const { return {x / s, y / s}; }
  Vec2 operator-() const { return {-x, -y}; }
  Vec2& operator+=(Vec2 o) { x += o.x; y += o.y; return *this; }
  Vec2& operator-=(Vec2 o) { x -= o.x; y -= o.y; return *this; }
  bool operator==(Vec2 o) const { return x == o.x && y == o.y; }
  bool operator!=(Vec2 o) const { return !(*this == o); }

  double dot(Vec2 o) const { return x * o.x + y * o.y; }
  double cross(Vec2 o) const { return x * o.y - y * o.x; }
  double norm2() const { return x * x + y * y; }
  double norm() const { return std::sqrt(norm2()); }
  Vec2 normalized() const { double n = norm(); return {x / n, y / n}; }
  // 90-degree counter-clockwise rotation.
  Vec2 perp() const { return {-y, x}; }
};

inline Vec2 operator*(double s, Vec2 v) { return v * s; }

inline double dist(Vec2 a, Vec2 b) { return (b - a).norm(); }
inline double dist2(Vec2 a, Vec2 b) { return (b - a).norm2(); }

// Axis-aligned rectangle, lo <= hi componentwise.
struct Rect {
  Vec2 lo;
  Vec2 hi;

  double width() const { return hi.x - lo.x; }
  double height() const { return hi.y - lo.y; }
  double area() const { return width() * height(); }
  Vec2 center() const { return {(lo.x + hi.x) / 2.0, (lo.y + hi.y) / 2.0}; }

  bool contains(Vec2 p) const {
    return p.x >= lo.x && p.x <= hi.x && p.y >= lo.y && p.y <= hi.y;
  }
  // Half-open membership [lo, hi) used for lattice counting.
  bool contains_half_open(Vec2 p) const {
    return p.x >= lo.x && p.x < hi.x && p.y >= lo.y && p.y < hi.y;
  }
  bool intersects(const Rect& o) const {
    return lo.x <= o.hi.x && o.lo.x <= hi.x && lo.y <= o.hi.y && o.lo.y <= hi.y;
  }
  Rect intersection(const Rect& o) const {
    return {{std::max(lo.x, o.lo.x), std::max(lo.y, o.lo.y)},
            {std::min(hi.x, o.hi.x), std::min(hi.y, o.hi.y)}};
  }
  bool empty() const { return hi.x <= lo.x || hi.y <= lo.y; }
  // Distance from an interior point to the nearest edge (negative outside).
  double interior_clearance(Vec2 p) const {
    double dx = std::min(p.x - lo.x, hi.x - p.x);
    double dy = std::min(p.y - lo.y, hi.y - p.y);
    return std::min(dx, dy);
  }
  Rect expanded(double m) const { return {{lo.x - m, lo.y - m}, {hi.x + m, hi.y + m}}; }
  Rect translated(Vec2 t) const { return {lo + t, hi + t}; }
};

// Squared distance from point p to segment [a, b].
inline double dist2_point_segment(Vec2 p, Vec2 a, Vec2 b) {
  Vec2 ab = b - a;
  double len2 = ab.norm2();
  if (len2 == 0.0) return dist2(p, a);
  double t = std::clamp((p - a).dot(ab) / len2, 0.0, 1.0);
  return dist2(p, a + ab * t);
}

inline double dist_point_segment(Vec2 p, Vec2 a, Vec2 b) {
  return std::sqrt(dist2_point_segment(p, a, b));
}

inline int orientation_sign(Vec2 a, Vec2 b, Vec2 c) {
  double v = (b - a).cross(c - a);
  return (v > 0.0) - (v < 0.0);
}

inline bool point_on_segment(Vec2 p, Vec2 a, Vec2 b) {
  if (orientation_sign(a, b, p) != 0) return false;
  return p.x >= std::min(a.x, b.x) && p.x <= std::max(a.x, b.x) &&
         p.y >= std::min(a.y, b.y) && p.y <= std::max(a.y, b.y);
}

// Exact orientation-based test. Touching endpoints count as intersecting.
inline bool segments_intersect(Vec2 p1, Vec2 p2, Vec2 q1, Vec2 q2) {
  int o1 = orientation_sign(p1, p2, q1);
  int o2 = orientation_sign(p1, p2, q2);
  int o3 = orientation_sign(q1, q2, p1);
  int o4 = orientation_sign(q1, q2, p2);
  if (o1 != o2 && o3 != o4) return true;
  if (o1 == 0 && point_on_segment(q1, p1, p2)) return true;
  if (o2 == 0 && point_on_segment(q2, p1, p2)) return true;
  if (o3 == 0 && point_on_segment(p1, q1, q2)) return true;
  if (o4 == 0 && point_on_segment(p2, q1, q2)) return true;
  return false;
}

// True if segment [a,b] passes through the open disc (center, radius).
inline bool segment_crosses_disc(Vec2 a, Vec2 b, Vec2 center, double radius) {
  return dist2_point_segment(center, a, b) < radius * radius;
}

// Proper segment-rect overlap test (shares any point with the closed rect).
inline bool segment_intersects_rect(Vec2 a, Vec2 b, const Rect& r) {
  if (r.contains(a) || r.contains(b)) return true;
  Vec2 c00 = r.lo, c11 = r.hi, c10 = {r.hi.x, r.lo.y}, c01 = {r.lo.x, r.hi.y};
  return segments_intersect(a, b, c00, c10) || segments_intersect(a, b, c10, c11) ||
         segments_intersect(a, b, c11, c01) || segments_intersect(a, b, c01, c00);
}

}  // namespace pumpd
