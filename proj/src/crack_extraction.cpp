#include "pumpd/crack_extraction.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <sstream>

#include "pumpd/errors.hpp"

namespace pumpd {

double DamageGrid::sample(Vec2 p) const {
  double fx = std::clamp((p.x - origin.x) / spacing, 0.0, static_cast<double>(nx - 1));
  double fy = std::clamp((p.y - origin.y) / spacing, 0.0, static_cast<double>(ny - 1));
  int i = std::min(nx - 2, static_cast<int>(fx));
  int j = std::min(ny - 2, static_cast<int>(fy));
  if (nx == 1) i = 0;
  if (ny == 1) j = 0;
  double tx = fx - i, ty = fy - j;
  double v00 = at(i, j);
  double v10 = nx > 1 ? at(i + 1, j) : v00;
  double v01 = ny > 1 ? at(i, j + 1) : v00;
  double v11 = (nx > 1 && ny > 1) ? at(i + 1, j + 1) : v00;
  return (1 - tx) * (1 - ty) * v00 + tx * (1 - ty) * v10 + (1 - tx) * ty * v01 + tx * ty * v11;
}

DamageGrid resample_damage(const PDState& state, double spacing) {
  if (state.size() == 0) throw SolverError("empty-domain: cannot resample an empty PD state");
  if (!(spacing >= state.h_pd))
    throw ConfigError("invalid-parameter: resample spacing must be >= h_pd");
  std::vector<double> damage = state.damage();

  Vec2 lo = state.positions[0], hi = state.positions[0];
  for (const Vec2& p : state.positions) {
    lo.x = std::min(lo.x, p.x);
    lo.y = std::min(lo.y, p.y);
    hi.x = std::max(hi.x, p.x);
    hi.y = std::max(hi.y, p.y);
  }
  DamageGrid grid;
  grid.spacing = spacing;
  grid.origin = lo;
  grid.nx = static_cast<int>(std::floor((hi.x - lo.x) / spacing)) + 2;
  grid.ny = static_cast<int>(std::floor((hi.y - lo.y) / spacing)) + 2;
  grid.values.assign(static_cast<std::size_t>(grid.nx) * grid.ny, 0.0);

  // Bucket PD nodes by grid cell, then gather inverse-distance weights over
  // nodes within one spacing of each grid node.
  std::vector<std::vector<int>> buckets(grid.values.size());
  for (std::size_t k = 0; k < state.size(); ++k) {
    int i = std::clamp(static_cast<int>((state.positions[k].x - lo.x) / spacing), 0, grid.nx - 1);
    int j = std::clamp(static_cast<int>((state.positions[k].y - lo.y) / spacing), 0, grid.ny - 1);
    buckets[static_cast<std::size_t>(j) * grid.nx + i].push_back(static_cast<int>(k));
  }
  const double eps = 1e-6 * spacing;
  for (int j = 0; j < grid.ny; ++j) {
    for (int i = 0; i < grid.nx; ++i) {
      Vec2 g = grid.node(i, j);
      double wsum = 0.0, vsum = 0.0;
      for (int dj = -1; dj <= 1; ++dj) {
        for (int di = -1; di <= 1; ++di) {
          int ci = i + di, cj = j + dj;
          if (ci < 0 || ci >= grid.nx || cj < 0 || cj >= grid.ny) continue;
          for (int k : buckets[static_cast<std::size_t>(cj) * grid.nx + ci]) {
            double d = dist(g, state.positions[k]);
            if (d >= spacing) continue;
            double w = 1.0 / (d + eps);
            wsum += w;
            vsum += w * damage[k];
          }
        }
      }
      grid.at(i, j) = wsum > 0.0 ? vsum / wsum : 0.0;
    }
  }
  return grid;
}

namespace {

struct SegmentList {
  std::vector<std::pair<Vec2, Vec2>> segs;
};

Vec2 edge_point(Vec2 a, Vec2 b, double va, double vb, double thr) {
  double t = (thr - va) / (vb - va);
  return a + (b - a) * t;
}

// Links loose segments into polylines by matching quantized endpoints.
std::vector<std::vector<Vec2>> link_segments(const std::vector<std::pair<Vec2, Vec2>>& segs,
                                             double eps) {
  auto key = [eps](Vec2 p) {
    return std::pair<long long, long long>{static_cast<long long>(std::llround(p.x / eps)),
                                           static_cast<long long>(std::llround(p.y / eps))};
  };
  std::map<std::pair<long long, long long>, std::vector<int>> at_point;
  for (std::size_t s = 0; s < segs.size(); ++s) {
    at_point[key(segs[s].first)].push_back(static_cast<int>(s));
    at_point[key(segs[s].second)].push_back(static_cast<int>(s));
  }
  std::vector<bool> used(segs.size(), false);
  std::vector<std::vector<Vec2>> polylines;

  auto walk = [&](int start, bool from_first) {
    std::vector<Vec2> line;
    int s = start;
    Vec2 head = from_first ? segs[s].first : segs[s].second;
    Vec2 tail = from_first ? segs[s].second : segs[s].first;
    line.push_back(head);
    line.push_back(tail);
    used[s] = true;
    for (;;) {
      auto it = at_point.find(key(tail));
      int next = -1;
      if (it != at_point.end())
        for (int cand : it->second)
          if (!used[cand]) {
            next = cand;
            break;
          }
      if (next < 0) break;
      used[next] = true;
      Vec2 a = segs[next].first, b = segs[next].second;
      tail = key(a) == key(tail) ? b : a;
      line.push_back(tail);
    }
    return line;
  };

  // Open chains first: start from endpoints of odd degree.
  for (std::size_t s = 0; s < segs.size(); ++s) {
    if (used[s]) continue;
    bool first_open = at_point[key(segs[s].first)].size() % 2 == 1;
    bool second_open = at_point[key(segs[s].second)].size() % 2 == 1;
    if (first_open || second_open) polylines.push_back(walk(static_cast<int>(s), first_open));
  }
  for (std::size_t s = 0; s < segs.size(); ++s)
    if (!used[s]) polylines.push_back(walk(static_cast<int>(s), true));
  return polylines;
}

}  // namespace

std::vector<std::vector<Vec2>> iso_contour(const DamageGrid& grid, double threshold) {
  if (!(threshold > 0.0 && threshold < 1.0))
    throw ConfigError("invalid-parameter: iso threshold must lie in (0, 1)");
  std::vector<std::pair<Vec2, Vec2>> segs;
  for (int j = 0; j + 1 < grid.ny; ++j) {
    for (int i = 0; i + 1 < grid.nx; ++i) {
      double v00 = grid.at(i, j), v10 = grid.at(i + 1, j);
      double v01 = grid.at(i, j + 1), v11 = grid.at(i + 1, j + 1);
      int c = (v00 > threshold ? 1 : 0) | (v10 > threshold ? 2 : 0) | (v11 > threshold ? 4 : 0) |
              (v01 > threshold ? 8 : 0);
      if (c == 0 || c == 15) continue;
      Vec2 p00 = grid.node(i, j), p10 = grid.node(i + 1, j);
      Vec2 p01 = grid.node(i, j + 1), p11 = grid.node(i + 1, j + 1);
      Vec2 bottom = edge_point(p00, p10, v00, v10, threshold);
      Vec2 right = edge_point(p10, p11, v10, v11, threshold);
      Vec2 top = edge_point(p01, p11, v01, v11, threshold);
      Vec2 left = edge_point(p00, p01, v00, v01, threshold);
      switch (c) {
        case 1: case 14: segs.push_back({left, bottom}); break;
        case 2: case 13: segs.push_back({bottom, right}); break;
        case 3: case 12: segs.push_back({left, right}); break;
        case 4: case 11: segs.push_back({right, top}); break;
        case 6: case 9: segs.push_back({bottom, top}); break;
        case 7: case 8: segs.push_back({left, top}); break;
        case 5: case 10: {
          // Saddle: the cell-average rule decides the connection.
          bool center_inside = 0.25 * (v00 + v10 + v01 + v11) > threshold;
          bool pair_bl_tr = (c == 5) == center_inside;
          if (pair_bl_tr) {
            segs.push_back({left, top});
            segs.push_back({bottom, right});
          } else {
            segs.push_back({left, bottom});
            segs.push_back({right, top});
          }
          break;
        }
        default: break;
      }
    }
  }
  return link_segments(segs, grid.spacing * 1e-9);
}

namespace {

struct ContourSample {
  Vec2 p;
  int contour;
  double arc;
};

std::vector<ContourSample> resample_contours(const std::vector<std::vector<Vec2>>& contours,
                                             double step) {
  std::vector<ContourSample> samples;
  for (std::size_t c = 0; c < contours.size(); ++c) {
    const auto& line = contours[c];
    double carry = 0.0, arc = 0.0;
    if (!line.empty()) samples.push_back({line[0], static_cast<int>(c), 0.0});
    for (std::size_t k = 1; k < line.size(); ++k) {
      Vec2 a = line[k - 1], b = line[k];
      double len = dist(a, b);
      double along = step - carry;
      while (along <= len) {
        samples.push_back({a + (b - a) * (along / len), static_cast<int>(c), arc + along});
        along += step;
      }
      carry = len - (along - step);
      arc += len;
    }
  }
  return samples;
}

}  // namespace

CrackPath centerline(const std::vector<std::vector<Vec2>>& contours, const CrackPath& previous,
                     double spacing, double max_band_width) {
  if (contours.empty()) return previous;
  previous.validate();

  std::vector<ContourSample> samples = resample_contours(contours, spacing * 0.5);

  // First hit of a ray from p along dir with any contour segment, ignoring
  // the immediate neighbourhood of p itself.
  auto ray_hit = [&](Vec2 p, Vec2 dir, double tmin, double tmax) {
    double best = tmax;
    for (const auto& line : contours) {
      for (std::size_t k = 1; k < line.size(); ++k) {
        Vec2 a = line[k - 1], b = line[k];
        Vec2 ab = b - a;
        double denom = dir.cross(ab);
        if (std::abs(denom) < 1e-30) continue;
        double t = (a - p).cross(ab) / denom;
        double u = (a - p).cross(dir) / denom;
        if (t > tmin && t < best && u >= -1e-9 && u <= 1.0 + 1e-9) best = t;
      }
    }
    return best;
  };

  // Pair each sample with the nearest contour point across the band: cast a
  // ray along the local normal (both senses) and take the closer hit. Samples
  // on the band caps ray down the band axis; the transverse width estimate is
  // therefore the median pair distance, not the maximum.
  std::vector<Vec2> midpoints;
  std::vector<double> widths;
  for (std::size_t a = 0; a < samples.size(); ++a) {
    Vec2 t{};
    if (a > 0 && samples[a - 1].contour == samples[a].contour)
      t += samples[a].p - samples[a - 1].p;
    if (a + 1 < samples.size() && samples[a + 1].contour == samples[a].contour)
      t += samples[a + 1].p - samples[a].p;
    if (t.norm() == 0.0) continue;
    Vec2 n = t.perp().normalized();
    const double tmin = 0.25 * spacing;
    const double tmax = 100.0 * max_band_width;
    double d_pos = ray_hit(samples[a].p, n, tmin, tmax);
    double d_neg = ray_hit(samples[a].p, -n, tmin, tmax);
    double d = std::min(d_pos, d_neg);
    if (d >= tmax) continue;
    Vec2 dir = d_pos <= d_neg ? n : -n;
    widths.push_back(d);
    midpoints.push_back(samples[a].p + dir * (d / 2.0));
  }
  if (midpoints.empty()) return previous;
  std::vector<double> sorted_widths = widths;
  std::sort(sorted_widths.begin(), sorted_widths.end());
  double band_width = sorted_widths[sorted_widths.size() / 2];
  if (band_width > max_band_width) {
    std::ostringstream msg;
    msg << "ambiguous-band: damage band width " << band_width << " m exceeds " << max_band_width
        << " m (damage not localized)";
    throw SolverError(msg.str());
  }

  // Drop midpoints that duplicate the existing crack: points projecting well
  // before the tip and lying close to the previous path.
  const double L_prev = previous.arc_length();
  std::vector<Vec2> fresh;
  for (Vec2 m : midpoints) {
    auto proj = previous.project(m);
    bool behind = proj.arc < L_prev - spacing;
    if (behind && proj.dist < 2.0 * spacing) continue;
    fresh.push_back(m);
  }
  if (fresh.empty()) return previous;

  // Merge clusters of near-coincident midpoints.
  std::vector<Vec2> merged;
  std::vector<bool> taken(fresh.size(), false);
  for (std::size_t a = 0; a < fresh.size(); ++a) {
    if (taken[a]) continue;
    Vec2 sum = fresh[a];
    int cnt = 1;
    for (std::size_t b = a + 1; b < fresh.size(); ++b) {
      if (!taken[b] && dist(fresh[a], fresh[b]) < spacing * 0.75) {
        taken[b] = true;
        sum += fresh[b];
        ++cnt;
      }
    }
    merged.push_back(sum / cnt);
  }

  // Chain midpoints outward from the junction (the previous tip). A link may
  // neither double back sharply nor cross the polyline built so far.
  std::vector<Vec2> all = previous.points;
  std::vector<Vec2> chain;
  Vec2 cur = previous.tip();
  Vec2 last_dir{};
  std::vector<bool> used(merged.size(), false);
  const double capture = 2.5 * spacing;
  for (;;) {
    double best = capture;
    int pick = -1;
    for (std::size_t k = 0; k < merged.size(); ++k) {
      if (used[k]) continue;
      double d = dist(cur, merged[k]);
      if (d >= best) continue;
      if (d <= spacing * 0.1) {  // coincides with the junction
        used[k] = true;
        continue;
      }
      Vec2 nd = merged[k] - cur;
      if (last_dir.norm() > 0.0 && nd.dot(last_dir) < -0.25 * nd.norm() * last_dir.norm())
        continue;
      bool crosses = false;
      for (std::size_t s = 1; s + 1 < all.size() && !crosses; ++s)
        crosses = segments_intersect(cur, merged[k], all[s - 1], all[s]);
      if (crosses) continue;
      best = d;
      pick = static_cast<int>(k);
    }
    if (pick < 0) break;
    used[pick] = true;
    last_dir = merged[pick] - cur;
    chain.push_back(merged[pick]);
    all.push_back(merged[pick]);
    cur = merged[pick];
  }
  if (chain.empty()) return previous;

  return update_crack(previous, CrackPath{std::move(chain)}, 2.5 * spacing, spacing * 0.25);
}

CrackPath extract_crack(const PDState& state, const CrackPath& previous, double threshold,
                        double spacing, double max_band_width) {
  DamageGrid grid = resample_damage(state, spacing);
  auto contours = iso_contour(grid, threshold);
  return centerline(contours, previous, spacing, max_band_width);
}

}  // namespace pumpd
