#include "pumpd/pd_solver.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <sstream>

#include "pumpd/errors.hpp"
#include "pumpd/parallel.hpp"

namespace pumpd {

std::vector<double> PDState::damage() const {
  std::vector<double> d(size(), 0.0);
  for (std::size_t i = 0; i < size(); ++i) {
    int begin = bond_offsets[i], end = bond_offsets[i + 1];
    if (begin == end) continue;
    int softened = 0;
    for (int k = begin; k < end; ++k) softened += bond_softened[k];
    d[i] = static_cast<double>(softened) / static_cast<double>(end - begin);
  }
  return d;
}

double PDState::max_damage() const {
  double m = 0.0;
  for (double v : damage()) m = std::max(m, v);
  return m;
}

std::vector<std::vector<int>> build_neighbor_lists(const std::vector<Vec2>& positions,
                                                   double delta) {
  const std::size_t n = positions.size();
  std::vector<std::vector<int>> lists(n);
  if (n == 0) return lists;

  Vec2 lo = positions[0], hi = positions[0];
  for (const Vec2& p : positions) {
    lo.x = std::min(lo.x, p.x);
    lo.y = std::min(lo.y, p.y);
    hi.x = std::max(hi.x, p.x);
    hi.y = std::max(hi.y, p.y);
  }
  int nx = static_cast<int>((hi.x - lo.x) / delta) + 1;
  int ny = static_cast<int>((hi.y - lo.y) / delta) + 1;
  auto cell_of = [&](Vec2 p) {
    int cx = std::min(nx - 1, static_cast<int>((p.x - lo.x) / delta));
    int cy = std::min(ny - 1, static_cast<int>((p.y - lo.y) / delta));
    return cy * nx + cx;
  };
  std::vector<std::vector<int>> cells(static_cast<std::size_t>(nx) * ny);
  for (std::size_t i = 0; i < n; ++i) cells[cell_of(positions[i])].push_back(static_cast<int>(i));

  const double delta2 = delta * delta;
  ThreadPool::global().parallel_for(n, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      int cx = std::min(nx - 1, static_cast<int>((positions[i].x - lo.x) / delta));
      int cy = std::min(ny - 1, static_cast<int>((positions[i].y - lo.y) / delta));
      auto& out = lists[i];
      for (int dy = -1; dy <= 1; ++dy) {
        for (int dx = -1; dx <= 1; ++dx) {
          int gx = cx + dx, gy = cy + dy;
          if (gx < 0 || gx >= nx || gy < 0 || gy >= ny) continue;
          for (int j : cells[static_cast<std::size_t>(gy) * nx + gx]) {
            if (j == static_cast<int>(i)) continue;
            double d2 = dist2(positions[i], positions[j]);
            if (d2 > 0.0 && d2 < delta2) out.push_back(j);
          }
        }
      }
      std::sort(out.begin(), out.end());
    }
  });
  return lists;
}

PDState generate_nodes(const PDBox& box, const DomainSpec& domain, const CrackPath* crack) {
  Rect clip = box.rect.intersection(domain.bounds());
  if (clip.empty()) throw SolverError("empty-domain: PD box does not intersect the beam");
  const double h = box.h_pd;
  if (!(h > 0.0)) throw ConfigError("invalid-parameter: h_pd must be > 0");

  // Lattice anchored so the initial crack line and the beam bottom edge are
  // cell-edge lines; nodes sit at cell centers and never on the crack itself.
  Vec2 anchor{domain.initial_crack ? domain.initial_crack->base.x : clip.lo.x,
              domain.bounds().lo.y};

  auto first_index = [h](double anchor_c, double lo_c) {
    return static_cast<long>(std::ceil((lo_c - anchor_c) / h - 0.5 - 1e-12));
  };
  long i0 = first_index(anchor.x, clip.lo.x);
  long j0 = first_index(anchor.y, clip.lo.y);

  PDState state;
  state.h_pd = h;
  for (long j = j0;; ++j) {
    double y = anchor.y + (static_cast<double>(j) + 0.5) * h;
    if (y >= clip.hi.y) break;
    if (y < clip.lo.y) continue;
    for (long i = i0;; ++i) {
      double x = anchor.x + (static_cast<double>(i) + 0.5) * h;
      if (x >= clip.hi.x) break;
      if (x < clip.lo.x) continue;
      Vec2 p{x, y};
      if (domain.in_hole(p)) continue;
      state.positions.push_back(p);
    }
  }
  if (state.positions.empty())
    throw SolverError("empty-domain: no PD nodes inside the box");

  const std::size_t n = state.positions.size();
  state.displacement.assign(n, Vec2{});
  state.velocity.assign(n, Vec2{});
  state.acceleration.assign(n, Vec2{});
  state.body_force.assign(n, Vec2{});
  state.volume.assign(n, h * h);
  state.in_layer.assign(n, 0);

  auto lists = build_neighbor_lists(state.positions, box.layer_width);

  auto bond_blocked = [&](Vec2 a, Vec2 b) {
    if (crack && crack->intersects_segment(a, b)) return true;
    for (const auto& hole : domain.holes)
      if (segment_crosses_disc(a, b, hole.center, hole.radius)) return true;
    return false;
  };

  state.bond_offsets.assign(n + 1, 0);
  for (std::size_t i = 0; i < n; ++i) {
    auto& list = lists[i];
    list.erase(std::remove_if(list.begin(), list.end(),
                              [&](int j) {
                                return bond_blocked(state.positions[i], state.positions[j]);
                              }),
               list.end());
    state.bond_offsets[i + 1] = state.bond_offsets[i] + static_cast<int>(list.size());
  }
  state.bond_neighbor.reserve(state.bond_offsets[n]);
  state.bond_length.reserve(state.bond_offsets[n]);
  for (std::size_t i = 0; i < n; ++i) {
    for (int j : lists[i]) {
      state.bond_neighbor.push_back(j);
      state.bond_length.push_back(dist(state.positions[i], state.positions[j]));
    }
  }
  state.bond_softened.assign(state.bond_neighbor.size(), 0);
  return state;
}

std::vector<int> identify_boundary_layer(PDState& state, const PDBox& box,
                                         const DomainSpec& domain) {
  const Rect beam = domain.bounds();
  const Rect r = box.rect;
  const double tol = 1e-12;
  const bool phys_lo_x = std::abs(r.lo.x - beam.lo.x) <= tol;
  const bool phys_hi_x = std::abs(r.hi.x - beam.hi.x) <= tol;
  const bool phys_lo_y = std::abs(r.lo.y - beam.lo.y) <= tol;
  const bool phys_hi_y = std::abs(r.hi.y - beam.hi.y) <= tol;
  const double w = box.layer_width;

  state.layer.clear();
  std::fill(state.in_layer.begin(), state.in_layer.end(), 0);
  for (std::size_t i = 0; i < state.size(); ++i) {
    Vec2 p = state.positions[i];
    bool in = (!phys_lo_x && p.x - r.lo.x < w) || (!phys_hi_x && r.hi.x - p.x < w) ||
              (!phys_lo_y && p.y - r.lo.y < w) || (!phys_hi_y && r.hi.y - p.y < w);
    if (in) {
      state.in_layer[i] = 1;
      state.layer.push_back(static_cast<int>(i));
    }
  }
  state.layer_targets.assign(state.layer.size(), Vec2{});
  return state.layer;
}

void apply_dirichlet_ramp(PDState& state, const std::vector<Vec2>& targets, double t, double T) {
  if (!(T > 0.0)) throw ConfigError("invalid-schedule: ramp time T must be > 0");
  if (t < 0.0 || t > T) throw ConfigError("invalid-schedule: ramp time outside [0, T]");
  if (targets.size() != state.layer.size())
    throw SolverError("dirichlet targets do not match the boundary layer");
  const double f = t / T;
  for (std::size_t k = 0; k < state.layer.size(); ++k) {
    int i = state.layer[k];
    state.displacement[i] = targets[k] * f;
    state.velocity[i] = targets[k] / T;
    state.acceleration[i] = Vec2{};
  }
}

namespace {

// Shared force/softening gather for one node. Accumulates the internal force
// density and flips softened flags where |S| exceeds the critical stretch.
inline Vec2 gather_node(PDState& state, std::size_t i, const MaterialParams& mat,
                        const HorizonGeometry& horizon, bool accumulate_force) {
  Vec2 f = state.body_force[i];
  const Vec2 pi = state.positions[i];
  const Vec2 ui = state.displacement[i];
  const int begin = state.bond_offsets[i], end = state.bond_offsets[i + 1];
  for (int k = begin; k < end; ++k) {
    const int j = state.bond_neighbor[k];
    const double L = state.bond_length[k];
    const Vec2 dx = state.positions[j] - pi;
    const Vec2 du = state.displacement[j] - ui;
    const double S = du.dot(dx) / dx.norm2();
    if (!state.bond_softened[k] && std::abs(S) > critical_stretch(L, mat.beta))
      state.bond_softened[k] = 1;
    if (accumulate_force) {
      const double dpsi = 2.0 * mat.C * mat.beta * L * S * std::exp(-mat.beta * L * S * S) /
                          (horizon.delta * horizon.measure);
      f += dx * (dpsi / (L * L) * state.volume[j]);
    }
  }
  return f;
}

}  // namespace

void step_central_difference(PDState& state, const MaterialParams& mat,
                             const HorizonGeometry& horizon, double dt, double damping) {
  if (!(dt > 0.0)) throw ConfigError("invalid-parameter: dt must be > 0");
  const std::size_t n = state.size();
  const double half_dt = 0.5 * dt;
  ThreadPool& pool = ThreadPool::global();

  // Kick + drift.
  pool.parallel_for(n, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      if (state.in_layer[i]) continue;
      state.velocity[i] += state.acceleration[i] * half_dt;
      state.displacement[i] += state.velocity[i] * dt;
    }
  });

  // Forces at the new positions; softened flags for every node's bonds.
  std::atomic<long> first_bad{-1};
  pool.parallel_for(n, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      bool free_node = !state.in_layer[i];
      Vec2 f = gather_node(state, i, mat, horizon, free_node);
      if (free_node) {
        Vec2 a = f / mat.rho;
        state.acceleration[i] = a;
        if (!std::isfinite(a.x) || !std::isfinite(a.y) ||
            !std::isfinite(state.displacement[i].x) || !std::isfinite(state.displacement[i].y)) {
          // Atomic min so the reported node is thread-count independent.
          long mine = static_cast<long>(i);
          long cur = first_bad.load();
          while ((cur < 0 || mine < cur) && !first_bad.compare_exchange_weak(cur, mine)) {
          }
        }
      }
    }
  });
  if (first_bad.load() >= 0) {
    std::ostringstream msg;
    msg << "divergence: non-finite state at node " << first_bad.load() << " (t=" << state.time
        << " s)";
    throw SolverError(msg.str());
  }

  // Second kick, with optional mass-proportional damping.
  const double damp = damping > 0.0 ? std::max(0.0, 1.0 - damping * dt) : 1.0;
  pool.parallel_for(n, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      if (state.in_layer[i]) continue;
      state.velocity[i] += state.acceleration[i] * half_dt;
      if (damp != 1.0) state.velocity[i] = state.velocity[i] * damp;
    }
  });

  state.time += dt;
}

std::vector<double> run_local(PDState& state, const MaterialParams& mat,
                              const HorizonGeometry& horizon, int steps, double dt,
                              double damping, int snapshot_every, const SnapshotSink& sink) {
  if (steps < 0) throw ConfigError("invalid-schedule: negative step count");
  if (steps == 0) return state.damage();
  const double T = static_cast<double>(steps) * dt;

  // Initial accelerations so the first kick uses forces at t = 0.
  ThreadPool::global().parallel_for(state.size(), [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      if (state.in_layer[i]) continue;
      state.acceleration[i] = gather_node(state, i, mat, horizon, true) / mat.rho;
    }
  });

  for (int k = 1; k <= steps; ++k) {
    apply_dirichlet_ramp(state, state.layer_targets, static_cast<double>(k) * dt, T);
    try {
      step_central_difference(state, mat, horizon, dt, damping);
    } catch (const SolverError& e) {
      std::ostringstream msg;
      msg << e.what() << " [local step " << k << "/" << steps << "]";
      throw SolverError(msg.str());
    }
    if (snapshot_every > 0 && sink && (k % snapshot_every == 0 || k == steps)) sink(state, k);
  }
  return state.damage();
}

}  // namespace pumpd
