#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "pumpd/crack_path.hpp"
#include "pumpd/domain.hpp"
#include "pumpd/geometry.hpp"
#include "pumpd/pd_model.hpp"

namespace pumpd {

// Rectangular subdomain simulated with the local peridynamic model.
struct PDBox {
  Rect rect;           // in beam coordinates, already clipped to the beam
  double h_pd;         // node spacing [m]
  double layer_width;  // horizon delta [m]
};

// Node cloud of one local PD box. Bonds are stored per node (both directions)
// so force evaluation is a pure gather; this fixes the per-node summation
// order and makes trajectories independent of the worker-thread count.
struct PDState {
  std::vector<Vec2> positions;
  std::vector<Vec2> displacement;
  std::vector<Vec2> velocity;
  std::vector<Vec2> acceleration;
  std::vector<Vec2> body_force;
  std::vector<double> volume;

  // CSR adjacency.
  std::vector<int> bond_offsets;    // size n+1
  std::vector<int> bond_neighbor;   // sorted within each node's range
  std::vector<double> bond_length;
  std::vector<char> bond_softened;

  // Dirichlet-controlled boundary layer.
  std::vector<int> layer;           // node indices, ascending
  std::vector<char> in_layer;       // per-node flag
  std::vector<Vec2> layer_targets;  // aligned with `layer`

  double time = 0.0;
  double h_pd = 0.0;

  std::size_t size() const { return positions.size(); }
  int bond_count(int i) const { return bond_offsets[i + 1] - bond_offsets[i]; }

  // Per-node fraction of softened bonds (0 for isolated nodes).
  std::vector<double> damage() const;
  double max_damage() const;
};

// Exact neighbor sets {j : 0 < |x_j - x_i| < delta} via uniform spatial
// hashing with cell size delta; each list sorted ascending.
std::vector<std::vector<int>> build_neighbor_lists(const std::vector<Vec2>& positions,
                                                   double delta);

// Uniform lattice of spacing h_pd inside box.rect intersected with the beam,
// hole interiors excluded. The lattice is anchored so the initial crack line
// and the beam bottom edge lie on cell-edge lines. Bonds under distance delta
// are built, then bonds crossing the crack polyline or a hole are removed.
// Volumes are a full h_pd^2 everywhere.
PDState generate_nodes(const PDBox& box, const DomainSpec& domain,
                       const CrackPath* crack = nullptr);

// Nodes within layer_width of a box face, excluding faces that coincide with
// the physical beam boundary (those carry the global problem's natural BCs).
// Fills state.layer / state.in_layer and returns the indices.
std::vector<int> identify_boundary_layer(PDState& state, const PDBox& box,
                                         const DomainSpec& domain);

// Layer displacements set to (t/T)*target, velocities to target/T,
// accelerations zeroed. targets must be aligned with state.layer.
void apply_dirichlet_ramp(PDState& state, const std::vector<Vec2>& targets, double t, double T);

// One velocity-Verlet step of the free nodes; softened flags updated from the
// new displacements. Throws SolverError naming the first non-finite node.
void step_central_difference(PDState& state, const MaterialParams& mat,
                             const HorizonGeometry& horizon, double dt, double damping = 0.0);

using SnapshotSink = std::function<void(const PDState&, int step)>;

// Runs `steps` of apply_dirichlet_ramp + step_central_difference with ramp
// time T = steps*dt against state.layer_targets. Returns the damage field.
// snapshot_every > 0 invokes the sink at that step cadence.
std::vector<double> run_local(PDState& state, const MaterialParams& mat,
                              const HorizonGeometry& horizon, int steps, double dt,
                              double damping = 0.0, int snapshot_every = 0,
                              const SnapshotSink& sink = {});

}  // namespace pumpd
