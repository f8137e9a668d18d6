#pragma once

#include <optional>
#include <string>
#include <vector>

#include "pumpd/config.hpp"
#include "pumpd/crack_path.hpp"
#include "pumpd/domain.hpp"
#include "pumpd/global_solver.hpp"
#include "pumpd/pd_solver.hpp"

namespace pumpd {

struct CouplingSchedule {
  int n_load_steps = 20;
  int exchange_every = 5;
  InnerScheme inner_scheme = InnerScheme::SinglePass;
  double inner_advance_tol = 0.0;  // tip advance below this ends scheme-B iteration
};

// Adaptive PD-box policy: keep the tip clear of the coupling faces, grow when
// the active damage zone spans the box.
struct BoxPolicy {
  double initial_size = 0.0;
  double margin = 0.0;  // minimum tip-to-face clearance, >= 2*delta
  double growth = 1.25;
  double max_size = 0.0;
};

void validate_box_policy(const BoxPolicy& policy, double delta);

// Square of side initial_size centered on the crack tip, clipped to the beam;
// always contains the last margin-length of the crack.
PDBox make_initial_box(const CrackPath& crack, const BoxPolicy& policy, const DomainSpec& domain,
                       double h_pd, double delta);

// Moves the box along the recent tip motion when the tip comes within margin
// of a coupling face; grows it when the damage zone approaches two opposite
// faces. The result contains both tips and is clipped to the beam (clipping
// sets *clipped when the requested box exceeded the beam).
PDBox adapt_box(const PDBox& box, const CrackPath& crack, const BoxPolicy& policy,
                const DomainSpec& domain, const std::optional<Rect>& damage_bbox, Vec2 tip_motion,
                Vec2 previous_tip, bool* clipped = nullptr);

// Dirichlet targets for the boundary layer: the global displacement at each
// layer node's reference position (side hints applied next to the crack).
std::vector<Vec2> transfer_global_to_pd(const GlobalSolution& solution, const PDState& state);

struct StepDiagnostics {
  int step = 0;
  double load_factor = 0.0;
  Vec2 tip;
  Rect box;
  double max_damage = 0.0;
  int local_solves = 0;  // local solves performed at this step
};

struct RunReport {
  CrackPath crack;
  std::vector<StepDiagnostics> steps;
  std::vector<Rect> boxes;  // every box used, in order
  int total_local_solves = 0;
  int exchange_steps = 0;
  bool grew = false;
  std::vector<std::string> warnings;
};

// CSV: step,load_factor,tip_x,tip_y,box_xmin,box_ymin,box_xmax,box_ymax,max_damage
std::string format_diagnostics_csv(const RunReport& report);

// The full coupled load-stepping cycle for one configuration. Snapshots are
// written under config.out_dir when config.snapshot_every > 0 and
// write_snapshots is true.
RunReport run_coupled(const RunConfig& config, bool write_snapshots = false);

}  // namespace pumpd
