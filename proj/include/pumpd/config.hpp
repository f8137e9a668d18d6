#pragma once

#include <string>

#include "pumpd/domain.hpp"
#include "pumpd/material.hpp"

namespace pumpd {

// Inner PD scheme per load step: one local solve, or repeated
// crack-update/re-apply cycles until the tip stops advancing.
enum class InnerScheme { SinglePass, SchemeB };

InnerScheme parse_inner_scheme(const std::string& s);
std::string inner_scheme_name(InnerScheme s);

// Flat key=value run configuration (sections: material, discretization,
// schedule, box, output). Omitted keys take the documented defaults; the
// discretization defaults are the benchmark values.
struct RunConfig {
  CaseId case_id = CaseId::I;

  // [material] PMMA-like defaults; not experiment ground truth, overridable.
  double E = 3.2e9;
  double nu = 1.0 / 3.0;
  double Gc = 300.0;
  double rho = 1190.0;

  // [discretization]
  double h_pd = 0.00049609375;
  double h_pum = 0.00396875;
  double delta_factor = 8.0;
  long t_n = 50000;
  double t_s = 2e-7;
  double damping = 0.0;   // optional mass-proportional damping [1/s]
  double alpha = 1.3;     // cover stretch
  double thickness = 0.0254;

  // [schedule]
  int n_load_steps = 20;
  int exchange_every = 5;
  InnerScheme inner_scheme = InnerScheme::SinglePass;
  double inner_advance_tol = -1.0;  // default: h_pd
  double force = 9e5;               // applied load F [N]
  double damage_threshold = 0.35;

  // [box]
  double initial_size = -1.0;  // default: 64 * h_pd
  double margin = -1.0;        // default: 2 * delta
  double growth = 1.25;
  double max_size = -1.0;      // default: max(0.085, initial_size)

  // [output]
  std::string out_dir = "out";
  int snapshot_every = 0;

  double delta() const { return delta_factor * h_pd; }
  double ramp_time() const { return static_cast<double>(t_n) * t_s; }
};

// Parses and validates; unknown sections/keys are rejected and violations
// reported with their key path. Defaults are resolved, so serializing the
// result and reparsing is a fixed point.
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::string& path);
std::string serialize_config(const RunConfig& config);

MaterialParams make_material(const RunConfig& config);

}  // namespace pumpd
