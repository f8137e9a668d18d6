#include "pumpd/coupling.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <sstream>

#include "pumpd/crack_extraction.hpp"
#include "pumpd/errors.hpp"
#include "pumpd/io.hpp"

namespace pumpd {

void validate_box_policy(const BoxPolicy& policy, double delta) {
  if (!(policy.margin >= 2.0 * delta))
    throw ConfigError("box.margin: must be >= 2*delta");
  if (!(policy.initial_size > 2.0 * policy.margin))
    throw ConfigError("box.initial_size: must be > 2*margin");
  if (!(policy.growth >= 1.0)) throw ConfigError("box.growth: must be >= 1");
  if (!(policy.max_size >= policy.initial_size))
    throw ConfigError("box.max_size: must be >= initial_size");
}

namespace {

Rect clip_to_beam(const Rect& r, const DomainSpec& domain, bool* clipped) {
  Rect beam = domain.bounds();
  Rect out = r.intersection(beam);
  if (clipped && (r.lo.x < beam.lo.x - 1e-15 || r.lo.y < beam.lo.y - 1e-15 ||
                  r.hi.x > beam.hi.x + 1e-15 || r.hi.y > beam.hi.y + 1e-15))
    *clipped = true;
  return out;
}

// Shifts the rect so it contains p with the given pad where possible.
Rect ensure_contains(Rect r, Vec2 p, double pad) {
  if (p.x - pad < r.lo.x) r = r.translated({p.x - pad - r.lo.x, 0.0});
  if (p.x + pad > r.hi.x) r = r.translated({p.x + pad - r.hi.x, 0.0});
  if (p.y - pad < r.lo.y) r = r.translated({0.0, p.y - pad - r.lo.y});
  if (p.y + pad > r.hi.y) r = r.translated({0.0, p.y + pad - r.hi.y});
  return r;
}

}  // namespace

PDBox make_initial_box(const CrackPath& crack, const BoxPolicy& policy, const DomainSpec& domain,
                       double h_pd, double delta) {
  validate_box_policy(policy, delta);
  crack.validate();
  Vec2 tip = crack.tip();
  if (!domain.inside(tip)) throw SolverError("empty-domain: crack tip outside the beam");
  double s = policy.initial_size / 2.0;
  Rect r{{tip.x - s, tip.y - s}, {tip.x + s, tip.y + s}};

  // Keep the last margin-length of the crack inside despite clipping.
  double want = policy.margin;
  double acc = 0.0;
  Vec2 tail = tip;
  for (std::size_t k = crack.points.size() - 1; k > 0 && acc < want; --k) {
    Vec2 a = crack.points[k - 1], b = crack.points[k];
    double len = dist(a, b);
    if (acc + len >= want) {
      tail = b + (a - b) * ((want - acc) / len);
      break;
    }
    acc += len;
    tail = a;
  }
  Rect clippedr = clip_to_beam(r, domain, nullptr);
  if (!clippedr.contains(tail)) clippedr = ensure_contains(clippedr, tail, 0.0);
  return PDBox{clip_to_beam(clippedr, domain, nullptr), h_pd, delta};
}

PDBox adapt_box(const PDBox& box, const CrackPath& crack, const BoxPolicy& policy,
                const DomainSpec& domain, const std::optional<Rect>& damage_bbox, Vec2 tip_motion,
                Vec2 previous_tip, bool* clipped) {
  validate_box_policy(policy, box.layer_width);
  Rect beam = domain.bounds();
  Rect r = box.rect;
  Vec2 tip = crack.tip();
  const double m = policy.margin;
  const double tol = 1e-12;

  // Restore tip clearance on coupling faces by translating along the recent
  // tip motion (per-axis: only the axes that actually lost clearance move).
  Vec2 shift{};
  bool phys_lo_x = std::abs(r.lo.x - beam.lo.x) <= tol;
  bool phys_hi_x = std::abs(r.hi.x - beam.hi.x) <= tol;
  bool phys_lo_y = std::abs(r.lo.y - beam.lo.y) <= tol;
  bool phys_hi_y = std::abs(r.hi.y - beam.hi.y) <= tol;
  if (!phys_hi_x && r.hi.x - tip.x < m) shift.x = 2.0 * m - (r.hi.x - tip.x);
  if (!phys_lo_x && tip.x - r.lo.x < m) shift.x = -(2.0 * m - (tip.x - r.lo.x));
  if (!phys_hi_y && r.hi.y - tip.y < m) shift.y = 2.0 * m - (r.hi.y - tip.y);
  if (!phys_lo_y && tip.y - r.lo.y < m) shift.y = -(2.0 * m - (tip.y - r.lo.y));
  // Shift only along directions compatible with the tip motion when known.
  if (tip_motion.norm() > 0.0) {
    if (shift.x * tip_motion.x < 0.0 && std::abs(tip_motion.x) > 1e-15) shift.x = 0.0;
    if (shift.y * tip_motion.y < 0.0 && std::abs(tip_motion.y) > 1e-15) shift.y = 0.0;
  }
  r = r.translated(shift);

  // Grow when the active damage zone approaches two opposite faces.
  if (damage_bbox) {
    auto grow_axis = [&](bool x_axis) {
      double lo = x_axis ? damage_bbox->lo.x - r.lo.x : damage_bbox->lo.y - r.lo.y;
      double hi = x_axis ? r.hi.x - damage_bbox->hi.x : r.hi.y - damage_bbox->hi.y;
      double size = x_axis ? r.width() : r.height();
      if (lo < m && hi < m && size < policy.max_size) {
        double extra = std::min(policy.max_size, size * policy.growth) - size;
        if (x_axis) {
          r.lo.x -= extra / 2.0;
          r.hi.x += extra / 2.0;
        } else {
          r.lo.y -= extra / 2.0;
          r.hi.y += extra / 2.0;
        }
      }
    };
    grow_axis(true);
    grow_axis(false);
  }

  r = ensure_contains(r, tip, 0.0);
  Rect before = r;
  r = clip_to_beam(r, domain, clipped);
  // The box must still contain both the previous and the current tip.
  if (!r.contains(previous_tip) || !r.contains(tip)) {
    r.lo.x = std::min(r.lo.x, std::min(previous_tip.x, tip.x));
    r.lo.y = std::min(r.lo.y, std::min(previous_tip.y, tip.y));
    r.hi.x = std::max(r.hi.x, std::max(previous_tip.x, tip.x));
    r.hi.y = std::max(r.hi.y, std::max(previous_tip.y, tip.y));
    r = clip_to_beam(r, domain, clipped);
  }
  (void)before;
  return PDBox{r, box.h_pd, box.layer_width};
}

std::vector<Vec2> transfer_global_to_pd(const GlobalSolution& solution, const PDState& state) {
  std::vector<Vec2> targets(state.layer.size());
  const CrackPath* crack =
      solution.enrichment.crack ? &*solution.enrichment.crack : nullptr;
  for (std::size_t k = 0; k < state.layer.size(); ++k) {
    Vec2 p = state.positions[state.layer[k]];
    if (crack) {
      auto proj = crack->project(p);
      if (proj.dist < state.h_pd) {
        Vec2 hint = p - proj.closest;
        targets[k] = solution.evaluate(p, &hint);
        continue;
      }
    }
    targets[k] = solution.evaluate(p);
  }
  return targets;
}

std::string format_diagnostics_csv(const RunReport& report) {
  std::ostringstream out;
  out << "step,load_factor,tip_x,tip_y,box_xmin,box_ymin,box_xmax,box_ymax,max_damage\n";
  char buf[256];
  for (const auto& d : report.steps) {
    std::snprintf(buf, sizeof(buf), "%d,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g\n", d.step,
                  d.load_factor, d.tip.x, d.tip.y, d.box.lo.x, d.box.lo.y, d.box.hi.x, d.box.hi.y,
                  d.max_damage);
    out << buf;
  }
  return out.str();
}

RunReport run_coupled(const RunConfig& cfg, bool write_snapshots) {
  DomainSpec domain = build_case(cfg.case_id);
  domain.thickness = cfg.thickness;
  MaterialParams mat = make_material(cfg);
  HorizonGeometry horizon(cfg.delta());
  CouplingSchedule schedule{cfg.n_load_steps, cfg.exchange_every, cfg.inner_scheme,
                            cfg.inner_advance_tol};
  BoxPolicy policy{cfg.initial_size, cfg.margin, cfg.growth, cfg.max_size};
  validate_box_policy(policy, cfg.delta());

  CrackPath crack = domain.initial_crack_path();
  const double initial_arc = crack.arc_length();
  const double tip_taper = cfg.delta();
  const double extract_spacing = 2.0 * cfg.h_pd;
  const double max_band = 10.0 * cfg.delta();

  Cover cover = build_cover(domain, cfg.h_pum, cfg.alpha);
  GlobalSolver gsolver(cover, mat);

  BoundaryConditions bcs;
  bcs.penalty = 1e6 * mat.E / cfg.h_pum;
  bcs.points.push_back({domain.support_left(), true, true, {}});
  bcs.points.push_back({domain.support_right(), false, true, {}});
  Vec2 top = domain.load_point();
  double strip = 2.0 * cfg.h_pum;
  // Load per unit thickness spread over the strip, pointing down.
  Vec2 traction{0.0, -cfg.force / (cfg.thickness * strip)};
  bcs.tractions.push_back({{top.x - strip / 2.0, top.y}, {top.x + strip / 2.0, top.y}, traction});

  const int max_inner = 12;
  RunReport report;
  PDBox box{};
  bool have_box = false;
  Vec2 prev_tip = crack.tip();
  Vec2 last_motion{};
  std::optional<Rect> damage_bbox;
  double last_max_damage = 0.0;

  if (write_snapshots && cfg.snapshot_every > 0)
    std::filesystem::create_directories(cfg.out_dir);

  for (int k = 1; k <= schedule.n_load_steps; ++k) {
    const double lf = static_cast<double>(k) / schedule.n_load_steps;
    StepDiagnostics diag;
    diag.step = k;
    diag.load_factor = lf;

    if (k % schedule.exchange_every == 0) {
      ++report.exchange_steps;
      EnrichmentData enr = enrich_cracked_patches(cover, crack, tip_taper);
      GlobalSolution sol = gsolver.solve(enr, bcs, lf);

      int inner = 0;
      for (;;) {
        ++inner;
        Vec2 tip_before = crack.tip();
        if (have_box) {
          bool clipped = false;
          box = adapt_box(box, crack, policy, domain, damage_bbox, last_motion, prev_tip,
                          &clipped);
          if (clipped)
            report.warnings.push_back("step " + std::to_string(k) +
                                      ": requested PD box clipped to the beam");
        } else {
          box = make_initial_box(crack, policy, domain, cfg.h_pd, cfg.delta());
          have_box = true;
        }
        report.boxes.push_back(box.rect);

        PDState state = generate_nodes(box, domain, &crack);
        identify_boundary_layer(state, box, domain);
        state.layer_targets = transfer_global_to_pd(sol, state);

        SnapshotSink sink;
        if (write_snapshots && cfg.snapshot_every > 0) {
          int exchange_idx = report.total_local_solves;
          sink = [&cfg, exchange_idx](const PDState& s, int step) {
            char name[128];
            std::snprintf(name, sizeof(name), "/pd_%03d_%06d.csv", exchange_idx, step);
            write_pd_snapshot(s, cfg.out_dir + name);
          };
        }
        std::vector<double> damage;
        try {
          damage = run_local(state, mat, horizon, static_cast<int>(cfg.t_n), cfg.t_s,
                             cfg.damping, cfg.snapshot_every, sink);
        } catch (const SolverError& e) {
          throw SolverError(std::string(e.what()) + " [load step " + std::to_string(k) + "]");
        }
        ++report.total_local_solves;
        ++diag.local_solves;

        // Damage extent drives box growth at the next adaptation.
        Rect dmg{{0, 0}, {0, 0}};
        bool any = false;
        for (std::size_t i = 0; i < state.size(); ++i) {
          if (damage[i] <= cfg.damage_threshold) continue;
          Vec2 p = state.positions[i];
          if (!any) {
            dmg = {p, p};
            any = true;
          } else {
            dmg.lo.x = std::min(dmg.lo.x, p.x);
            dmg.lo.y = std::min(dmg.lo.y, p.y);
            dmg.hi.x = std::max(dmg.hi.x, p.x);
            dmg.hi.y = std::max(dmg.hi.y, p.y);
          }
        }
        damage_bbox = any ? std::optional<Rect>(dmg) : std::nullopt;
        last_max_damage = state.max_damage();

        CrackPath updated;
        try {
          updated = extract_crack(state, crack, cfg.damage_threshold, extract_spacing, max_band);
        } catch (const SolverError& e) {
          throw SolverError(std::string(e.what()) + " [load step " + std::to_string(k) + "]");
        }
        double advance = dist(updated.tip(), tip_before);
        prev_tip = tip_before;
        if (advance > 0.0) last_motion = updated.tip() - tip_before;
        crack = updated;

        if (schedule.inner_scheme == InnerScheme::SinglePass) break;
        if (advance < schedule.inner_advance_tol) break;
        if (inner >= max_inner) {
          report.warnings.push_back("step " + std::to_string(k) +
                                    ": scheme-B stopped at the inner iteration cap");
          break;
        }
        // Scheme B: re-apply the global field on the updated crack.
        enr = enrich_cracked_patches(cover, crack, tip_taper);
        sol = gsolver.solve(enr, bcs, lf);
      }
    }

    diag.tip = crack.tip();
    diag.box = have_box ? box.rect : Rect{{0, 0}, {0, 0}};
    diag.max_damage = last_max_damage;
    report.steps.push_back(diag);
  }

  report.crack = crack;
  report.grew = crack.arc_length() > initial_arc + 1e-12;
  return report;
}

}  // namespace pumpd
