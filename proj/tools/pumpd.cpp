#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>

#include "pumpd/config.hpp"
#include "pumpd/coupling.hpp"
#include "pumpd/crack_extraction.hpp"
#include "pumpd/errors.hpp"
#include "pumpd/io.hpp"
#include "pumpd/parallel.hpp"

#ifndef PUMPD_DATA_DIR
#define PUMPD_DATA_DIR "data"
#endif

namespace {

using namespace pumpd;

std::string case_tag(CaseId id) {
  switch (id) {
    case CaseId::I: return "case1";
    case CaseId::II: return "case2";
    case CaseId::III: return "case3";
    default: return "symmetric";
  }
}

int cmd_run(const std::string& config_path, const std::string& data_dir) {
  RunConfig cfg = load_config(config_path);
  std::filesystem::create_directories(cfg.out_dir);
  RunReport report = run_coupled(cfg, /*write_snapshots=*/true);

  std::string tag = case_tag(cfg.case_id);
  std::string crack_file = cfg.out_dir + "/crack_" + tag + ".csv";
  write_crack_csv(report.crack, crack_file);
  write_text_file(cfg.out_dir + "/diagnostics_" + tag + ".csv", format_diagnostics_csv(report));

  DomainSpec domain = build_case(cfg.case_id);
  std::vector<LabeledPath> paths;
  paths.push_back({"simulated", report.crack});
  try {
    paths.push_back({"reference", load_reference_path(cfg.case_id, data_dir)});
  } catch (const ConfigError&) {
    // No bundled reference for this case.
  }
  plot_comparison(paths, domain, report.boxes, cfg.out_dir + "/comparison_" + tag + ".svg");

  std::printf("case %s: %d load steps, %d exchanges, %d local solves\n",
              case_id_name(cfg.case_id).c_str(), cfg.n_load_steps, report.exchange_steps,
              report.total_local_solves);
  std::printf("crack: %zu vertices, tip (%.6g, %.6g), arc length %.6g m, %s\n",
              report.crack.size(), report.crack.tip().x, report.crack.tip().y,
              report.crack.arc_length(), report.grew ? "grew" : "no growth");
  for (const auto& w : report.warnings) std::printf("warning: %s\n", w.c_str());
  std::printf("wrote %s\n", crack_file.c_str());
  return 0;
}

int cmd_compare(const std::string& a_path, const std::string& b_path) {
  CrackPath a = read_crack_csv(a_path);
  CrackPath b = read_crack_csv(b_path);
  std::printf("%.9g\n", frechet_distance(a, b));
  return 0;
}

int cmd_plot(const std::string& config_path, const std::vector<std::string>& csvs,
             const std::string& out_file) {
  RunConfig cfg = load_config(config_path);
  DomainSpec domain = build_case(cfg.case_id);
  std::vector<LabeledPath> paths;
  for (const auto& f : csvs)
    paths.push_back({std::filesystem::path(f).stem().string(), read_crack_csv(f)});
  plot_comparison(paths, domain, {}, out_file);
  std::printf("wrote %s\n", out_file.c_str());
  return 0;
}

int cmd_pd_only(const std::string& config_path) {
  RunConfig cfg = load_config(config_path);
  std::filesystem::create_directories(cfg.out_dir);
  DomainSpec domain = build_case(cfg.case_id);
  domain.thickness = cfg.thickness;
  MaterialParams mat = make_material(cfg);
  HorizonGeometry horizon(cfg.delta());
  CrackPath crack = domain.initial_crack_path();

  BoxPolicy policy{cfg.initial_size, cfg.margin, cfg.growth, cfg.max_size};
  PDBox box = make_initial_box(crack, policy, domain, cfg.h_pd, cfg.delta());
  PDState state = generate_nodes(box, domain, &crack);
  identify_boundary_layer(state, box, domain);

  Cover cover = build_cover(domain, cfg.h_pum, cfg.alpha);
  BoundaryConditions bcs;
  bcs.penalty = 1e6 * mat.E / cfg.h_pum;
  bcs.points.push_back({domain.support_left(), true, true, {}});
  bcs.points.push_back({domain.support_right(), false, true, {}});
  Vec2 top = domain.load_point();
  double strip = 2.0 * cfg.h_pum;
  bcs.tractions.push_back({{top.x - strip / 2.0, top.y},
                           {top.x + strip / 2.0, top.y},
                           {0.0, -cfg.force / (cfg.thickness * strip)}});
  EnrichmentData enr = enrich_cracked_patches(cover, crack, cfg.delta());
  GlobalSolution sol = assemble_and_solve(cover, enr, mat, bcs, 1.0);
  state.layer_targets = transfer_global_to_pd(sol, state);

  std::printf("pd-only: %zu nodes, %zu layer nodes, %d steps\n", state.size(),
              state.layer.size(), static_cast<int>(cfg.t_n));
  run_local(state, mat, horizon, static_cast<int>(cfg.t_n), cfg.t_s, cfg.damping);
  write_pd_snapshot(state, cfg.out_dir + "/pd_only_final.csv");

  CrackPath updated = extract_crack(state, crack, cfg.damage_threshold, 2.0 * cfg.h_pd,
                                    10.0 * cfg.delta());
  write_crack_csv(updated, cfg.out_dir + "/pd_only_crack.csv");
  std::printf("max damage %.4f, tip (%.6g, %.6g)\n", state.max_damage(), updated.tip().x,
              updated.tip().y);
  return 0;
}

int cmd_global_only(const std::string& config_path) {
  RunConfig cfg = load_config(config_path);
  std::filesystem::create_directories(cfg.out_dir);
  DomainSpec domain = build_case(cfg.case_id);
  domain.thickness = cfg.thickness;
  MaterialParams mat = make_material(cfg);
  Cover cover = build_cover(domain, cfg.h_pum, cfg.alpha);
  BoundaryConditions bcs;
  bcs.penalty = 1e6 * mat.E / cfg.h_pum;
  bcs.points.push_back({domain.support_left(), true, true, {}});
  bcs.points.push_back({domain.support_right(), false, true, {}});
  Vec2 top = domain.load_point();
  double strip = 2.0 * cfg.h_pum;
  bcs.tractions.push_back({{top.x - strip / 2.0, top.y},
                           {top.x + strip / 2.0, top.y},
                           {0.0, -cfg.force / (cfg.thickness * strip)}});
  EnrichmentData enr = enrich_cracked_patches(cover, domain.initial_crack_path(), cfg.delta());
  GlobalSolution sol = assemble_and_solve(cover, enr, mat, bcs, 1.0);
  write_global_snapshot(sol, domain, cfg.h_pum, cfg.out_dir + "/global_only_field.csv");
  Vec2 u = sol.evaluate({0.0, 0.0});
  std::printf("global-only: %d patches, %d enriched, u(0,0) = (%.6g, %.6g)\n",
              static_cast<int>(cover.patches.size()), enr.n_enriched(), u.x, u.y);
  std::printf("wrote %s/global_only_field.csv\n", cfg.out_dir.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Coupled partition-of-unity / peridynamic quasi-static fracture simulator"};
  app.require_subcommand(1);
  unsigned threads = 1;
  app.add_option("--threads", threads, "Worker threads for the PD solver")->capture_default_str();

  std::string config_path, data_dir = PUMPD_DATA_DIR, out_file = "comparison.svg";
  std::string csv_a, csv_b;
  std::vector<std::string> csvs;

  auto* run = app.add_subcommand("run", "Full coupled run: crack CSV, diagnostics, plot");
  run->add_option("config", config_path, "Run configuration file")->required();
  run->add_option("--data", data_dir, "Directory with bundled reference CSVs")
      ->capture_default_str();

  auto* compare = app.add_subcommand("compare", "Discrete Frechet distance of two crack CSVs");
  compare->add_option("a", csv_a)->required();
  compare->add_option("b", csv_b)->required();

  auto* plot = app.add_subcommand("plot", "Plot crack CSVs over the case geometry");
  plot->add_option("config", config_path)->required();
  plot->add_option("csv", csvs)->required();
  plot->add_option("-o,--out", out_file)->capture_default_str();

  auto* pd = app.add_subcommand("pd-only", "Single local PD solve (debugging)");
  pd->add_option("config", config_path)->required();

  auto* global = app.add_subcommand("global-only", "Single elastic solve, field snapshot");
  global->add_option("config", config_path)->required();

  CLI11_PARSE(app, argc, argv);
  pumpd::ThreadPool::set_global_threads(threads);

  try {
    if (*run) return cmd_run(config_path, data_dir);
    if (*compare) return cmd_compare(csv_a, csv_b);
    if (*plot) return cmd_plot(config_path, csvs, out_file);
    if (*pd) return cmd_pd_only(config_path);
    if (*global) return cmd_global_only(config_path);
  } catch (const pumpd::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
