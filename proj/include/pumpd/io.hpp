#pragma once

#include <string>
#include <vector>

#include "pumpd/crack_path.hpp"
#include "pumpd/domain.hpp"
#include "pumpd/geometry.hpp"

namespace pumpd {

struct PDState;
struct GlobalSolution;

// Crack CSV: header "x,y", one vertex per line, meters in beam coordinates,
// 9 significant digits, LF endings. Byte-deterministic.
std::string format_crack_csv(const CrackPath& path);
void write_crack_csv(const CrackPath& path, const std::string& file);
CrackPath read_crack_csv(const std::string& file);

// Discrete Frechet distance between two polylines (dynamic programming over
// vertex pairs).
double frechet_distance(const CrackPath& a, const CrackPath& b);

struct LabeledPath {
  std::string label;
  CrackPath path;
};

// SVG with the beam outline, holes, the initial crack dashed, one labeled
// polyline per path and optional PD boxes drawn with increasing opacity.
std::string render_comparison_svg(const std::vector<LabeledPath>& paths, const DomainSpec& domain,
                                  const std::vector<Rect>& boxes);
void plot_comparison(const std::vector<LabeledPath>& paths, const DomainSpec& domain,
                     const std::vector<Rect>& boxes, const std::string& file);

// Field snapshots: x,y,ux,uy,damage for PD states, x,y,ux,uy on a grid for
// global solutions.
void write_pd_snapshot(const PDState& state, const std::string& file);
void write_global_snapshot(const GlobalSolution& solution, const DomainSpec& domain,
                           double spacing, const std::string& file);

void write_text_file(const std::string& file, const std::string& content);

}  // namespace pumpd
