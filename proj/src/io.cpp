#include "pumpd/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "pumpd/errors.hpp"
#include "pumpd/global_solver.hpp"
#include "pumpd/pd_solver.hpp"

namespace pumpd {

namespace {

std::string num9(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  return buf;
}

std::string num6(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

}  // namespace

void write_text_file(const std::string& file, const std::string& content) {
  std::ofstream out(file, std::ios::binary);
  if (!out) throw SolverError("cannot open file for writing: " + file);
  out << content;
  if (!out) throw SolverError("write failed: " + file);
}

std::string format_crack_csv(const CrackPath& path) {
  std::ostringstream out;
  out << "x,y\n";
  for (const Vec2& p : path.points) out << num9(p.x) << "," << num9(p.y) << "\n";
  return out.str();
}

void write_crack_csv(const CrackPath& path, const std::string& file) {
  path.validate();
  write_text_file(file, format_crack_csv(path));
}

CrackPath read_crack_csv(const std::string& file) {
  std::ifstream in(file);
  if (!in) throw ConfigError("cannot open crack CSV: " + file);
  std::string line;
  if (!std::getline(in, line)) throw ConfigError("empty crack CSV: " + file);
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "x,y") throw ConfigError(file + ": expected header 'x,y'");
  CrackPath path;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::size_t comma = line.find(',');
    if (comma == std::string::npos)
      throw ConfigError(file + ":" + std::to_string(lineno) + ": expected x,y");
    try {
      path.points.push_back({std::stod(line.substr(0, comma)), std::stod(line.substr(comma + 1))});
    } catch (const std::exception&) {
      throw ConfigError(file + ":" + std::to_string(lineno) + ": bad number");
    }
  }
  if (path.points.empty()) throw ConfigError(file + ": no vertices");
  return path;
}

double frechet_distance(const CrackPath& a, const CrackPath& b) {
  if (a.points.empty() || b.points.empty())
    throw ConfigError("frechet_distance: paths must have at least one point");
  const auto& P = a.points;
  const auto& Q = b.points;
  const std::size_t n = P.size(), m = Q.size();
  // DP over squared distances; row-rolling.
  std::vector<double> prev(m), cur(m);
  for (std::size_t j = 0; j < m; ++j) {
    double d = dist2(P[0], Q[j]);
    prev[j] = j == 0 ? d : std::max(prev[j - 1], d);
  }
  for (std::size_t i = 1; i < n; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      double d = dist2(P[i], Q[j]);
      double best;
      if (j == 0) {
        best = prev[0];
      } else {
        best = std::min(std::min(prev[j], prev[j - 1]), cur[j - 1]);
      }
      cur[j] = std::max(best, d);
    }
    std::swap(prev, cur);
  }
  return std::sqrt(prev[m - 1]);
}

std::string render_comparison_svg(const std::vector<LabeledPath>& paths, const DomainSpec& domain,
                                  const std::vector<Rect>& boxes) {
  if (paths.empty()) throw ConfigError("plot_comparison: no paths given");
  const Rect b = domain.bounds();
  const double scale = 1600.0 / b.width();
  const double pad = 40.0;
  const double W = b.width() * scale + 2 * pad;
  const double H = b.height() * scale + 2 * pad + 24.0 * (paths.size() + 1);
  auto X = [&](double x) { return num6(pad + (x - b.lo.x) * scale); };
  auto Y = [&](double y) { return num6(pad + (b.hi.y - y) * scale); };

  static const char* kColors[] = {"#000000", "#d62728", "#2ca02c", "#1f77b4",
                                  "#9467bd", "#ff7f0e", "#8c564b"};
  const int n_colors = 7;

  std::ostringstream s;
  s << "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 " << num6(W) << " " << num6(H)
    << "\">\n";
  s << "<rect x=\"" << X(b.lo.x) << "\" y=\"" << Y(b.hi.y) << "\" width=\""
    << num6(b.width() * scale) << "\" height=\"" << num6(b.height() * scale)
    << "\" fill=\"none\" stroke=\"#444444\" stroke-width=\"1.5\"/>\n";
  for (const auto& hole : domain.holes)
    s << "<circle cx=\"" << X(hole.center.x) << "\" cy=\"" << Y(hole.center.y) << "\" r=\""
      << num6(hole.radius * scale) << "\" fill=\"none\" stroke=\"#444444\" stroke-width=\"1.5\"/>\n";
  if (domain.initial_crack)
    s << "<line x1=\"" << X(domain.initial_crack->base.x) << "\" y1=\""
      << Y(domain.initial_crack->base.y) << "\" x2=\"" << X(domain.initial_crack->tip.x)
      << "\" y2=\"" << Y(domain.initial_crack->tip.y)
      << "\" stroke=\"#444444\" stroke-width=\"1.5\" stroke-dasharray=\"6,4\"/>\n";
  for (std::size_t k = 0; k < boxes.size(); ++k) {
    double opacity = boxes.size() > 1
                         ? 0.35 + 0.6 * static_cast<double>(k) / (boxes.size() - 1)
                         : 0.6;
    s << "<rect x=\"" << X(boxes[k].lo.x) << "\" y=\"" << Y(boxes[k].hi.y) << "\" width=\""
      << num6(boxes[k].width() * scale) << "\" height=\"" << num6(boxes[k].height() * scale)
      << "\" fill=\"none\" stroke=\"#1f77b4\" stroke-width=\"1\" stroke-opacity=\""
      << num6(opacity) << "\"/>\n";
  }
  for (std::size_t k = 0; k < paths.size(); ++k) {
    const char* color = kColors[k % n_colors];
    s << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\" points=\"";
    for (std::size_t i = 0; i < paths[k].path.points.size(); ++i) {
      if (i) s << " ";
      s << X(paths[k].path.points[i].x) << "," << Y(paths[k].path.points[i].y);
    }
    s << "\"/>\n";
    double ty = b.height() * scale + 2 * pad + 18.0 * (k + 1);
    s << "<text x=\"" << num6(pad) << "\" y=\"" << num6(ty) << "\" fill=\"" << color
      << "\" font-size=\"14\">" << paths[k].label << "</text>\n";
  }
  s << "</svg>\n";
  return s.str();
}

void plot_comparison(const std::vector<LabeledPath>& paths, const DomainSpec& domain,
                     const std::vector<Rect>& boxes, const std::string& file) {
  write_text_file(file, render_comparison_svg(paths, domain, boxes));
}

void write_pd_snapshot(const PDState& state, const std::string& file) {
  std::vector<double> damage = state.damage();
  std::ostringstream out;
  out << "x,y,ux,uy,damage\n";
  for (std::size_t i = 0; i < state.size(); ++i) {
    out << num9(state.positions[i].x) << "," << num9(state.positions[i].y) << ","
        << num9(state.displacement[i].x) << "," << num9(state.displacement[i].y) << ","
        << num9(damage[i]) << "\n";
  }
  write_text_file(file, out.str());
}

void write_global_snapshot(const GlobalSolution& solution, const DomainSpec& domain,
                           double spacing, const std::string& file) {
  std::ostringstream out;
  out << "x,y,ux,uy\n";
  Rect b = domain.bounds();
  for (double y = b.lo.y + spacing / 2; y < b.hi.y; y += spacing) {
    for (double x = b.lo.x + spacing / 2; x < b.hi.x; x += spacing) {
      Vec2 p{x, y};
      if (!domain.inside(p)) continue;
      bool on_crack = solution.enrichment.crack &&
                      solution.enrichment.crack->project(p).dist < 1e-12;
      if (on_crack) continue;
      Vec2 u = solution.evaluate(p);
      out << num9(x) << "," << num9(y) << "," << num9(u.x) << "," << num9(u.y) << "\n";
    }
  }
  write_text_file(file, out.str());
}

}  // namespace pumpd
