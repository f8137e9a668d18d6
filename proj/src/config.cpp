#include "pumpd/config.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "pumpd/errors.hpp"

namespace pumpd {

InnerScheme parse_inner_scheme(const std::string& s) {
  if (s == "single-pass") return InnerScheme::SinglePass;
  if (s == "scheme-b") return InnerScheme::SchemeB;
  throw ConfigError("schedule.inner_scheme: expected 'single-pass' or 'scheme-b', got '" + s +
                    "'");
}

std::string inner_scheme_name(InnerScheme s) {
  return s == InnerScheme::SinglePass ? "single-pass" : "scheme-b";
}

namespace {

std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  std::size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

double parse_double(const std::string& path, const std::string& v) {
  try {
    std::size_t used = 0;
    double x = std::stod(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    throw ConfigError(path + ": not a number: '" + v + "'");
  }
}

long parse_long(const std::string& path, const std::string& v) {
  try {
    std::size_t used = 0;
    long x = std::stol(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    throw ConfigError(path + ": not an integer: '" + v + "'");
  }
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void require(bool ok, const std::string& msg) {
  if (!ok) throw ConfigError(msg);
}

}  // namespace

RunConfig parse_config(const std::string& text) {
  RunConfig cfg;
  std::istringstream in(text);
  std::string line, section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    if (t.front() == '[') {
      if (t.back() != ']')
        throw ConfigError("line " + std::to_string(lineno) + ": malformed section header");
      section = trim(t.substr(1, t.size() - 2));
      if (section != "material" && section != "discretization" && section != "schedule" &&
          section != "box" && section != "output")
        throw ConfigError("unknown section [" + section + "]");
      continue;
    }
    std::size_t eq = t.find('=');
    if (eq == std::string::npos)
      throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
    std::string key = trim(t.substr(0, eq));
    std::string value = trim(t.substr(eq + 1));
    std::string path = section.empty() ? key : section + "." + key;

    if (section.empty()) {
      if (key == "case") cfg.case_id = parse_case_id(value);
      else throw ConfigError("unknown key '" + key + "' (only 'case' is allowed before sections)");
    } else if (section == "material") {
      if (key == "E") cfg.E = parse_double(path, value);
      else if (key == "nu") cfg.nu = parse_double(path, value);
      else if (key == "Gc") cfg.Gc = parse_double(path, value);
      else if (key == "rho") cfg.rho = parse_double(path, value);
      else throw ConfigError("unknown key " + path);
    } else if (section == "discretization") {
      if (key == "h_pd") cfg.h_pd = parse_double(path, value);
      else if (key == "h_pum") cfg.h_pum = parse_double(path, value);
      else if (key == "delta_factor") cfg.delta_factor = parse_double(path, value);
      else if (key == "t_n") cfg.t_n = parse_long(path, value);
      else if (key == "t_s") cfg.t_s = parse_double(path, value);
      else if (key == "damping") cfg.damping = parse_double(path, value);
      else if (key == "alpha") cfg.alpha = parse_double(path, value);
      else if (key == "thickness") cfg.thickness = parse_double(path, value);
      else throw ConfigError("unknown key " + path);
    } else if (section == "schedule") {
      if (key == "n_load_steps") cfg.n_load_steps = static_cast<int>(parse_long(path, value));
      else if (key == "exchange_every") cfg.exchange_every = static_cast<int>(parse_long(path, value));
      else if (key == "inner_scheme") cfg.inner_scheme = parse_inner_scheme(value);
      else if (key == "inner_advance_tol") cfg.inner_advance_tol = parse_double(path, value);
      else if (key == "force") cfg.force = parse_double(path, value);
      else if (key == "damage_threshold") cfg.damage_threshold = parse_double(path, value);
      else throw ConfigError("unknown key " + path);
    } else if (section == "box") {
      if (key == "initial_size") cfg.initial_size = parse_double(path, value);
      else if (key == "margin") cfg.margin = parse_double(path, value);
      else if (key == "growth") cfg.growth = parse_double(path, value);
      else if (key == "max_size") cfg.max_size = parse_double(path, value);
      else throw ConfigError("unknown key " + path);
    } else if (section == "output") {
      if (key == "dir") cfg.out_dir = value;
      else if (key == "snapshot_every") cfg.snapshot_every = static_cast<int>(parse_long(path, value));
      else throw ConfigError("unknown key " + path);
    }
  }

  // Validation, then derived defaults.
  require(cfg.E > 0.0, "material.E: must be > 0");
  require(cfg.Gc > 0.0, "material.Gc: must be > 0");
  require(cfg.rho > 0.0, "material.rho: must be > 0");
  require(std::abs(cfg.nu - 1.0 / 3.0) < 1e-15,
          "material.nu: the bond-based model requires nu = 1/3");
  cfg.nu = 1.0 / 3.0;
  require(cfg.h_pd > 0.0, "discretization.h_pd: must be > 0");
  require(cfg.h_pum > 0.0, "discretization.h_pum: must be > 0");
  require(cfg.delta_factor > 0.0, "discretization.delta_factor: must be > 0");
  require(cfg.t_n > 0, "discretization.t_n: must be > 0");
  require(cfg.t_s > 0.0, "discretization.t_s: must be > 0");
  require(cfg.damping >= 0.0, "discretization.damping: must be >= 0");
  require(cfg.alpha > 1.0, "discretization.alpha: must be > 1");
  require(cfg.thickness > 0.0, "discretization.thickness: must be > 0");
  require(cfg.n_load_steps >= 1, "schedule.n_load_steps: must be >= 1");
  require(cfg.exchange_every >= 1, "schedule.exchange_every: must be >= 1");
  require(cfg.force > 0.0, "schedule.force: must be > 0");
  require(cfg.damage_threshold > 0.0 && cfg.damage_threshold < 1.0,
          "schedule.damage_threshold: must lie in (0, 1)");

  if (cfg.inner_advance_tol < 0.0) cfg.inner_advance_tol = cfg.h_pd;
  require(cfg.inner_advance_tol > 0.0, "schedule.inner_advance_tol: must be > 0");
  if (cfg.initial_size < 0.0) cfg.initial_size = 64.0 * cfg.h_pd;
  if (cfg.margin < 0.0) cfg.margin = 2.0 * cfg.delta();
  if (cfg.max_size < 0.0) cfg.max_size = std::max(0.085, cfg.initial_size);
  require(cfg.margin >= 2.0 * cfg.delta(), "box.margin: must be >= 2*delta");
  require(cfg.initial_size > 2.0 * cfg.margin, "box.initial_size: must be > 2*margin");
  require(cfg.growth >= 1.0, "box.growth: must be >= 1");
  require(cfg.max_size >= cfg.initial_size, "box.max_size: must be >= initial_size");
  require(cfg.snapshot_every >= 0, "output.snapshot_every: must be >= 0");
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string serialize_config(const RunConfig& c) {
  std::ostringstream out;
  out << "case = " << case_id_name(c.case_id) << "\n\n";
  out << "[material]\n";
  out << "E = " << fmt(c.E) << "\n";
  out << "nu = " << fmt(c.nu) << "\n";
  out << "Gc = " << fmt(c.Gc) << "\n";
  out << "rho = " << fmt(c.rho) << "\n\n";
  out << "[discretization]\n";
  out << "h_pd = " << fmt(c.h_pd) << "\n";
  out << "h_pum = " << fmt(c.h_pum) << "\n";
  out << "delta_factor = " << fmt(c.delta_factor) << "\n";
  out << "t_n = " << c.t_n << "\n";
  out << "t_s = " << fmt(c.t_s) << "\n";
  out << "damping = " << fmt(c.damping) << "\n";
  out << "alpha = " << fmt(c.alpha) << "\n";
  out << "thickness = " << fmt(c.thickness) << "\n\n";
  out << "[schedule]\n";
  out << "n_load_steps = " << c.n_load_steps << "\n";
  out << "exchange_every = " << c.exchange_every << "\n";
  out << "inner_scheme = " << inner_scheme_name(c.inner_scheme) << "\n";
  out << "inner_advance_tol = " << fmt(c.inner_advance_tol) << "\n";
  out << "force = " << fmt(c.force) << "\n";
  out << "damage_threshold = " << fmt(c.damage_threshold) << "\n\n";
  out << "[box]\n";
  out << "initial_size = " << fmt(c.initial_size) << "\n";
  out << "margin = " << fmt(c.margin) << "\n";
  out << "growth = " << fmt(c.growth) << "\n";
  out << "max_size = " << fmt(c.max_size) << "\n\n";
  out << "[output]\n";
  out << "dir = " << c.out_dir << "\n";
  out << "snapshot_every = " << c.snapshot_every << "\n";
  return out.str();
}

MaterialParams make_material(const RunConfig& config) {
  return MaterialParams::make(config.E, config.Gc, config.rho, 1.0 / 3.0);
}

}  // namespace pumpd
