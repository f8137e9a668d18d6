#pragma once

#include <optional>
#include <string>
#include <vector>

#include "pumpd/crack_path.hpp"
#include "pumpd/geometry.hpp"

namespace pumpd {

constexpr double kInch = 0.0254;  // exact
inline double inches(double v) { return v * kInch; }

// Benchmark case identifiers. I-III are the three-point-bending experiments;
// Symmetric is a midspan-notch variant used for symmetry checks.
enum class CaseId { I, II, III, Symmetric };

CaseId parse_case_id(const std::string& s);
std::string case_id_name(CaseId id);

struct CaseSpec {
  CaseId case_id;
  double a_in;    // initial crack length [in]
  double b_in;    // crack offset left of midspan [in]
  int n_holes;    // 0 or 3
};

CaseSpec case_spec(CaseId id);

// Beam coordinates: x measured from midspan (negative leftward), y from
// mid-height, meters.
struct DomainSpec {
  double length = 20.0 * kInch;        // 0.508 m
  double height = 8.0 * kInch;         // 0.2032 m
  double support_inset = 1.0 * kInch;  // supports 1 in inboard of each end
  double thickness = 1.0 * kInch;      // out-of-plane, config-overridable

  struct Hole {
    Vec2 center;
    double radius;
  };
  std::vector<Hole> holes;

  struct Segment {
    Vec2 base;  // on the bottom edge
    Vec2 tip;
  };
  std::optional<Segment> initial_crack;

  Rect bounds() const {
    return {{-length / 2.0, -height / 2.0}, {length / 2.0, height / 2.0}};
  }
  bool in_hole(Vec2 p) const {
    for (const Hole& h : holes)
      if (dist2(p, h.center) < h.radius * h.radius) return true;
    return false;
  }
  bool inside(Vec2 p) const { return bounds().contains(p) && !in_hole(p); }

  Vec2 support_left() const { return {-length / 2.0 + support_inset, -height / 2.0}; }
  Vec2 support_right() const { return {length / 2.0 - support_inset, -height / 2.0}; }
  Vec2 load_point() const { return {0.0, height / 2.0}; }

  CrackPath initial_crack_path() const;

  void validate() const;
};

// Geometry for one benchmark case. Holes sit 4 in left of midspan at heights
// 6.75 / 4.75 / 2.75 in above the bottom edge, diameter 0.5 in.
DomainSpec build_case(CaseId id);

// Digitized experimental crack path bundled under data/ (columns x,y, meters,
// beam coordinates). `data_dir` is the directory holding the CSVs.
CrackPath load_reference_path(CaseId id, const std::string& data_dir);

}  // namespace pumpd
