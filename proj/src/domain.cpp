#include "pumpd/domain.hpp"

#include "pumpd/errors.hpp"
#include "pumpd/io.hpp"

namespace pumpd {

CaseId parse_case_id(const std::string& s) {
  if (s == "I" || s == "1" || s == "i") return CaseId::I;
  if (s == "II" || s == "2" || s == "ii") return CaseId::II;
  if (s == "III" || s == "3" || s == "iii") return CaseId::III;
  if (s == "symmetric") return CaseId::Symmetric;
  throw ConfigError("case: unknown case id '" + s + "' (expected I, II, III or symmetric)");
}

std::string case_id_name(CaseId id) {
  switch (id) {
    case CaseId::I: return "I";
    case CaseId::II: return "II";
    case CaseId::III: return "III";
    case CaseId::Symmetric: return "symmetric";
  }
  return "?";
}

CaseSpec case_spec(CaseId id) {
  switch (id) {
    case CaseId::I: return {CaseId::I, 1.0, 6.0, 0};
    case CaseId::II: return {CaseId::II, 1.0, 6.0, 3};
    case CaseId::III: return {CaseId::III, 1.5, 5.0, 3};
    case CaseId::Symmetric: return {CaseId::Symmetric, 1.0, 0.0, 0};
  }
  throw ConfigError("unknown case id");
}

CrackPath DomainSpec::initial_crack_path() const {
  if (!initial_crack) throw SolverError("domain has no initial crack");
  return CrackPath{{initial_crack->base, initial_crack->tip}};
}

void DomainSpec::validate() const {
  if (!(length > 0.0 && height > 0.0 && thickness > 0.0))
    throw ConfigError("invalid-parameter: beam dimensions must be positive");
  Rect b = bounds();
  for (const Hole& h : holes) {
    if (!(h.radius > 0.0)) throw ConfigError("invalid-parameter: hole radius must be positive");
    Rect hb{{h.center.x - h.radius, h.center.y - h.radius},
            {h.center.x + h.radius, h.center.y + h.radius}};
    if (!(b.contains(hb.lo) && b.contains(hb.hi)))
      throw ConfigError("invalid-parameter: hole not inside the beam");
  }
  if (initial_crack) {
    if (initial_crack->base.y != b.lo.y)
      throw ConfigError("invalid-parameter: initial crack must start on the bottom edge");
    for (const Hole& h : holes)
      if (segment_crosses_disc(initial_crack->base, initial_crack->tip, h.center, h.radius))
        throw ConfigError("invalid-parameter: initial crack intersects a hole");
  }
}

DomainSpec build_case(CaseId id) {
  CaseSpec spec = case_spec(id);
  DomainSpec d;
  double bottom = -d.height / 2.0;
  if (spec.n_holes == 3) {
    double hx = inches(-4.0);
    double r = inches(0.25);
    // Heights above the bottom edge: 6.75, 4.75, 2.75 in.
    d.holes = {{{hx, bottom + inches(6.75)}, r},
               {{hx, bottom + inches(4.75)}, r},
               {{hx, bottom + inches(2.75)}, r}};
  }
  double cx = inches(-spec.b_in);
  d.initial_crack = DomainSpec::Segment{{cx, bottom}, {cx, bottom + inches(spec.a_in)}};
  d.validate();
  return d;
}

CrackPath load_reference_path(CaseId id, const std::string& data_dir) {
  std::string file;
  switch (id) {
    case CaseId::I: file = "case1_reference.csv"; break;
    case CaseId::II: file = "case2_reference.csv"; break;
    case CaseId::III: file = "case3_reference.csv"; break;
    default: throw ConfigError("no reference path bundled for case " + case_id_name(id));
  }
  return read_crack_csv(data_dir + "/" + file);
}

}  // namespace pumpd
