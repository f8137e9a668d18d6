#include <doctest.h>

#include <cmath>
#include <random>

#include "pumpd/domain.hpp"
#include "pumpd/errors.hpp"

#ifndef PUMPD_DATA_DIR
#define PUMPD_DATA_DIR "data"
#endif

using namespace pumpd;

TEST_CASE("case parameters match the benchmark table") {
  CaseSpec s1 = case_spec(CaseId::I);
  CHECK(s1.a_in == 1.0);
  CHECK(s1.b_in == 6.0);
  CHECK(s1.n_holes == 0);
  CaseSpec s2 = case_spec(CaseId::II);
  CHECK(s2.a_in == 1.0);
  CHECK(s2.b_in == 6.0);
  CHECK(s2.n_holes == 3);
  CaseSpec s3 = case_spec(CaseId::III);
  CHECK(s3.a_in == 1.5);
  CHECK(s3.b_in == 5.0);
  CHECK(s3.n_holes == 3);
  CHECK_THROWS_AS(parse_case_id("IV"), ConfigError);
}

TEST_CASE("case geometry") {
  SUBCASE("beam outline") {
    DomainSpec d = build_case(CaseId::I);
    CHECK(d.length == doctest::Approx(0.508).epsilon(1e-15));
    CHECK(d.height == doctest::Approx(0.2032).epsilon(1e-15));
    CHECK(d.support_left().x == doctest::Approx(-0.2286).epsilon(1e-12));
    CHECK(d.support_right().x == doctest::Approx(0.2286).epsilon(1e-12));
    CHECK(d.holes.empty());
  }
  SUBCASE("case I initial crack") {
    DomainSpec d = build_case(CaseId::I);
    REQUIRE(d.initial_crack.has_value());
    CHECK(d.initial_crack->base.x == doctest::Approx(-0.1524).epsilon(1e-12));
    CHECK(d.initial_crack->base.y == doctest::Approx(-0.1016).epsilon(1e-12));
    CHECK(d.initial_crack->tip.y == doctest::Approx(-0.0762).epsilon(1e-12));
  }
  SUBCASE("case II crack spans 0..1 in above the bottom edge at -6 in") {
    DomainSpec d = build_case(CaseId::II);
    CHECK(d.initial_crack->base.x == doctest::Approx(-6.0 * kInch).epsilon(1e-12));
    CHECK(d.initial_crack->base.y == doctest::Approx(-0.1016).epsilon(1e-12));
    CHECK(d.initial_crack->tip.y == doctest::Approx(-0.0762).epsilon(1e-12));
  }
  SUBCASE("case III crack") {
    DomainSpec d = build_case(CaseId::III);
    CHECK(d.initial_crack->base.x == doctest::Approx(-0.127).epsilon(1e-12));
    CHECK(d.initial_crack->tip.y == doctest::Approx(-0.0635).epsilon(1e-12));
  }
  SUBCASE("holes 4 in left of midspan at 6.75/4.75/2.75 in above the bottom") {
    DomainSpec d = build_case(CaseId::II);
    REQUIRE(d.holes.size() == 3);
    for (const auto& h : d.holes) {
      CHECK(h.center.x == doctest::Approx(-0.1016).epsilon(1e-12));
      CHECK(h.radius == doctest::Approx(0.00635).epsilon(1e-12));
    }
    CHECK(d.holes[0].center.y == doctest::Approx(0.06985).epsilon(1e-12));
    CHECK(d.holes[1].center.y == doctest::Approx(0.01905).epsilon(1e-12));
    CHECK(d.holes[2].center.y == doctest::Approx(-0.03175).epsilon(1e-12));
  }
  SUBCASE("initial crack clears every hole") {
    for (CaseId id : {CaseId::I, CaseId::II, CaseId::III}) {
      DomainSpec d = build_case(id);
      for (const auto& h : d.holes)
        CHECK(!segment_crosses_disc(d.initial_crack->base, d.initial_crack->tip, h.center,
                                    h.radius));
    }
  }
}

TEST_CASE("inch conversion round-trips") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.01, 30.0);
  for (int t = 0; t < 100; ++t) {
    double v = u(rng);
    CHECK(inches(v) / kInch == doctest::Approx(v).epsilon(1e-12));
  }
}

TEST_CASE("bundled reference paths") {
  SUBCASE("case I starts at the notch tip") {
    CrackPath ref = load_reference_path(CaseId::I, PUMPD_DATA_DIR);
    CHECK(ref.points.front().x == doctest::Approx(-0.1524).epsilon(1e-9));
    CHECK(ref.points.front().y == doctest::Approx(-0.0762).epsilon(1e-9));
  }
  SUBCASE("reference y-coordinates are non-decreasing") {
    for (CaseId id : {CaseId::I, CaseId::II, CaseId::III}) {
      CrackPath ref = load_reference_path(id, PUMPD_DATA_DIR);
      for (std::size_t k = 1; k < ref.points.size(); ++k)
        CHECK(ref.points[k].y >= ref.points[k - 1].y);
    }
  }
  SUBCASE("case II terminates on the middle hole boundary") {
    CrackPath ref = load_reference_path(CaseId::II, PUMPD_DATA_DIR);
    DomainSpec d = build_case(CaseId::II);
    const auto& mid = d.holes[1];
    CHECK(std::abs(dist(ref.points.back(), mid.center) - mid.radius) < 1e-6);
  }
  SUBCASE("missing file is reported") {
    CHECK_THROWS_AS(load_reference_path(CaseId::I, "/nonexistent_dir"), ConfigError);
  }
}
