#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <random>

#include "pumpd/config.hpp"
#include "pumpd/errors.hpp"
#include "pumpd/io.hpp"

using namespace pumpd;

TEST_CASE("config defaults are the benchmark values") {
  RunConfig c = parse_config("");
  CHECK(c.h_pd == doctest::Approx(0.00049609375).epsilon(1e-15));
  CHECK(c.h_pum == doctest::Approx(0.00396875).epsilon(1e-15));
  CHECK(c.delta() == doctest::Approx(0.00396875).epsilon(1e-12));
  CHECK(c.t_n == 50000);
  CHECK(c.t_s == doctest::Approx(2e-7).epsilon(1e-15));
  CHECK(c.ramp_time() == doctest::Approx(static_cast<double>(c.t_n) * c.t_s).epsilon(1e-12));
  CHECK(c.force == doctest::Approx(9e5).epsilon(1e-15));
  CHECK(c.delta_factor == 8.0);
  CHECK(c.damage_threshold == doctest::Approx(0.35));
  CHECK(c.inner_advance_tol == doctest::Approx(c.h_pd));
  CHECK(c.initial_size == doctest::Approx(64.0 * c.h_pd));
  CHECK(c.margin == doctest::Approx(2.0 * c.delta()));
}

TEST_CASE("config validation") {
  CHECK_THROWS_WITH_AS(parse_config("[discretization]\ndelta_factor = 0\n"),
                       doctest::Contains("delta_factor"), ConfigError);
  CHECK_THROWS_WITH_AS(parse_config("[material]\nfoo = 1\n"),
                       doctest::Contains("material.foo"), ConfigError);
  CHECK_THROWS_AS(parse_config("[nosuch]\nx = 1\n"), ConfigError);
  CHECK_THROWS_WITH_AS(parse_config("[material]\nnu = 0.3\n"), doctest::Contains("nu"),
                       ConfigError);
  CHECK_THROWS_AS(parse_config("[schedule]\nexchange_every = 0\n"), ConfigError);
  CHECK_THROWS_WITH_AS(parse_config("[box]\nmargin = 0.001\n"), doctest::Contains("margin"),
                       ConfigError);
  CHECK_NOTHROW(parse_config("case = III\n[schedule]\ninner_scheme = scheme-b\n"));
}

TEST_CASE("config round trip is a fixed point") {
  std::string text =
      "case = II\n[material]\nE = 3e9\nGc = 250\n[discretization]\nh_pd = 0.002\n"
      "h_pum = 0.008\nt_n = 4000\nt_s = 5e-7\n[schedule]\nforce = 2e4\n"
      "inner_scheme = scheme-b\n[box]\ninitial_size = 0.08\n";
  RunConfig c1 = parse_config(text);
  std::string s1 = serialize_config(c1);
  RunConfig c2 = parse_config(s1);
  std::string s2 = serialize_config(c2);
  CHECK(s1 == s2);
  CHECK(c2.E == c1.E);
  CHECK(c2.t_n == c1.t_n);
  CHECK(c2.inner_scheme == InnerScheme::SchemeB);
}

TEST_CASE("crack csv format") {
  CrackPath p{{{-0.1524, -0.1016}, {-0.1524, -0.0762}}};
  std::string csv = format_crack_csv(p);
  SUBCASE("two-point path gives a three-line file") {
    CHECK(csv == "x,y\n-0.1524,-0.1016\n-0.1524,-0.0762\n");
  }
  SUBCASE("write/read round trip is byte identical") {
    std::string file = (std::filesystem::temp_directory_path() / "pumpd_crack_rt.csv").string();
    write_crack_csv(p, file);
    CrackPath q = read_crack_csv(file);
    write_crack_csv(q, file);
    CrackPath r = read_crack_csv(file);
    CHECK(format_crack_csv(q) == csv);
    CHECK(format_crack_csv(r) == csv);
    std::filesystem::remove(file);
  }
}

TEST_CASE("frechet distance") {
  CrackPath a{{{0.0, 0.0}, {1.0, 0.0}}};
  CHECK(frechet_distance(a, a) == 0.0);

  CrackPath p1{{{0.0, 0.0}}};
  CrackPath p2{{{3.0, 4.0}}};
  CHECK(frechet_distance(p1, p2) == doctest::Approx(5.0).epsilon(1e-15));

  CrackPath b{{{0.0, 1.0}, {1.0, 1.0}}};
  CHECK(frechet_distance(a, b) == doctest::Approx(1.0).epsilon(1e-15));

  SUBCASE("metric properties on random polylines") {
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::uniform_int_distribution<int> len(1, 8);
    auto random_path = [&]() {
      CrackPath p;
      int n = len(rng);
      for (int i = 0; i < n; ++i) p.points.push_back({u(rng), u(rng)});
      return p;
    };
    for (int t = 0; t < 50; ++t) {
      CrackPath x = random_path(), y = random_path(), z = random_path();
      double dxy = frechet_distance(x, y);
      double dyx = frechet_distance(y, x);
      CHECK(dxy == doctest::Approx(dyx).epsilon(1e-14));
      CHECK(dxy >= 0.0);
      CHECK(frechet_distance(x, y) <= frechet_distance(x, z) + frechet_distance(z, y) + 1e-14);
      CHECK(frechet_distance(x, x) == 0.0);
    }
  }
}

TEST_CASE("comparison svg") {
  DomainSpec d = build_case(CaseId::II);
  CrackPath p{{{-0.1524, -0.1016}, {-0.1524, -0.0762}, {-0.14, -0.05}}};

  auto count = [](const std::string& hay, const std::string& needle) {
    std::size_t c = 0, pos = 0;
    while ((pos = hay.find(needle, pos)) != std::string::npos) {
      ++c;
      pos += needle.size();
    }
    return c;
  };

  SUBCASE("one path and no boxes renders exactly one polyline") {
    std::string svg = render_comparison_svg({{"sim", p}}, d, {});
    CHECK(count(svg, "<polyline") == 1);
    CHECK(count(svg, "<circle") == 3);
    CHECK(count(svg, "stroke-dasharray") == 1);
  }
  SUBCASE("boxes with increasing opacity") {
    std::vector<Rect> boxes{{{-0.18, -0.09}, {-0.12, -0.02}},
                            {{-0.17, -0.07}, {-0.11, 0.0}},
                            {{-0.16, -0.05}, {-0.10, 0.02}}};
    std::string svg = render_comparison_svg({{"sim", p}}, d, boxes);
    CHECK(count(svg, "stroke-opacity") == 3);
    std::vector<double> ops;
    std::size_t pos = 0;
    while ((pos = svg.find("stroke-opacity=\"", pos)) != std::string::npos) {
      pos += 16;
      ops.push_back(std::stod(svg.substr(pos)));
    }
    REQUIRE(ops.size() == 3);
    CHECK(ops[0] < ops[1]);
    CHECK(ops[1] < ops[2]);
  }
  SUBCASE("empty path list is an error") {
    CHECK_THROWS_AS(render_comparison_svg({}, d, {}), ConfigError);
  }
  SUBCASE("deterministic output") {
    std::string s1 = render_comparison_svg({{"sim", p}}, d, {});
    std::string s2 = render_comparison_svg({{"sim", p}}, d, {});
    CHECK(s1 == s2);
  }
}
