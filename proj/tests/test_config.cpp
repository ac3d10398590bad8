#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "qpr/config.hpp"

using namespace qpr;
using cfg::parse_config;

TEST_CASE("sections, scalars, arrays and comments parse") {
  const auto p = parse_config(R"(# a comment
[drive]
beta0 = 0.05   # trailing comment
beta1 = 2e-2
cycles = 200
name = "fig two"
flag = true

[output]
track = [0, 0, 2, 0]
words = ["a", "b"]
)");
  CHECK(p.at("drive", "beta0").as_number() == 0.05);
  CHECK(p.at("drive", "beta1").as_number() == 0.02);
  CHECK(p.at("drive", "cycles").as_integer() == 200);
  CHECK(p.at("drive", "name").as_string() == "fig two");
  CHECK(p.at("drive", "flag").as_bool() == true);
  const auto arr = p.at("output", "track").as_number_array();
  REQUIRE(arr.size() == 4);
  CHECK(arr[2] == 2.0);
  CHECK(p.at("output", "words").array[1].as_string() == "b");
  CHECK_FALSE(p.has("drive", "missing"));
}

TEST_CASE("parse errors carry line numbers") {
  auto expect_error = [](const char* text, const char* fragment) {
    try {
      parse_config(text);
      FAIL_CHECK("expected ConfigError for: " << text);
    } catch (const ConfigError& e) {
      CHECK(std::string(e.what()).find(fragment) != std::string::npos);
    }
  };
  expect_error("[drive]\nbeta0 0.05\n", "line 2");
  expect_error("beta0 = 1\n", "outside any");
  expect_error("[drive]\nbeta0 = \"open\n", "line 2");
  expect_error("[drive]\nx = 1\nx = 2\n", "duplicate");
  expect_error("[drive\nx = 1\n", "section");
  expect_error("[drive]\nx = [1, 2\n", "array");
  expect_error("[drive]\nx = abc\n", "cannot parse");
}

TEST_CASE("type mismatches are rejected") {
  const auto p = parse_config("[a]\nx = 1.5\ns = \"t\"\n");
  CHECK_THROWS_AS(p.at("a", "x").as_integer(), ConfigError);
  CHECK_THROWS_AS(p.at("a", "x").as_string(), ConfigError);
  CHECK_THROWS_AS(p.at("a", "s").as_number(), ConfigError);
  CHECK_THROWS_AS(p.at("a", "s").as_bool(), ConfigError);
  CHECK_THROWS_AS(p.at("a", "missing"), ConfigError);
}

TEST_CASE("sweep configuration from a full file") {
  const auto p = parse_config(R"(
[drive]
beta0 = 0.0
beta1 = 0.02
cycles = 200

[integrator]
method = "adaptive-rk45"
rel_tol = 1e-10
abs_tol = 1e-13

[sweep]
axis = "detuning"
min = -0.06
max = 0.06
count = 5

[spectrum]
n_max = 64
adaptive = false

[fit]
n_hi = 80

[output]
track = [0, 0, 0, 2, 2, 0]
fits = true
)");
  const auto c = cfg::sweep_config(p);
  CHECK(c.base.beta1 == 0.02);
  CHECK(c.base.cycles == 200);
  CHECK(c.integrator.method == IntegratorMethod::AdaptiveRk45);
  CHECK(c.integrator.rel_tol == 1e-10);
  REQUIRE(c.values.size() == 5);
  CHECK(c.values.front() == -0.06);
  CHECK(c.values.back() == 0.06);
  CHECK(c.values[2] == doctest::Approx(0.0));
  REQUIRE(c.tracked.size() == 3);
  CHECK(c.tracked[1].n_minus == 2);
  CHECK(c.truncation.n_max == 64);
  CHECK_FALSE(c.truncation.adaptive);
  CHECK(c.fit_range.n_hi == 80);
  CHECK(c.with_fits);
}

TEST_CASE("explicit axis values and the cycles axis") {
  const auto p = parse_config(R"(
[drive]
beta1 = 0.02
detuning = -0.0506

[sweep]
axis = "cycles"
values = [50, 100, 150, 200]
)");
  const auto c = cfg::sweep_config(p);
  CHECK(c.axis == SweepAxis::Cycles);
  REQUIRE(c.values.size() == 4);
  CHECK(c.values[3] == 200.0);
}

TEST_CASE("single point runs need no sweep section") {
  const auto p = parse_config("[drive]\nbeta1 = 0.01\ndetuning = 0.03\n");
  const auto c = cfg::sweep_config(p);
  REQUIRE(c.values.size() == 1);
  CHECK(c.values[0] == 0.03);
}

TEST_CASE("odd tracked states are rejected, not zeroed") {
  const auto p = parse_config(
      "[drive]\nbeta1 = 0.01\n[output]\ntrack = [1, 0]\n");
  CHECK_THROWS_AS(cfg::sweep_config(p), SelectionRuleError);
}

TEST_CASE("matrices section round-trips into coupling matrices") {
  const auto p = parse_config(R"(
[drive]
cycles = 10

[matrices]
n = 2
k0 = [1.0, 0.05, 0.05, 1.0]
k1 = [0.0, 0.02, 0.02, 0.0]
tol = 1e-9
)");
  const auto c = cfg::sweep_config(p);
  REQUIRE(c.matrices.has_value());
  CHECK(c.matrices->k0(0, 1) == 0.05);
  CHECK(c.matrices->k1(1, 0) == 0.02);
  CHECK(c.reduce_tol == 1e-9);
}

TEST_CASE("matrix size mismatches and asymmetry are caught") {
  CHECK_THROWS_AS(
      cfg::sweep_config(parse_config(
          "[drive]\ncycles = 1\n[matrices]\nn = 2\nk0 = [1, 0, 1]\nk1 = [0, 0, 0, 0]\n")),
      ConfigError);
  CHECK_THROWS_AS(
      cfg::sweep_config(parse_config("[drive]\ncycles = 1\n[matrices]\nn = 2\n"
                                     "k0 = [1, 0.2, 0.3, 1]\nk1 = [0, 0, 0, 0]\n")),
      ConfigError);
}

TEST_CASE("bad enum values are rejected") {
  CHECK_THROWS_AS(cfg::sweep_config(parse_config(
                      "[drive]\nbeta1 = 0.01\n[sweep]\naxis = \"speed\"\nmin "
                      "= 0\nmax = 1\ncount = 2\n")),
                  ConfigError);
  CHECK_THROWS_AS(cfg::sweep_config(parse_config(
                      "[drive]\nbeta1 = 0.01\n[integrator]\nmethod = \"euler\"\n")),
                  ConfigError);
}

TEST_CASE("grid settings with defaults") {
  const auto p = parse_config("[grid]\nhalf_width = 18\npoints = 4096\n");
  const auto g = cfg::grid_spec(p);
  CHECK(g.half_width == 18.0);
  CHECK(g.points == 4096);
  CHECK(g.dt == 0.0);
  const auto defaults = cfg::grid_spec(parse_config(""));
  CHECK(defaults.half_width == 15.0);
  CHECK(defaults.points == 2048);
}

TEST_CASE("linspace endpoints are exact") {
  const auto v = SweepConfig::linspace(-0.06, 0.06, 201);
  CHECK(v.size() == 201);
  CHECK(v.front() == -0.06);
  CHECK(v.back() == 0.06);
  CHECK_THROWS_AS(SweepConfig::linspace(0, 1, 0), ConfigError);
  const auto single = SweepConfig::linspace(2.0, 4.0, 1);
  CHECK(single[0] == 3.0);
}
