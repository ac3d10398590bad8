#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <atomic>
#include <sstream>

#include "qpr/config.hpp"
#include "qpr/sweep.hpp"
#include "qpr/version.hpp"

using namespace qpr;

namespace {

SweepConfig small_sweep(int points = 7, int cycles = 20) {
  SweepConfig cfg;
  cfg.base = {0.0, 0.02, 0.0, cycles};
  cfg.values = SweepConfig::linspace(-0.03, 0.03, points);
  cfg.integrator = IntegratorConfig<double>::adaptive(1e-9, 1e-12);
  cfg.truncation.n_max = 32;
  cfg.source = "test";
  return cfg;
}

}  // namespace

TEST_CASE("a single undriven point reproduces the ground state") {
  SweepConfig cfg;
  cfg.base = {0.0, 0.0, 0.0, 1};
  cfg.values = {0.0};
  cfg.source = "undriven";
  const auto result = run_sweep(cfg, 1);
  REQUIRE(result.records.size() == 1);
  const auto& r = result.records[0];
  CHECK(r.ok);
  CHECK(r.p00 == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(r.tracked_p[0] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(r.energy.total == doctest::Approx(r.energy.zero_point).epsilon(1e-12));

  const std::string csv = csv_string(result);
  CHECK(csv.find("axis_value,p_0_0,p_0_2,p_2_0,p_2_2,energy_total,"
                 "energy_plus,energy_minus,alpha_pow,alpha_exp,regime,p00,"
                 "captured_mass\n") == 0);
  CHECK(csv.find("off-resonant") != std::string::npos);  // degenerate data
}

TEST_CASE("an empty record list emits a header-only CSV") {
  SweepResult result;
  result.config = small_sweep();
  std::ostringstream ss;
  emit_csv(result, ss);
  const std::string csv = ss.str();
  CHECK(csv.substr(0, 11) == "axis_value,");
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 1);
}

TEST_CASE("records arrive in axis order regardless of thread count") {
  const auto cfg = small_sweep();
  const auto a = run_sweep(cfg, 1);
  const auto b = run_sweep(cfg, 2);
  const auto c = run_sweep(cfg, 4);
  const std::string sa = csv_string(a), sb = csv_string(b), sc = csv_string(c);
  CHECK(sa == sb);
  CHECK(sa == sc);
  for (size_t i = 0; i < a.records.size(); ++i) {
    CHECK(a.records[i].axis_value == cfg.values[i]);
    CHECK(records_equal(a.records[i], b.records[i]));
  }
}

TEST_CASE("json round-trip preserves records bit for bit") {
  SweepConfig cfg = small_sweep(5);
  // the last point fails: squeezing outruns the range of the width spikes
  cfg.axis = SweepAxis::Cycles;
  cfg.base.beta1 = 0.3;
  cfg.base.detuning = 0.0;
  cfg.values = {5, 10, 200};
  cfg.integrator = IntegratorConfig<double>::adaptive(1e-9, 1e-12);
  const auto result = run_sweep(cfg, 2);
  REQUIRE(result.records.size() == 3);
  CHECK(result.records[0].ok);
  CHECK_FALSE(result.records[2].ok);
  CHECK(result.records[2].error_type == "IntegrationFailure");

  const std::string text = json_string(result);
  const auto parsed = parse_sweep_json(text);
  REQUIRE(parsed.records.size() == result.records.size());
  for (size_t i = 0; i < result.records.size(); ++i)
    CHECK(records_equal(parsed.records[i], result.records[i]));
  CHECK(parsed.provenance.config_hash == result.provenance.config_hash);
  CHECK(parsed.provenance.code_version == result.provenance.code_version);

  // the failed point surfaces in the CSV without breaking the sweep
  const std::string csv = csv_string(result);
  CHECK(csv.find("failed") != std::string::npos);
}

TEST_CASE("failed points do not abort the sweep") {
  SweepConfig cfg = small_sweep(3, 10);
  cfg.axis = SweepAxis::Cycles;
  cfg.base.beta1 = 0.3;
  cfg.values = {200, 5, 10};
  cfg.integrator = IntegratorConfig<double>::adaptive(1e-9, 1e-12);
  const auto result = run_sweep(cfg, 1);
  CHECK_FALSE(result.records[0].ok);
  CHECK(result.records[1].ok);
  CHECK(result.records[2].ok);
}

TEST_CASE("disabled fits leave the schema intact") {
  SweepConfig cfg = small_sweep(2);
  cfg.with_fits = false;
  const auto result = run_sweep(cfg, 1);
  CHECK_FALSE(result.records[0].fits.has_value());
  const std::string csv = csv_string(result);
  CHECK(csv.find(",nan,nan,none,") != std::string::npos);
  CHECK(csv.find("alpha_pow,alpha_exp,regime") != std::string::npos);
}

TEST_CASE("odd tracked states are rejected at validation") {
  SweepConfig cfg = small_sweep();
  cfg.tracked.push_back({1, 2});
  CHECK_THROWS_AS(run_sweep(cfg, 1), SelectionRuleError);
}

TEST_CASE("cycle axis values must be positive integers") {
  SweepConfig cfg = small_sweep();
  cfg.axis = SweepAxis::Cycles;
  cfg.values = {10.5};
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg.values = {-3};
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
}

TEST_CASE("provenance carries the config hash") {
  auto cfg = small_sweep(1);
  const auto result = run_sweep(cfg, 1);
  CHECK(result.provenance.code_version == std::string(kVersion));
  CHECK(result.provenance.config_hash.size() == 16);
  cfg.source = "different";
  CHECK(run_sweep(cfg, 1).provenance.config_hash !=
        result.provenance.config_hash);
}

TEST_CASE("fnv1a reference vectors") {
  CHECK(fnv1a_hash("") == 0xcbf29ce484222325ull);
  CHECK(fnv1a_hash("a") == 0xaf63dc4c8601ec8cull);
}

TEST_CASE("parallel_for covers every index exactly once") {
  std::vector<std::atomic<int>> hits(257);
  parallel_for(hits.size(), 4, [&](std::size_t i) { hits[i]++; });
  for (const auto& h : hits) CHECK(h.load() == 1);
}

TEST_CASE("parallel_for propagates exceptions") {
  CHECK_THROWS_AS(parallel_for(8, 2,
                               [](std::size_t i) {
                                 if (i == 5) throw Error("boom");
                               }),
                  Error);
}

TEST_CASE("reduction-backed sweep matches the direct two-mode sweep") {
  SweepConfig direct = small_sweep(5, 20);
  direct.base.beta0 = 0.05;

  SweepConfig viamat = direct;
  Eigen::MatrixXd k0(2, 2), k1(2, 2);
  k0 << 1.0, 0.05, 0.05, 1.0;
  k1 << 0.0, 0.02, 0.02, 0.0;
  viamat.matrices = CouplingMatricesd{k0, k1};

  const auto a = run_sweep(direct, 2);
  const auto b = run_sweep(viamat, 2);
  // the pair reduction is exact, so the two pipelines agree to the byte
  CHECK(csv_string(a) == csv_string(b));
  for (size_t i = 0; i < a.records.size(); ++i) {
    REQUIRE(a.records[i].ok);
    CHECK(records_equal(a.records[i], b.records[i]));
  }
}

TEST_CASE("nmode sweep reports per-mode quantities") {
  SweepConfig cfg;
  cfg.base = {0.0, 0.0, 0.0, 15};
  cfg.values = {0.02};
  cfg.truncation.n_max = 32;
  cfg.source = "nmode";
  Eigen::MatrixXd b0(3, 3);
  b0 << 0, 0.08, 0.03, 0.08, 0, 0.05, 0.03, 0.05, 0;
  const CouplingMatricesd cm{Eigen::MatrixXd::Identity(3, 3) + b0,
                             0.6 * b0};
  cfg.matrices = cm;
  const auto red = reduce(cm);
  const auto records = run_nmode_sweep(cfg, red, 2);
  REQUIRE(records.size() == 1);
  const auto& r = records[0];
  REQUIRE(r.ok);
  REQUIRE(r.p0.size() == 3);
  REQUIRE(r.energy.size() == 3);
  double zp = 0;
  for (const auto& m : red.modes()) zp += m.omega0 / 2;
  CHECK(r.zero_point == doctest::Approx(zp).epsilon(1e-12));
  std::ostringstream ss;
  emit_nmode_csv(records, ss);
  CHECK(ss.str().find("p0_m2") != std::string::npos);

  // run_sweep itself refuses n != 2
  CHECK_THROWS_AS(run_sweep(cfg, 1), ConfigError);
}

TEST_CASE("run_point assembles the full single-point pipeline") {
  DriveSpec<double> d{0.0, 0.02, 0.005, 30};
  const auto pt = run_point(d, IntegratorConfig<double>::adaptive(1e-10, 1e-13),
                            TruncationPolicy<double>{});
  CHECK(ground_survival(pt.grid) ==
        doctest::Approx(std::norm(pt.plus_set.c[0]) *
                        std::norm(pt.minus_set.c[0]))
            .epsilon(1e-12));
  CHECK(pt.energy.total >= pt.energy.zero_point);
  CHECK(pt.shells.shells.front().level == 0);
  CHECK(pt.grid.captured_mass > 0.999);
}
