// qpr — parametrically driven coupled quantum oscillators: evolve the
// ground state under a modulated coupling, project onto the static
// eigenbasis, sweep drive parameters, classify resonance regimes.
#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "qpr/config.hpp"
#include "qpr/grid_solver.hpp"
#include "qpr/sweep.hpp"
#include "qpr/version.hpp"

namespace fs = std::filesystem;
using namespace qpr;

namespace {

struct CommonOpts {
  std::string config_path;
  std::string out_dir;
  std::string format = "csv";
  int threads = 0;
};

void add_common(CLI::App* cmd, CommonOpts& opts, bool config_required = true) {
  auto* c = cmd->add_option("--config", opts.config_path, "config file path");
  if (config_required) c->required();
  cmd->add_option("--out", opts.out_dir, "output directory");
  cmd->add_option("--format", opts.format, "csv|json")
      ->check(CLI::IsMember({"csv", "json"}));
  cmd->add_option("--threads", opts.threads,
                  "worker threads (0 = all cores)");
}

std::string out_stem(const CommonOpts& opts, const char* fallback) {
  if (opts.config_path.empty()) return fallback;
  return fs::path(opts.config_path).stem().string();
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open output file: " + path.string());
  out << text;
  if (!out) throw Error("failed writing: " + path.string());
  std::printf("wrote %s\n", path.string().c_str());
}

int finish_sweep(const SweepResult& result, const CommonOpts& opts,
                 const char* fallback_stem) {
  size_t failed = 0;
  for (const auto& r : result.records)
    if (!r.ok) ++failed;
  if (!opts.out_dir.empty()) {
    fs::create_directories(opts.out_dir);
    const fs::path base = fs::path(opts.out_dir) /
                          (out_stem(opts, fallback_stem) +
                           (opts.format == "csv" ? ".csv" : ".json"));
    write_file(base, opts.format == "csv" ? csv_string(result)
                                          : json_string(result));
  } else {
    if (opts.format == "csv")
      emit_csv(result, std::cout);
    else
      std::cout << json_string(result) << "\n";
  }
  if (failed == result.records.size() && !result.records.empty()) {
    std::fprintf(stderr, "error: every sweep point failed\n");
    return 2;
  }
  if (failed > 0)
    std::fprintf(stderr, "warning: %zu of %zu points failed\n", failed,
                 result.records.size());
  return 0;
}

void print_point_summary(const PointResult& pt, const DriveSpec<double>& d) {
  std::printf("drive: beta0=%g beta1=%g detuning=%g cycles=%d (tau_f=%.6g)\n",
              d.beta0, d.beta1, d.detuning, d.cycles, d.tau_final());
  std::printf("p00 = %.12g   captured_mass = %.12g (n_max %d)\n",
              ground_survival(pt.grid), pt.grid.captured_mass, pt.grid.n_max);
  std::printf("energy: total %.12g  (+: %.12g  -: %.12g  zero point %.12g)\n",
              pt.energy.total, pt.energy.plus, pt.energy.minus,
              pt.energy.zero_point);
  std::printf("largest joint probabilities:\n");
  struct Entry { double p; int a, b; };
  std::vector<Entry> top;
  for (int a = 0; a <= pt.grid.n_max; a += 2)
    for (int b = 0; b <= pt.grid.n_max; b += 2)
      top.push_back({pt.grid.probs(a, b), a, b});
  std::partial_sort(top.begin(), top.begin() + std::min<size_t>(6, top.size()),
                    top.end(), [](auto& x, auto& y) { return x.p > y.p; });
  for (size_t i = 0; i < std::min<size_t>(6, top.size()); ++i)
    std::printf("  p(%d,%d) = %.6e\n", top[i].a, top[i].b, top[i].p);
}

void write_point_files(const PointResult& pt, const CommonOpts& opts) {
  if (opts.out_dir.empty()) return;
  fs::create_directories(opts.out_dir);
  const std::string stem = out_stem(opts, "point");

  std::ostringstream grid;
  grid << "n_plus,n_minus,p\n";
  for (int a = 0; a <= pt.grid.n_max; a += 2)
    for (int b = 0; b <= pt.grid.n_max; b += 2) {
      char buf[64];
      std::snprintf(buf, sizeof buf, "%d,%d,%.17g\n", a, b,
                    pt.grid.probs(a, b));
      grid << buf;
    }
  write_file(fs::path(opts.out_dir) / (stem + "_grid.csv"), grid.str());

  const auto [p_plus, p_minus] = marginals(pt.grid);
  std::ostringstream marg;
  marg << "n,p_plus,p_minus\n";
  for (int n = 0; n <= pt.grid.n_max; ++n) {
    char buf[80];
    std::snprintf(buf, sizeof buf, "%d,%.17g,%.17g\n", n, p_plus[n],
                  p_minus[n]);
    marg << buf;
  }
  write_file(fs::path(opts.out_dir) / (stem + "_marginals.csv"), marg.str());

  std::ostringstream shells;
  shells << "N,P,g,per_state\n";
  for (const auto& s : pt.shells.shells) {
    char buf[96];
    std::snprintf(buf, sizeof buf, "%d,%.17g,%d,%.17g\n", s.level, s.prob,
                  s.degeneracy, s.per_state());
    shells << buf;
  }
  write_file(fs::path(opts.out_dir) / (stem + "_shells.csv"), shells.str());
}

void print_fits(const RegimeReportd& rep) {
  if (rep.degenerate_data) {
    std::printf("regime: off-resonant (too few populated levels to fit)\n");
    return;
  }
  std::printf("power law:   exponent %.6g  r^2 %.8g  (N in [%d, %d])\n",
              rep.power->exponent, rep.power->r_squared, rep.power->n_lo,
              rep.power->n_hi);
  std::printf("exponential: exponent %.6g  r^2 %.8g\n",
              rep.exponential->exponent, rep.exponential->r_squared);
  std::printf("regime: %s\n", to_string(rep.regime));
}

void write_trajectories(const SweepConfig& cfg, const CommonOpts& opts) {
  if (opts.out_dir.empty()) return;
  Trajectory<double> tp, tm;
  evolve(plus_mode(cfg.base), cfg.base, cfg.integrator, &tp);
  evolve(minus_mode(cfg.base), cfg.base, cfg.integrator, &tm);
  std::ostringstream ss;
  ss << "tau,a_plus_re,a_plus_im,b_plus_re,b_plus_im,"
        "a_minus_re,a_minus_im,b_minus_re,b_minus_im\n";
  for (size_t i = 0; i < tp.tau.size(); ++i) {
    char buf[400];
    std::snprintf(buf, sizeof buf,
                  "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n",
                  tp.tau[i], tp.a[i].real(), tp.a[i].imag(), tp.b[i].real(),
                  tp.b[i].imag(), tm.a[i].real(), tm.a[i].imag(),
                  tm.b[i].real(), tm.b[i].imag());
    ss << buf;
  }
  write_file(fs::path(opts.out_dir) / (out_stem(opts, "point") + "_trajectory.csv"),
             ss.str());
}

int cmd_evolve(const CommonOpts& opts, bool spectrum_mode) {
  const auto parsed = cfg::load_config(opts.config_path);
  const SweepConfig cfg = cfg::sweep_config(parsed);
  const PointResult pt = run_point(cfg.base, cfg.integrator, cfg.truncation,
                                   cfg.fit_range);
  print_point_summary(pt, cfg.base);
  if (spectrum_mode) {
    std::printf("\nshell distribution (N, P_N, g_N, P_N/g_N):\n");
    for (const auto& s : pt.shells.shells) {
      if (s.per_state() < 1e-14) continue;
      std::printf("  %4d  %.6e  %3d  %.6e\n", s.level, s.prob, s.degeneracy,
                  s.per_state());
    }
    print_fits(pt.regime);
  }
  write_point_files(pt, opts);
  if (!spectrum_mode) write_trajectories(cfg, opts);
  return 0;
}

int cmd_sweep(const CommonOpts& opts, bool energy_mode) {
  const auto parsed = cfg::load_config(opts.config_path);
  SweepConfig cfg = cfg::sweep_config(parsed);
  if (energy_mode) cfg.with_fits = false;
  const SweepResult result = run_sweep(cfg, opts.threads);
  return finish_sweep(result, opts, energy_mode ? "energy" : "sweep");
}

int cmd_nmode(const CommonOpts& opts) {
  const auto parsed = cfg::load_config(opts.config_path);
  const SweepConfig cfg = cfg::sweep_config(parsed);
  if (!cfg.matrices)
    throw ConfigError("nmode needs a [matrices] section");
  const ModeReductiond red = reduce(*cfg.matrices, cfg.reduce_tol);
  std::printf("normal modes (ascending):\n");
  for (Eigen::Index i = 0; i < red.lambda0.size(); ++i) {
    const auto mode = ModeParams<double>::from_lambdas(red.lambda0[i],
                                                       red.lambda1[i]);
    const auto w = predict_window(mode);
    std::printf(
        "  mode %ld: lambda0 %.8g lambda1 %+.8g  window center %+.6g "
        "half-width %.6g\n",
        long(i), red.lambda0[i], red.lambda1[i], w.center, w.half_width);
  }
  std::printf("rotation residual: %.3e\n", red.residual);

  if (cfg.matrices->size() == 2) return finish_sweep(run_sweep(cfg, opts.threads), opts, "nmode");

  const auto records = run_nmode_sweep(cfg, red, opts.threads);
  std::ostringstream ss;
  emit_nmode_csv(records, ss);
  if (!opts.out_dir.empty()) {
    fs::create_directories(opts.out_dir);
    write_file(fs::path(opts.out_dir) / (out_stem(opts, "nmode") + ".csv"),
               ss.str());
  } else {
    std::cout << ss.str();
  }
  size_t failed = 0;
  for (const auto& r : records)
    if (!r.ok) ++failed;
  if (failed == records.size() && !records.empty()) return 2;
  if (failed > 0)
    std::fprintf(stderr, "warning: %zu of %zu points failed\n", failed,
                 records.size());
  return 0;
}

int cmd_verify(const CommonOpts& opts) {
  DriveSpec<double> drive{0.0, 0.02, 0.0, 20};
  GridSpecd grid;
  if (!opts.config_path.empty()) {
    const auto parsed = cfg::load_config(opts.config_path);
    drive = cfg::sweep_config(parsed).base;
    grid = cfg::grid_spec(parsed);
  }
  drive.validate();
  int failures = 0;
  auto report = [&](const char* name, bool pass, double measured,
                    const char* detail) {
    std::printf("%-34s %s  (%s = %.3e)\n", name, pass ? "PASS" : "FAIL",
                detail, measured);
    if (!pass) ++failures;
  };

  const auto mode = plus_mode(drive);

  {  // undriven mode stays in its ground state
    DriveSpec<double> still = drive;
    still.beta1 = 0.0;
    still.cycles = std::min(drive.cycles, 5);
    const auto m = plus_mode(still);
    const auto g = evolve_grid(m, still.clock(), grid);
    const auto exact = gaussian_on_grid(initial_state(m), g.q);
    const double f = fidelity(g.psi, exact);
    report("stationary ground state", f > 1 - 1e-8, 1 - f, "infidelity");
  }

  const auto g = evolve_grid(mode, drive.clock(), grid);
  {
    const double norm = grid_norm_sq(g);
    report("norm conservation", std::abs(norm - 1) < 1e-10,
           std::abs(norm - 1), "|norm-1|");
  }
  const auto state =
      evolve(mode, drive, IntegratorConfig<double>::adaptive(1e-10, 1e-13));
  {
    const auto ansatz = gaussian_on_grid(state, g.q);
    const double f = fidelity(g.psi, ansatz);
    report("grid vs parameter evolution", f > 1 - 1e-6, 1 - f, "infidelity");
  }
  {
    const auto pg = fock_probabilities(g, mode.omega0, 20);
    const auto set = overlap_coefficients(state, mode, 20);
    double worst = 0;
    for (int n = 0; n <= 20; ++n)
      worst = std::max(worst, std::abs(pg[n] - std::norm(set.c[n])));
    report("level probabilities", worst < 1e-6, worst, "max |dp|");
  }
  {
    const double k = std::abs(excess_kurtosis(g));
    report("gaussian closure", k < 1e-6, k, "|excess kurtosis|");
  }
  return failures == 0 ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"parametrically driven coupled quantum oscillators"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  CommonOpts evolve_opts, sweep_opts, spectrum_opts, energy_opts, nmode_opts,
      verify_opts;

  auto* evolve_cmd = app.add_subcommand(
      "evolve", "single drive point: joint probabilities and energy");
  add_common(evolve_cmd, evolve_opts);
  auto* sweep_cmd =
      app.add_subcommand("sweep", "run a parameter sweep from a config file");
  add_common(sweep_cmd, sweep_opts);
  auto* spectrum_cmd = app.add_subcommand(
      "spectrum", "single point: shell distribution and decay fits");
  add_common(spectrum_cmd, spectrum_opts);
  auto* energy_cmd = app.add_subcommand(
      "energy", "energy versus detuning or versus cycle count");
  add_common(energy_cmd, energy_opts);
  auto* nmode_cmd = app.add_subcommand(
      "nmode", "N coupled oscillators from coupling matrices");
  add_common(nmode_cmd, nmode_opts);
  auto* verify_cmd = app.add_subcommand(
      "verify", "cross-check the parameter evolution against a grid solver");
  add_common(verify_cmd, verify_opts, /*config_required=*/false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (evolve_cmd->parsed()) return cmd_evolve(evolve_opts, false);
    if (spectrum_cmd->parsed()) return cmd_evolve(spectrum_opts, true);
    if (sweep_cmd->parsed()) return cmd_sweep(sweep_opts, false);
    if (energy_cmd->parsed()) return cmd_sweep(energy_opts, true);
    if (nmode_cmd->parsed()) return cmd_nmode(nmode_opts);
    if (verify_cmd->parsed()) return cmd_verify(verify_opts);
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 1;
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 0;
}
