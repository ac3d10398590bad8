#include "qpr/sweep.hpp"

#include <json.hpp>

#include <atomic>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <sstream>
#include <thread>

#include "qpr/version.hpp"

namespace qpr {

using nlohmann::json;

// ---- configuration ------------------------------------------------------

std::vector<double> SweepConfig::linspace(double lo, double hi, int count) {
  if (count < 1) throw ConfigError("sweep count must be >= 1");
  std::vector<double> v(count);
  if (count == 1) {
    v[0] = (lo + hi) / 2;
    return v;
  }
  for (int i = 0; i < count; ++i)
    v[size_t(i)] = lo + (hi - lo) * double(i) / double(count - 1);
  return v;
}

void SweepConfig::validate() const {
  if (values.empty()) throw ConfigError("sweep has no axis values");
  integrator.validate();
  for (const auto& t : tracked) {
    if (t.n_plus < 0 || t.n_minus < 0)
      throw ConfigError("tracked state indices must be non-negative");
    if (t.n_plus % 2 != 0 || t.n_minus % 2 != 0)
      throw SelectionRuleError(
          "tracked state (" + std::to_string(t.n_plus) + "," +
          std::to_string(t.n_minus) +
          ") has an odd index; its probability vanishes identically");
  }
  if (!(truncation.tail_tol > 0))
    throw ConfigError("spectrum tail_tol must be positive");
  if (truncation.n_max < 0 || truncation.n_max % 2 != 0)
    throw ConfigError("spectrum n_max must be even and non-negative");
  for (double v : values) {
    DriveSpec<double> d = base;
    if (axis == SweepAxis::Detuning) {
      d.detuning = v;
    } else {
      if (v < 1 || v != std::nearbyint(v))
        throw ConfigError("cycles axis values must be positive integers");
      d.cycles = int(v);
    }
    if (!matrices) d.validate();
    if (!(2 + d.detuning > 0))
      throw ConfigError("drive frequency 2 + detuning must stay positive");
  }
  if (matrices) matrices->validate();
}

// ---- helpers -------------------------------------------------------------

std::uint64_t fnv1a_hash(std::string_view text) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

void parallel_for(std::size_t n, int threads,
                  const std::function<void(std::size_t)>& fn) {
  unsigned workers = threads > 0 ? unsigned(threads)
                                 : std::max(1u, std::thread::hardware_concurrency());
  workers = std::min<std::size_t>(workers, n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  auto body = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= n) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (unsigned w = 0; w < workers; ++w) pool.emplace_back(body);
  for (auto& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

namespace {

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string hash_hex(std::string_view text) {
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016" PRIx64, fnv1a_hash(text));
  return buf;
}

const char* error_name(const Error& e) {
  if (dynamic_cast<const IntegrationFailure*>(&e)) return "IntegrationFailure";
  if (dynamic_cast<const DegenerateSolution*>(&e)) return "DegenerateSolution";
  if (dynamic_cast<const GridOverflow*>(&e)) return "GridOverflow";
  if (dynamic_cast<const NotSimultaneouslyDiagonalizable*>(&e))
    return "NotSimultaneouslyDiagonalizable";
  if (dynamic_cast<const NotPositiveDefinite*>(&e)) return "NotPositiveDefinite";
  if (dynamic_cast<const InsufficientData*>(&e)) return "InsufficientData";
  if (dynamic_cast<const SelectionRuleError*>(&e)) return "SelectionRuleError";
  if (dynamic_cast<const ConfigError*>(&e)) return "ConfigError";
  return "Error";
}

// overlap sets of both modes at a common truncation order
std::pair<OverlapSetd, OverlapSetd> aligned_overlaps(
    const GaussianModeStated& sp, const GaussianModeStated& sm,
    const ModeParams<double>& mp, const ModeParams<double>& mm,
    TruncationPolicy<double> policy, int min_n_max) {
  policy.n_max = std::max(policy.n_max, min_n_max);
  policy.cap = std::max(policy.cap, min_n_max);
  OverlapSetd plus = overlap_coefficients_adaptive(sp, mp, policy);
  OverlapSetd minus = overlap_coefficients_adaptive(sm, mm, policy);
  const int n = std::max({plus.n_max, minus.n_max, min_n_max});
  if (plus.n_max != n) plus = overlap_coefficients(sp, mp, n);
  if (minus.n_max != n) minus = overlap_coefficients(sm, mm, n);
  return {std::move(plus), std::move(minus)};
}

FitSummary fit_summary(const RegimeReportd& rep) {
  FitSummary f;
  f.regime = rep.degenerate_data ? "off-resonant" : to_string(rep.regime);
  f.degenerate = rep.degenerate_data;
  if (rep.power) {
    f.alpha_pow = rep.power->exponent;
    f.r2_pow = rep.power->r_squared;
    f.n_lo = rep.power->n_lo;
    f.n_hi = rep.power->n_hi;
  }
  if (rep.exponential) {
    f.alpha_exp = rep.exponential->exponent;
    f.r2_exp = rep.exponential->r_squared;
  }
  return f;
}

DriveSpec<double> drive_at(const SweepConfig& cfg, double axis_value) {
  DriveSpec<double> d = cfg.base;
  if (cfg.axis == SweepAxis::Detuning)
    d.detuning = axis_value;
  else
    d.cycles = int(axis_value);
  return d;
}

RunRecord run_record(const SweepConfig& cfg, double axis_value,
                     const ModeParams<double>& mp,
                     const ModeParams<double>& mm) {
  RunRecord rec;
  rec.axis_value = axis_value;
  rec.drive = drive_at(cfg, axis_value);
  try {
    const DriveClock<double> clock = rec.drive.clock();
    const auto sp = evolve(mp, clock, cfg.integrator);
    const auto sm = evolve(mm, clock, cfg.integrator);

    int min_n = 0;
    for (const auto& t : cfg.tracked)
      min_n = std::max({min_n, t.n_plus, t.n_minus});
    const auto [plus, minus] =
        aligned_overlaps(sp, sm, mp, mm, cfg.truncation, min_n);
    const SpectrumGridd grid = spectrum_grid(plus, minus);

    rec.p00 = ground_survival(grid);
    rec.captured_mass = grid.captured_mass;
    rec.tracked_p.reserve(cfg.tracked.size());
    for (const auto& t : cfg.tracked)
      rec.tracked_p.push_back(grid.probs(t.n_plus, t.n_minus));
    rec.energy = energy(sp, sm, mp, mm);
    if (cfg.with_fits)
      rec.fits = fit_summary(classify_regime(shell_distribution(grid),
                                             cfg.fit_range));
  } catch (const Error& e) {
    rec.ok = false;
    rec.error_type = error_name(e);
    rec.error_message = e.what();
  }
  return rec;
}

}  // namespace

// ---- pipelines -----------------------------------------------------------

PointResult run_point(const DriveSpec<double>& drive,
                      const IntegratorConfig<double>& integrator,
                      const TruncationPolicy<double>& truncation,
                      const FitRange<double>& fit_range) {
  drive.validate();
  PointResult out;
  out.plus = plus_mode(drive);
  out.minus = minus_mode(drive);
  out.plus_state = evolve(out.plus, drive, integrator);
  out.minus_state = evolve(out.minus, drive, integrator);
  auto [plus, minus] = aligned_overlaps(out.plus_state, out.minus_state,
                                        out.plus, out.minus, truncation, 0);
  out.plus_set = std::move(plus);
  out.minus_set = std::move(minus);
  out.grid = spectrum_grid(out.plus_set, out.minus_set);
  out.energy = energy(out.plus_state, out.minus_state, out.plus, out.minus);
  out.shells = shell_distribution(out.grid);
  out.regime = classify_regime(out.shells, fit_range);
  return out;
}

SweepResult run_sweep(const SweepConfig& cfg, int threads) {
  cfg.validate();
  ModeParams<double> mp, mm;
  if (cfg.matrices) {
    if (cfg.matrices->size() != 2)
      throw ConfigError(
          "run_sweep with matrices needs n = 2; use run_nmode_sweep");
    const ModeReductiond red = reduce(*cfg.matrices, cfg.reduce_tol);
    mm = ModeParams<double>::from_lambdas(red.lambda0[0], red.lambda1[0]);
    mp = ModeParams<double>::from_lambdas(red.lambda0[1], red.lambda1[1]);
  } else {
    mp = plus_mode(cfg.base);
    mm = minus_mode(cfg.base);
  }

  SweepResult out;
  out.config = cfg;
  out.provenance = {kVersion, hash_hex(cfg.source), cfg.integrator};
  out.records.resize(cfg.values.size());
  parallel_for(cfg.values.size(), threads, [&](std::size_t i) {
    out.records[i] = run_record(cfg, cfg.values[i], mp, mm);
  });
  return out;
}

std::vector<NModeRecord> run_nmode_sweep(const SweepConfig& cfg,
                                         const ModeReductiond& red,
                                         int threads) {
  cfg.validate();
  const auto modes = red.modes();
  std::vector<NModeRecord> records(cfg.values.size());
  parallel_for(cfg.values.size(), threads, [&](std::size_t i) {
    NModeRecord& rec = records[i];
    rec.axis_value = cfg.values[i];
    const DriveSpec<double> d = drive_at(cfg, cfg.values[i]);
    try {
      const DriveClock<double> clock = d.clock();
      for (const auto& mode : modes) {
        const auto state = evolve(mode, clock, cfg.integrator);
        const auto set =
            overlap_coefficients_adaptive(state, mode, cfg.truncation);
        rec.p0.push_back(std::norm(set.c[0]));
        rec.energy.push_back(mode_energy(state, mode.omega0_sq));
        rec.zero_point += mode.omega0 / 2;
        if (cfg.with_fits)
          rec.fits.push_back(fit_summary(
              classify_marginal(set.c.cwiseAbs2().eval(), cfg.fit_range)));
      }
    } catch (const Error& e) {
      rec.ok = false;
      rec.error_type = error_name(e);
      rec.error_message = e.what();
    }
  });
  return records;
}

// ---- CSV -----------------------------------------------------------------

void emit_csv(const SweepResult& result, std::ostream& os) {
  os << "axis_value";
  for (const auto& t : result.config.tracked)
    os << ",p_" << t.n_plus << "_" << t.n_minus;
  os << ",energy_total,energy_plus,energy_minus,alpha_pow,alpha_exp,regime,"
        "p00,captured_mass\n";
  for (const auto& r : result.records) {
    os << format_double(r.axis_value);
    if (r.ok) {
      for (double p : r.tracked_p) os << "," << format_double(p);
      os << "," << format_double(r.energy.total) << ","
         << format_double(r.energy.plus) << "," << format_double(r.energy.minus);
      if (r.fits)
        os << "," << format_double(r.fits->alpha_pow) << ","
           << format_double(r.fits->alpha_exp) << "," << r.fits->regime;
      else
        os << ",nan,nan,none";
      os << "," << format_double(r.p00) << ","
         << format_double(r.captured_mass) << "\n";
    } else {
      for (size_t i = 0; i < result.config.tracked.size(); ++i) os << ",nan";
      os << ",nan,nan,nan,nan,nan,failed,nan,nan\n";
    }
  }
}

std::string csv_string(const SweepResult& result) {
  std::ostringstream ss;
  emit_csv(result, ss);
  return ss.str();
}

void emit_nmode_csv(const std::vector<NModeRecord>& records,
                    std::ostream& os) {
  const size_t n = records.empty() ? 0 : records.front().p0.size();
  os << "axis_value";
  for (size_t m = 0; m < n; ++m)
    os << ",p0_m" << m << ",energy_m" << m << ",alpha_pow_m" << m
       << ",alpha_exp_m" << m << ",regime_m" << m;
  os << ",zero_point\n";
  for (const auto& r : records) {
    os << format_double(r.axis_value);
    for (size_t m = 0; m < n; ++m) {
      if (!r.ok || m >= r.p0.size()) {
        os << ",nan,nan,nan,nan," << (r.ok ? "none" : "failed");
        continue;
      }
      os << "," << format_double(r.p0[m]) << "," << format_double(r.energy[m]);
      if (m < r.fits.size())
        os << "," << format_double(r.fits[m].alpha_pow) << ","
           << format_double(r.fits[m].alpha_exp) << "," << r.fits[m].regime;
      else
        os << ",nan,nan,none";
    }
    os << "," << format_double(r.ok ? r.zero_point
                                    : std::nan("")) << "\n";
  }
}

// ---- JSON ----------------------------------------------------------------

namespace {

json integrator_json(const IntegratorConfig<double>& c) {
  return {{"method", c.method == IntegratorMethod::FixedRk4 ? "fixed-rk4"
                                                            : "adaptive-rk45"},
          {"steps_per_cycle", c.steps_per_cycle},
          {"rel_tol", c.rel_tol},
          {"abs_tol", c.abs_tol}};
}

IntegratorConfig<double> integrator_from_json(const json& j) {
  IntegratorConfig<double> c;
  c.method = j.at("method") == "fixed-rk4" ? IntegratorMethod::FixedRk4
                                           : IntegratorMethod::AdaptiveRk45;
  c.steps_per_cycle = j.at("steps_per_cycle");
  c.rel_tol = j.at("rel_tol");
  c.abs_tol = j.at("abs_tol");
  return c;
}

json record_json(const RunRecord& r) {
  json j;
  j["axis_value"] = r.axis_value;
  j["drive"] = {{"beta0", r.drive.beta0},
                {"beta1", r.drive.beta1},
                {"detuning", r.drive.detuning},
                {"cycles", r.drive.cycles}};
  j["ok"] = r.ok;
  if (!r.ok) {
    j["error"] = {{"type", r.error_type}, {"message", r.error_message}};
    return j;
  }
  j["error"] = nullptr;
  j["tracked_p"] = r.tracked_p;
  j["p00"] = r.p00;
  j["captured_mass"] = r.captured_mass;
  j["energy"] = {{"total", r.energy.total},
                 {"plus", r.energy.plus},
                 {"minus", r.energy.minus},
                 {"zero_point", r.energy.zero_point}};
  if (r.fits) {
    j["fits"] = {{"alpha_pow", r.fits->alpha_pow},
                 {"r2_pow", r.fits->r2_pow},
                 {"alpha_exp", r.fits->alpha_exp},
                 {"r2_exp", r.fits->r2_exp},
                 {"regime", r.fits->regime},
                 {"degenerate", r.fits->degenerate},
                 {"n_lo", r.fits->n_lo},
                 {"n_hi", r.fits->n_hi}};
  } else {
    j["fits"] = nullptr;
  }
  return j;
}

RunRecord record_from_json(const json& j) {
  RunRecord r;
  r.axis_value = j.at("axis_value");
  const json& d = j.at("drive");
  r.drive = {d.at("beta0"), d.at("beta1"), d.at("detuning"), d.at("cycles")};
  r.ok = j.at("ok");
  if (!r.ok) {
    r.error_type = j.at("error").at("type");
    r.error_message = j.at("error").at("message");
    return r;
  }
  r.tracked_p = j.at("tracked_p").get<std::vector<double>>();
  r.p00 = j.at("p00");
  r.captured_mass = j.at("captured_mass");
  const json& e = j.at("energy");
  r.energy = {e.at("total"), e.at("plus"), e.at("minus"), e.at("zero_point")};
  if (!j.at("fits").is_null()) {
    const json& f = j.at("fits");
    r.fits = FitSummary{f.at("alpha_pow"), f.at("r2_pow"),  f.at("alpha_exp"),
                        f.at("r2_exp"),    f.at("regime"),  f.at("degenerate"),
                        f.at("n_lo"),      f.at("n_hi")};
  }
  return r;
}

}  // namespace

std::string json_string(const SweepResult& result) {
  json j;
  j["schema"] = "qpr.sweep.v1";
  j["axis"] =
      result.config.axis == SweepAxis::Detuning ? "detuning" : "cycles";
  j["provenance"] = {{"code_version", result.provenance.code_version},
                     {"config_hash", result.provenance.config_hash},
                     {"integrator", integrator_json(result.provenance.integrator)}};
  json records = json::array();
  for (const auto& r : result.records) records.push_back(record_json(r));
  j["records"] = std::move(records);
  return j.dump(2);
}

SweepResult parse_sweep_json(std::string_view text) {
  const json j = json::parse(text);
  if (j.at("schema") != "qpr.sweep.v1")
    throw ConfigError("unknown sweep json schema");
  SweepResult out;
  out.config.axis =
      j.at("axis") == "detuning" ? SweepAxis::Detuning : SweepAxis::Cycles;
  out.provenance.code_version = j.at("provenance").at("code_version");
  out.provenance.config_hash = j.at("provenance").at("config_hash");
  out.provenance.integrator =
      integrator_from_json(j.at("provenance").at("integrator"));
  for (const json& rj : j.at("records")) {
    out.records.push_back(record_from_json(rj));
    out.config.values.push_back(out.records.back().axis_value);
  }
  return out;
}

namespace {

bool d_eq(double a, double b) {
  return a == b || (std::isnan(a) && std::isnan(b));
}

}  // namespace

bool records_equal(const RunRecord& a, const RunRecord& b) {
  if (!d_eq(a.axis_value, b.axis_value) || a.ok != b.ok) return false;
  if (a.drive.beta0 != b.drive.beta0 || a.drive.beta1 != b.drive.beta1 ||
      a.drive.detuning != b.drive.detuning || a.drive.cycles != b.drive.cycles)
    return false;
  if (!a.ok)
    return a.error_type == b.error_type && a.error_message == b.error_message;
  if (a.tracked_p.size() != b.tracked_p.size()) return false;
  for (size_t i = 0; i < a.tracked_p.size(); ++i)
    if (!d_eq(a.tracked_p[i], b.tracked_p[i])) return false;
  if (!d_eq(a.p00, b.p00) || !d_eq(a.captured_mass, b.captured_mass))
    return false;
  if (!d_eq(a.energy.total, b.energy.total) ||
      !d_eq(a.energy.plus, b.energy.plus) ||
      !d_eq(a.energy.minus, b.energy.minus) ||
      !d_eq(a.energy.zero_point, b.energy.zero_point))
    return false;
  if (a.fits.has_value() != b.fits.has_value()) return false;
  if (a.fits) {
    const FitSummary &fa = *a.fits, &fb = *b.fits;
    return d_eq(fa.alpha_pow, fb.alpha_pow) && d_eq(fa.r2_pow, fb.r2_pow) &&
           d_eq(fa.alpha_exp, fb.alpha_exp) && d_eq(fa.r2_exp, fb.r2_exp) &&
           fa.regime == fb.regime && fa.degenerate == fb.degenerate &&
           fa.n_lo == fb.n_lo && fa.n_hi == fb.n_hi;
  }
  return true;
}

}  // namespace qpr
