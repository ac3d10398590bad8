#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "qpr/drive.hpp"
#include "qpr/evolve.hpp"
#include "qpr/fit.hpp"
#include "qpr/multimode.hpp"
#include "qpr/observables.hpp"
#include "qpr/overlap.hpp"
#include "qpr/spectrum.hpp"

namespace qpr {

struct TrackedState {
  int n_plus = 0;
  int n_minus = 0;
};

enum class SweepAxis { Detuning, Cycles };

/// One parameter sweep: the base drive with either its detuning or its
/// cycle count replaced by each axis value in turn.
struct SweepConfig {
  DriveSpec<double> base;
  SweepAxis axis = SweepAxis::Detuning;
  std::vector<double> values;
  std::vector<TrackedState> tracked{{0, 0}, {0, 2}, {2, 0}, {2, 2}};
  TruncationPolicy<double> truncation{false, 128, 1e-6, 512, 16};
  IntegratorConfig<double> integrator;
  FitRange<double> fit_range;
  bool with_fits = true;

  // nmode runs: evolve the reduction of these matrices instead of the
  // two-mode drive (base supplies detuning/cycles only)
  std::optional<CouplingMatricesd> matrices;
  double reduce_tol = 1e-10;

  std::string source;  // config file text, hashed into the provenance

  void validate() const;
  static std::vector<double> linspace(double lo, double hi, int count);
};

struct FitSummary {
  double alpha_pow = 0, r2_pow = 0;
  double alpha_exp = 0, r2_exp = 0;
  std::string regime;
  bool degenerate = false;
  int n_lo = 0, n_hi = 0;
};

/// Outcome at one sweep point. A failed integration leaves ok == false
/// with the error recorded; the sweep continues.
struct RunRecord {
  double axis_value = 0;
  DriveSpec<double> drive;
  bool ok = true;
  std::string error_type;
  std::string error_message;
  std::vector<double> tracked_p;
  double p00 = 0;
  double captured_mass = 0;
  EnergyReportd energy;
  std::optional<FitSummary> fits;
};

struct Provenance {
  std::string code_version;
  std::string config_hash;
  IntegratorConfig<double> integrator;
};

struct SweepResult {
  SweepConfig config;
  Provenance provenance;
  std::vector<RunRecord> records;
};

/// Full single-point pipeline output (for the point subcommands).
struct PointResult {
  ModeParams<double> plus, minus;
  GaussianModeStated plus_state, minus_state;
  OverlapSetd plus_set, minus_set;
  SpectrumGridd grid;
  EnergyReportd energy;
  ShellDistributiond shells;
  RegimeReportd regime;
};

PointResult run_point(const DriveSpec<double>& drive,
                      const IntegratorConfig<double>& integrator,
                      const TruncationPolicy<double>& truncation = {},
                      const FitRange<double>& fit_range = {});

/// Runs every sweep point (over a worker pool when threads != 1) and
/// gathers the records in axis order. threads <= 0 uses all cores.
SweepResult run_sweep(const SweepConfig& cfg, int threads = 0);

/// Per-mode record of an N-oscillator run.
struct NModeRecord {
  double axis_value = 0;
  bool ok = true;
  std::string error_type;
  std::string error_message;
  std::vector<double> p0;      // per-mode ground-state probability
  std::vector<double> energy;  // per-mode energy
  double zero_point = 0;
  std::vector<FitSummary> fits;  // per-mode marginal fits
};

std::vector<NModeRecord> run_nmode_sweep(const SweepConfig& cfg,
                                         const ModeReductiond& red,
                                         int threads = 0);

// ---- emission ----------------------------------------------------------

void emit_csv(const SweepResult& result, std::ostream& os);
std::string csv_string(const SweepResult& result);
void emit_nmode_csv(const std::vector<NModeRecord>& records, std::ostream& os);

std::string json_string(const SweepResult& result);
SweepResult parse_sweep_json(std::string_view text);

/// Field-wise equality (NaN-tolerant) for round-trip checks.
bool records_equal(const RunRecord& a, const RunRecord& b);

/// Deterministic ordered parallel map: fn(i) for i in [0, n), distributed
/// over a bounded pool; results must be written to independent slots.
void parallel_for(std::size_t n, int threads,
                  const std::function<void(std::size_t)>& fn);

std::uint64_t fnv1a_hash(std::string_view text);

}  // namespace qpr
