#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "faris/ao_driver.hpp"
#include "faris/oracle.hpp"

namespace faris {

enum class Mode { kFaris, kFrisMode, kArisMode, kBfs };
enum class SweepVar { kNone, kTxPowerDbm, kM, kWx };

std::string to_string(Mode mode);
std::string to_string(SweepVar var);
Mode parse_mode(const std::string& text);
SweepVar parse_sweep_var(const std::string& text);

/// Everything a single trial needs apart from its seed and sweep value.
struct ExperimentBase {
  SurfaceGeometry geom;
  SystemParamsDb system;
  int m_o = 9;
  OuterConfig outer;
  BfsConfig bfs;
};

struct Scenario {
  std::string name;
  SweepVar sweep_var = SweepVar::kNone;
  std::vector<double> sweep_values{0.0};
  int trials = 1;
  Mode mode = Mode::kFaris;
  std::uint64_t master_seed = 1;
  ExperimentBase base;
  int threads = 1;

  void validate() const;
};

struct ResultRow {
  std::string scenario;
  Mode mode = Mode::kFaris;
  SweepVar sweep_var = SweepVar::kNone;
  double sweep_value = 0.0;
  int trial = 0;
  std::uint64_t seed = 0;
  double rate = 0.0;
  int outer_iters = 0;
  double wall_time_s = 0.0;
  bool error = false;
  std::string error_message;
};

struct SweepPointSummary {
  double value = 0.0;
  double mean = 0.0;
  double stddev = 0.0;
  int trials = 0;
  int errors = 0;
};

struct ScenarioSummary {
  std::string scenario;
  Mode mode = Mode::kFaris;
  SweepVar sweep_var = SweepVar::kNone;
  std::vector<SweepPointSummary> points;
  std::vector<ResultRow> rows;
};

/// Exact CSV header of the result-row schema.
const std::string& csv_header();
/// One CSV line (no newline). Error rows carry rate "nan" and outer_iters -1.
std::string format_row(const ResultRow& row);

/// Applies the sweep variable to the base configuration.
ExperimentBase apply_sweep(const ExperimentBase& base, SweepVar var, double value);

/// The M_o ports of a centred block (⌈√M_o⌉ wide, filled row-major).
PortSelection centered_block(const SurfaceGeometry& geom, int m_o);

struct TrialOutcome {
  double rate = 0.0;
  int outer_iters = 0;
  OuterResult detail;  // empty for the BFS mode
};

/// Runs one mode on the trial's channel realization (channel seed derived from
/// `seed` alone, so every mode sees the same draws).
TrialOutcome run_trial(const ExperimentBase& base, Mode mode, std::uint64_t seed);

/// Runs every (sweep value, trial) pair, trial seed = master_seed + trial.
/// Failures become error rows. Rows are written to `csv` (header first) in
/// (sweep value, trial) order whatever the thread count.
ScenarioSummary run_scenario(const Scenario& sc, std::ostream* csv = nullptr);

std::string summary_json(const ScenarioSummary& summary);

struct GapCdfPoint {
  double gap = 0.0;
  double cdf = 0.0;
};

/// Paired per-trial differences rate(a) − rate(b), sorted, with cumulative
/// fractions. Both row sets must cover the same (sweep value, trial, seed) keys.
std::vector<GapCdfPoint> gap_cdf(const std::vector<ResultRow>& a, const std::vector<ResultRow>& b);

struct BootstrapInterval {
  double mean = 0.0;
  double lower = 0.0;
  double upper = 0.0;
};

/// Percentile bootstrap interval for the mean.
BootstrapInterval bootstrap_mean(const std::vector<double>& values, double confidence,
                                 int resamples, std::uint64_t seed);

}  // namespace faris
