#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "spellkit/diagnostics.hpp"
#include "spellkit/extraction.hpp"
#include "spellkit/gof.hpp"
#include "spellkit/methods.hpp"
#include "spellkit/types.hpp"

namespace spellkit {

struct PipelineConfig {
  std::filesystem::path input;
  std::filesystem::path out_dir;  // empty: compute only, write nothing
  std::string station;            // default: input file stem

  double threshold = 1.0;
  enum class Seasons { year, s1, s2, all } seasons = Seasons::all;
  enum class MethodChoice { dm, im, both } method = MethodChoice::both;
  std::uint64_t seed = 0;
  int replicates = 3000;
  double alpha = 0.05;
  bool smooth_outliers = false;
  bool allow_negative_s = false;
};

struct GofSummary {
  double chi2_ref = 0.0;
  double p_value = 1.0;
  int replicates = 0;
  bool smoothed = false;
};

struct MethodReport {
  Method method = Method::dm;
  ModelBundle bundle;
  std::map<Variable, GofSummary> gof;
  std::map<Variable, QuantilePair> q99;
  double see_q99 = 0.0;
};

struct PeriodReport {
  std::string period;
  Extraction samples;
  std::map<Variable, SummaryStats> stats;
  std::map<Variable, TrendResult> trends;  // it, ws, ds
  std::map<Variable, RatioSeries> ratios;
  std::vector<CumFreqPoint> ws_wch_ratio;
  std::vector<CumFreqPoint> ds_dch_ratio;
  std::vector<MethodReport> methods;
  std::vector<std::string> notes;
  std::vector<std::string> errors;    // failures that aborted this period
  bool data_error = false;            // at least one error was a data problem
};

struct StationReport {
  std::string schema_version = "1";
  std::string station;
  PipelineConfig config;
  std::vector<std::string> warnings;
  std::vector<PeriodReport> periods;
  bool complete = true;  // false when any period recorded an error
};

/// Full orchestration: parse, threshold, extract per period, run the
/// requested methods, test every variable's law against its sample, and
/// collect diagnostics. Deterministic given (input, seed). Input and
/// configuration problems throw; a failure inside one period (for
/// example a refused fit) is recorded in that period's errors, the
/// report is marked incomplete, and the remaining periods still run.
/// When config.out_dir is set, writes report.json and the plot-ready
/// tables.
StationReport run_pipeline(const PipelineConfig& config);

/// Serialized report, fixed key order; byte-identical across runs and
/// thread counts for the same inputs and seed.
std::string report_to_json(const StationReport& report);

/// Tidy tables (one row per point) for the standard plots: survival
/// ratio series, cumulative-frequency ratios, empirical-vs-fitted
/// curves, per-method absolute differences, and quantile comparisons.
void emit_plot_tables(const StationReport& report,
                      const std::filesystem::path& out_dir);

/// Extracted samples as CSV rows (station, period, variable, value).
void write_samples_csv(const StationReport& report,
                       const std::filesystem::path& path);

}  // namespace spellkit
