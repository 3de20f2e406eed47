#pragma once

#include <filesystem>
#include <istream>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "retract/config.hpp"
#include "retract/executive.hpp"

namespace retract::harness {

enum class ScenarioMode { Normal, IgnoreAps, NoForceLimit };

std::string_view mode_name(ScenarioMode m);
std::optional<ScenarioMode> parse_mode(std::string_view s);

/// Applies a mode on top of a base configuration.
Config configure(Config base, ScenarioMode mode);

struct BatchSpec {
  int runs = 25;
  std::vector<int> grid_values{7};
  std::vector<double> ap_fractions{50.0};
  ScenarioMode mode = ScenarioMode::Normal;
  unsigned long long base_seed = 0;
  Config base;
  int jobs = 1;
  bool record_timing = true;
  std::optional<std::filesystem::path> out_dir;  // metrics.csv, summary.json, run_*/
  bool vtk = false;

  void validate() const;  // throws std::invalid_argument
};

struct MetricsRow {
  unsigned long long seed = 0;
  int n = 0;
  double ap_fraction = 0.0;
  std::string mode;
  double final_visibility = 0.0;
  int replans = 0;
  std::vector<std::string> replan_causes;
  double max_force = 0.0;
  double planning_time_initial = 0.0;
  std::vector<double> replanning_times;
  std::string outcome;

  friend bool operator==(const MetricsRow&, const MetricsRow&) = default;
};

inline constexpr const char* kMetricsHeader =
    "seed,N,f_%,mode,final_visibility,replans,replan_causes,max_force,planning_time_initial,"
    "replanning_times,outcome";

MetricsRow metrics_row(const exec::RunReport& report, unsigned long long seed, const Config& config,
                       ScenarioMode mode);

void write_metrics_csv(std::ostream& out, const std::vector<MetricsRow>& rows);
/// Throws std::runtime_error on a malformed header or row.
std::vector<MetricsRow> read_metrics_csv(std::istream& in);

struct BatchResult {
  std::vector<MetricsRow> rows;
  std::vector<exec::RunReport> reports;  // same order as rows
  nlohmann::json summary;
};

/// Rows ordered by (N, f_%, seed). Runs may execute on spec.jobs workers;
/// files are written afterwards in row order.
BatchResult run_batch(const BatchSpec& spec);

nlohmann::json summarize(const std::vector<MetricsRow>& rows, const std::vector<exec::RunReport>& reports);

double median(std::vector<double> v);

}  // namespace retract::harness
