#pragma once

#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "retract/config.hpp"
#include "retract/types.hpp"

namespace retract::exec {

enum class Outcome { Success, NoPlan, StepBudgetExceeded, SolverFailure, GraspFailure, Error };
enum class ReplanCause { ForceAtGrasp, ForceDuringPull, HeightExhausted };

std::string_view outcome_name(Outcome o);
std::string_view cause_name(ReplanCause c);
std::optional<Outcome> parse_outcome(std::string_view s);
std::optional<ReplanCause> parse_cause(std::string_view s);

struct TraceEvent {
  long tick = 0;
  std::string kind;  // fluents | plan | history | action-start | action-end | failure | metrics
  nlohmann::json payload;
};

struct FailureRecord {
  long tick = 0;
  Arm arm = Arm::Psm1;
  BlockId block;
  double lift_offset = 0.0;   // mm above the pull start
  double force = 0.0;         // max sigma at the failure tick
  double force_before = 0.0;  // max sigma one control step earlier
  ReplanCause cause = ReplanCause::ForceDuringPull;
};

struct GraspRecord {
  long tick = 0;
  int cycle = 0;
  Arm arm = Arm::Psm1;
  BlockId block;
  std::optional<int> min_ap_distance;
};

struct ExecutedAction {
  long tick = 0;  // tick at action start
  int cycle = 0;
  Action action;
  bool completed = false;
};

struct RunReport {
  Outcome outcome = Outcome::NoPlan;
  std::string detail;
  double final_visibility = 0.0;
  int replans = 0;
  std::vector<ReplanCause> causes;
  double max_force_seen = 0.0;
  std::vector<double> planning_times;  // seconds: initial, then each re-plan
  std::vector<TraceEvent> trace;
  std::vector<FailureRecord> failures;
  std::vector<GraspRecord> grasps;
  std::vector<ExecutedAction> executed;
  double max_residual = 0.0;  // over every equilibrium solve
  long solves = 0;
  long ticks = 0;
};

struct RunOptions {
  std::optional<std::filesystem::path> vtk_dir;  // one snapshot per control tick
  bool record_timing = true;                     // false writes zero planning times
};

/// One closed-loop retraction: context, plan, execute and monitor, re-plan.
/// Deterministic in (config, seed) apart from the measured planning times.
RunReport run_task(const Config& config, unsigned long long seed, const RunOptions& options = {});

/// Cause of the most recent failure event in the trace. Throws
/// std::invalid_argument when the trace holds none.
ReplanCause classify_replan(const std::vector<TraceEvent>& trace);

/// Force-at-grasp when the lift offset is at most this many millimetres.
inline constexpr double kGraspOnsetMm = 5.0;
ReplanCause classify_force_failure(double lift_offset);

void write_trace_jsonl(std::ostream& out, const std::vector<TraceEvent>& trace);
nlohmann::json report_json(const RunReport& report);

// Scenario classes used by the experiment summaries.
bool is_straight_success(const RunReport& r);     // no re-plan
bool is_lateral_recovery(const RunReport& r);     // force during pull, then a move
bool is_regrasp_recovery(const RunReport& r);     // force at grasp, then release and re-grasp

}  // namespace retract::exec
