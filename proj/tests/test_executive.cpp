#include <doctest.h>

#include <sstream>

#include "retract/executive.hpp"

using namespace retract;
using namespace retract::exec;

namespace {

TraceEvent failure_event(long tick, const char* cause) {
  return {tick, "failure", {{"cause", cause}, {"lift_offset", 1.0}}};
}

Config lateral_config() {
  Config c;
  c.ap_roi_clearance = 5.0;
  c.w_ap = 2;
  c.w_roi = 1;
  return c;
}

}  // namespace

TEST_CASE("names round trip") {
  for (Outcome o : {Outcome::Success, Outcome::NoPlan, Outcome::StepBudgetExceeded, Outcome::SolverFailure,
                    Outcome::GraspFailure, Outcome::Error})
    CHECK(parse_outcome(outcome_name(o)) == o);
  for (ReplanCause c : {ReplanCause::ForceAtGrasp, ReplanCause::ForceDuringPull, ReplanCause::HeightExhausted})
    CHECK(parse_cause(cause_name(c)) == c);
  CHECK(cause_name(ReplanCause::ForceAtGrasp) == "force-at-grasp");
  CHECK(outcome_name(Outcome::NoPlan) == "no-plan");
  CHECK_FALSE(parse_cause("tear").has_value());
}

TEST_CASE("failure classification by lift offset") {
  CHECK(classify_force_failure(2.0) == ReplanCause::ForceAtGrasp);
  CHECK(classify_force_failure(5.0) == ReplanCause::ForceAtGrasp);
  CHECK(classify_force_failure(5.5) == ReplanCause::ForceDuringPull);
  CHECK(classify_force_failure(30.0) == ReplanCause::ForceDuringPull);

  std::vector<TraceEvent> trace{{0, "plan", nlohmann::json::object()}};
  CHECK_THROWS_AS(classify_replan(trace), std::invalid_argument);
  trace.push_back(failure_event(10, "force-at-grasp"));
  CHECK(classify_replan(trace) == ReplanCause::ForceAtGrasp);
  trace.push_back(failure_event(40, "height-exhausted"));
  CHECK(classify_replan(trace) == ReplanCause::HeightExhausted);
}

TEST_CASE("scenario classes") {
  RunReport r;
  r.outcome = Outcome::Success;
  CHECK(is_straight_success(r));
  CHECK_FALSE(is_lateral_recovery(r));

  r.replans = 1;
  r.failures.push_back({20, Arm::Psm1, BlockId{4}, 12.0, 0.52, 0.48, ReplanCause::ForceDuringPull});
  r.executed.push_back({30, 1, {ActionKind::Move, Arm::Psm1, BlockId{5}, 0}, true});
  CHECK_FALSE(is_straight_success(r));
  CHECK(is_lateral_recovery(r));
  CHECK_FALSE(is_regrasp_recovery(r));
  r.outcome = Outcome::NoPlan;
  CHECK_FALSE(is_lateral_recovery(r));

  RunReport c;
  c.outcome = Outcome::Success;
  c.replans = 1;
  c.failures.push_back({20, Arm::Psm2, BlockId{4}, 2.0, 0.6, 0.3, ReplanCause::ForceAtGrasp});
  c.executed.push_back({21, 1, {ActionKind::Release, Arm::Psm2, std::nullopt, 0}, true});
  CHECK_FALSE(is_regrasp_recovery(c));
  c.executed.push_back({40, 1, {ActionKind::Grasp, Arm::Psm2, BlockId{9}, 2}, true});
  CHECK(is_regrasp_recovery(c));
}

TEST_CASE("straight retraction") {
  Config c;
  RunOptions o;
  o.record_timing = false;
  const RunReport r = run_task(c, 3, o);
  CHECK(r.outcome == Outcome::Success);
  CHECK(r.replans == 0);
  CHECK(r.final_visibility > c.delta);
  CHECK(is_straight_success(r));
  CHECK(r.max_residual < 1e-6);
  REQUIRE(r.planning_times.size() == 1);
  CHECK(r.planning_times[0] == 0.0);
  REQUIRE(r.executed.size() >= 3);
  CHECK(r.executed[0].action.kind == ActionKind::Reach);
  CHECK(r.executed[1].action.kind == ActionKind::Grasp);
  CHECK(r.executed[2].action.kind == ActionKind::Pull);
  CHECK(r.trace.front().kind == "fluents");
  CHECK(r.trace.back().kind == "metrics");
  // the gate stops the pull within one step of crossing the limit
  for (const auto& f : r.failures) {
    CHECK(f.force >= c.epsilon);
    CHECK(f.force_before < c.epsilon);
  }
  CHECK(r.max_force_seen <= c.epsilon + (r.failures.empty() ? 0.0 : r.failures[0].force - r.failures[0].force_before));

  const auto j = report_json(r);
  CHECK(j.at("outcome") == "success");
  CHECK(j.at("replans") == 0);
  CHECK(j.contains("failures"));
}

TEST_CASE("interrupted pull recovered laterally") {
  const RunReport r = run_task(lateral_config(), 2);
  CHECK(r.outcome == Outcome::Success);
  CHECK(r.replans == 1);
  REQUIRE(r.causes.size() == 1);
  CHECK(r.causes[0] == ReplanCause::ForceDuringPull);
  CHECK(is_lateral_recovery(r));
  CHECK(r.final_visibility > 0.7);
  REQUIRE(r.planning_times.size() == 2);
}

TEST_CASE("first grasp near attachments is replaced") {
  Config c = lateral_config();
  c.ignore_aps = true;
  const RunReport r = run_task(c, 14);
  CHECK(r.outcome == Outcome::Success);
  REQUIRE(r.grasps.size() == 2);
  CHECK(r.grasps[1].block != r.grasps[0].block);
  CHECK(r.grasps[1].min_ap_distance.value() > r.grasps[0].min_ap_distance.value());
  bool released = false;
  for (const auto& e : r.executed) released = released || e.action.kind == ActionKind::Release;
  CHECK(released);
}

TEST_CASE("trace is reproducible without timing") {
  Config c;
  RunOptions o;
  o.record_timing = false;
  std::ostringstream a, b;
  write_trace_jsonl(a, run_task(c, 5, o).trace);
  write_trace_jsonl(b, run_task(c, 5, o).trace);
  CHECK(a.str() == b.str());
  CHECK(a.str().find("\"kind\":\"history\"") != std::string::npos);
}

TEST_CASE("without the limit the pull runs to full height") {
  Config c;
  c.force_limit_enabled = false;
  const RunReport r = run_task(c, 3);
  CHECK(r.failures.empty());
  CHECK(r.outcome == Outcome::Success);
  CHECK(r.max_force_seen > c.epsilon);
}
