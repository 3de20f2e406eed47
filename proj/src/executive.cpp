#include "retract/executive.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "retract/awareness.hpp"
#include "retract/grid.hpp"
#include "retract/motion.hpp"
#include "retract/reasoner.hpp"
#include "retract/scenario.hpp"
#include "retract/sim.hpp"

namespace retract::exec {

using nlohmann::json;

std::string_view outcome_name(Outcome o) {
  switch (o) {
    case Outcome::Success: return "success";
    case Outcome::NoPlan: return "no-plan";
    case Outcome::StepBudgetExceeded: return "step-budget-exceeded";
    case Outcome::SolverFailure: return "solver-failure";
    case Outcome::GraspFailure: return "grasp-failure";
    case Outcome::Error: return "error";
  }
  return "?";
}

std::string_view cause_name(ReplanCause c) {
  switch (c) {
    case ReplanCause::ForceAtGrasp: return "force-at-grasp";
    case ReplanCause::ForceDuringPull: return "force-during-pull";
    case ReplanCause::HeightExhausted: return "height-exhausted";
  }
  return "?";
}

std::optional<Outcome> parse_outcome(std::string_view s) {
  for (Outcome o : {Outcome::Success, Outcome::NoPlan, Outcome::StepBudgetExceeded, Outcome::SolverFailure,
                    Outcome::GraspFailure, Outcome::Error})
    if (outcome_name(o) == s) return o;
  return std::nullopt;
}

std::optional<ReplanCause> parse_cause(std::string_view s) {
  for (ReplanCause c : {ReplanCause::ForceAtGrasp, ReplanCause::ForceDuringPull, ReplanCause::HeightExhausted})
    if (cause_name(c) == s) return c;
  return std::nullopt;
}

ReplanCause classify_force_failure(double lift_offset) {
  return lift_offset <= kGraspOnsetMm ? ReplanCause::ForceAtGrasp : ReplanCause::ForceDuringPull;
}

ReplanCause classify_replan(const std::vector<TraceEvent>& trace) {
  for (auto it = trace.rbegin(); it != trace.rend(); ++it) {
    if (it->kind != "failure") continue;
    if (auto c = parse_cause(it->payload.at("cause").get<std::string>())) return *c;
  }
  throw std::invalid_argument("trace holds no failure event");
}

namespace {

json action_json(const Action& a) {
  return {{"action", to_string(a)},
          {"kind", action_kind_name(a.kind)},
          {"arm", arm_name(a.arm)},
          {"block", a.block ? json(a.block->value) : json(nullptr)},
          {"t", a.timestep}};
}

double max_of(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, x);
  return m;
}

class Runner {
 public:
  Runner(const Config& config, unsigned long long seed, const RunOptions& options)
      : cfg_(config), opt_(options), grid_(make_grid(config)), mesh_(fem::mesh_from(config)),
        material_(fem::material_from(config)) {
    const Scenario sc = generate_scenario(config, seed);
    roi_ = sc.roi;
    state_ = fem::make_rest_state(mesh_, fem::attachment_nodes(mesh_, sc.patches));
    solve();
    env_ = fem::env_snapshot(state_, mesh_, roi_);
    close_ = sa::init_close_set(env_, cfg_);
    tracker_ = sa::BlockTracker::from_rest(env_, grid_);
    robot_.arm_pos = {Vec3(0.0, -40.0, 40.0), Vec3(0.0, 40.0, 40.0)};
    robot_.jaw_deg = {cfg_.gripper_open_deg, cfg_.gripper_open_deg};
  }

  RunReport run() {
    try {
      loop();
    } catch (const fem::SolverError& e) {
      finish(Outcome::SolverFailure, e.what());
    } catch (const fem::GraspError& e) {
      finish(Outcome::GraspFailure, e.what());
    } catch (const motion::MotionError& e) {
      finish(Outcome::NoPlan, e.what());
    }
    return std::move(r_);
  }

 private:
  enum class Step { Continue, Replan, Done };

  void emit(std::string kind, json payload) { r_.trace.push_back({tick_, std::move(kind), std::move(payload)}); }

  void solve() {
    state_ = fem::solve_equilibrium(std::move(state_), mesh_, material_);
    r_.max_residual = std::max(r_.max_residual, state_.residual);
    ++r_.solves;
  }

  double visibility() const { return sa::roi_visibility(env_, close_, cfg_); }

  void refresh() {
    env_ = fem::env_snapshot(state_, mesh_, roi_);
    const double f = max_of(env_.sigma);
    last_force_ = force_;
    force_ = f;
    r_.max_force_seen = std::max(r_.max_force_seen, f);
  }

  void tick() {
    ++tick_;
    ++r_.ticks;
    if (opt_.vtk_dir) {
      char name[32];
      std::snprintf(name, sizeof name, "step_%06ld.vtk", tick_);
      std::ofstream out(*opt_.vtk_dir / name);
      if (!out) throw std::runtime_error("cannot write " + (*opt_.vtk_dir / name).string());
      fem::write_vtk(out, state_, mesh_);
    }
  }

  void finish(Outcome o, std::string detail) {
    r_.final_visibility = visibility();
    if (o == Outcome::Success && !(r_.final_visibility > cfg_.delta)) o = Outcome::NoPlan;
    r_.outcome = o;
    r_.detail = std::move(detail);
    std::vector<std::string> causes;
    for (auto c : r_.causes) causes.emplace_back(cause_name(c));
    emit("metrics", {{"outcome", outcome_name(r_.outcome)},
                     {"detail", r_.detail},
                     {"final_visibility", r_.final_visibility},
                     {"replans", r_.replans},
                     {"replan_causes", causes},
                     {"max_force", r_.max_force_seen},
                     {"ticks", r_.ticks}});
  }

  sa::FluentSet fluents() const {
    sa::FluentSet f = sa::compute_fluents(env_, robot_, close_, tracker_, grid_, cfg_);
    f.max_height = max_height_;
    return f;
  }

  void loop() {
    for (int cycle = 0; cycle < cfg_.max_cycles; ++cycle) {
      const sa::FluentSet f = fluents();
      emit("fluents", {{"cycle", cycle}, {"visibility", visibility()}, {"atoms", f.atoms()}});
      if (f.visible_roi) return finish(Outcome::Success, "roi visible");
      if (cycle > 0) {
        ++r_.replans;
        if (pending_) r_.causes.push_back(*pending_);
      }
      pending_.reset();

      const auto t0 = std::chrono::steady_clock::now();
      const auto program =
          reasoner::ground_domain(grid_, f, cfg_.horizon, reasoner::weights_for(cfg_, cycle == 0));
      const auto plan = reasoner::solve(program);
      const std::chrono::duration<double> dt = std::chrono::steady_clock::now() - t0;
      r_.planning_times.push_back(opt_.record_timing ? dt.count() : 0.0);

      json acts = json::array();
      for (const auto& a : plan.actions) acts.push_back(to_string(a));
      emit("plan", {{"cycle", cycle},
                    {"found", plan.found},
                    {"actions", acts},
                    {"objective", plan.objective_value},
                    {"goal_block", plan.goal_block ? json(plan.goal_block->value) : json(nullptr)},
                    {"candidates", program.candidate_count()},
                    {"violated", plan.violated}});
      std::vector<std::string> lines;
      std::istringstream hs(reasoner::render_history(plan, program));
      for (std::string line; std::getline(hs, line);) lines.push_back(line);
      emit("history", {{"cycle", cycle}, {"lines", lines}});
      if (!plan.found) return finish(Outcome::NoPlan, "no plan: " + plan.violated);

      fixed_ = f.fixed;
      Step step = Step::Continue;
      for (const Action& a : plan.actions) {
        step = execute(a, cycle);
        if (step != Step::Continue) break;
      }
      if (step == Step::Done) return;
    }
    const sa::FluentSet f = fluents();
    if (f.visible_roi) return finish(Outcome::Success, "roi visible");
    finish(Outcome::StepBudgetExceeded, "re-plan cycle cap reached");
  }

  // Returns Done when the run ended, Replan when the remaining plan is abandoned.
  Step execute(const Action& a, int cycle) {
    const auto arm = index(a.arm);
    emit("action-start", {{"cycle", cycle}, {"action", action_json(a)}});
    r_.executed.push_back({tick_, cycle, a, false});
    auto& record = r_.executed.back();

    const auto target = sa::compute_target(a, robot_, grid_, cfg_);
    const auto prim = motion::primitive_for(a, target, robot_, cfg_);

    if (const auto* g = std::get_if<motion::GripperCommand>(&prim)) {
      robot_.jaw_deg[arm] = g->target_jaw_deg;
      if (a.kind == ActionKind::Grasp) {
        state_ = fem::attach_grasp(std::move(state_), mesh_, a.arm, robot_.arm_pos[arm], cfg_.grasp_radius);
        r_.grasps.push_back({tick_, cycle, a.arm, *a.block, reasoner::min_ap_distance(*a.block, grid_, fixed_)});
        solve();
      } else {
        state_ = fem::release_grasp(std::move(state_), mesh_, material_, a.arm);
        r_.max_residual = std::max(r_.max_residual, state_.residual);
        ++r_.solves;
        max_height_[arm] = false;
      }
      tick();
      refresh();
      record.completed = true;
      emit("action-end", {{"cycle", cycle}, {"action", to_string(a)}, {"completed", true},
                          {"visibility", visibility()}, {"max_force", force_}});
      return Step::Continue;
    }

    const auto& tr = std::get<motion::Trajectory>(prim);
    const bool lifting = a.kind == ActionKind::Pull;
    const bool exposing = a.kind == ActionKind::Pull || a.kind == ActionKind::Move;
    const double start_z = robot_.arm_pos[arm].z();
    const bool gated = a.kind == ActionKind::Move && cfg_.force_limit_enabled;
    for (const Vec3& wp : tr.waypoints) {
      if (gated && state_.grasping(a.arm)) {
        // solve ahead and keep the previous pose if the step would breach the limit
        fem::SimState trial = fem::solve_equilibrium(fem::move_tool(state_, a.arm, wp), mesh_, material_);
        r_.max_residual = std::max(r_.max_residual, trial.residual);
        ++r_.solves;
        const double f = max_of(fem::env_snapshot(trial, mesh_, roi_).sigma);
        if (f >= cfg_.epsilon && f > force_) {
          emit("action-end", {{"cycle", cycle}, {"action", to_string(a)}, {"completed", false},
                              {"visibility", visibility()}, {"max_force", force_}, {"blocked_force", f}});
          finish(Outcome::NoPlan, "move blocked by the force limit");
          return Step::Done;
        }
        state_ = std::move(trial);
        robot_.arm_pos[arm] = wp;
      } else {
        robot_.arm_pos[arm] = wp;
        if (state_.grasping(a.arm)) {
          state_ = fem::move_tool(std::move(state_), a.arm, wp);
          solve();
        }
      }
      tick();
      refresh();
      if (lifting && cfg_.force_limit_enabled && sa::check_failure(env_, cfg_)) {
        const double lift = wp.z() - start_z;
        const ReplanCause cause = classify_force_failure(lift);
        r_.failures.push_back({tick_, a.arm, *a.block, lift, force_, last_force_, cause});
        pending_ = cause;
        max_height_[arm] = true;
        emit("failure", {{"cycle", cycle},
                         {"action", to_string(a)},
                         {"cause", cause_name(cause)},
                         {"lift_offset", lift},
                         {"force", force_},
                         {"force_before", last_force_}});
        emit("action-end", {{"cycle", cycle}, {"action", to_string(a)}, {"completed", false},
                            {"visibility", visibility()}, {"max_force", force_}});
        return Step::Replan;
      }
      if (a.kind == ActionKind::Move && visibility() > cfg_.delta) break;
    }
    record.completed = true;
    emit("action-end", {{"cycle", cycle}, {"action", to_string(a)}, {"completed", true},
                        {"visibility", visibility()}, {"max_force", force_}});
    if (!exposing) return Step::Continue;
    if (fluents().visible_roi) {
      finish(Outcome::Success, "roi visible");
      return Step::Done;
    }
    if (a.kind == ActionKind::Move) {
      finish(Outcome::NoPlan, "move completed without exposing the roi");
      return Step::Done;
    }
    const double lift = robot_.arm_pos[arm].z() - start_z;
    r_.failures.push_back({tick_, a.arm, *a.block, lift, force_, last_force_, ReplanCause::HeightExhausted});
    pending_ = ReplanCause::HeightExhausted;
    max_height_[arm] = true;
    emit("failure", {{"cycle", cycle},
                     {"action", to_string(a)},
                     {"cause", cause_name(ReplanCause::HeightExhausted)},
                     {"lift_offset", lift},
                     {"force", force_},
                     {"force_before", last_force_}});
    return Step::Replan;
  }

  const Config& cfg_;
  const RunOptions& opt_;
  BlockGrid grid_;
  fem::FemMesh mesh_;
  fem::Material material_;
  Vec3 roi_ = Vec3::Zero();
  fem::SimState state_;
  EnvState env_;
  sa::CloseSet close_;
  sa::BlockTracker tracker_;
  RobotState robot_;
  std::array<bool, 2> max_height_{false, false};
  std::optional<ReplanCause> pending_;
  std::vector<bool> fixed_;
  long tick_ = 0;
  double force_ = 0.0;
  double last_force_ = 0.0;
  RunReport r_;
};

}  // namespace

RunReport run_task(const Config& config, unsigned long long seed, const RunOptions& options) {
  config.validate();
  Config c = config;
  c.seed = seed;
  return Runner(c, seed, options).run();
}

void write_trace_jsonl(std::ostream& out, const std::vector<TraceEvent>& trace) {
  for (const auto& e : trace) {
    json line = {{"tick", e.tick}, {"kind", e.kind}, {"payload", e.payload}};
    out << line.dump() << '\n';
  }
}

json report_json(const RunReport& r) {
  std::vector<std::string> causes;
  for (auto c : r.causes) causes.emplace_back(cause_name(c));
  json failures = json::array();
  for (const auto& f : r.failures)
    failures.push_back({{"tick", f.tick},
                        {"arm", arm_name(f.arm)},
                        {"block", f.block.value},
                        {"lift_offset", f.lift_offset},
                        {"force", f.force},
                        {"force_before", f.force_before},
                        {"cause", cause_name(f.cause)}});
  json grasps = json::array();
  for (const auto& g : r.grasps)
    grasps.push_back({{"tick", g.tick},
                      {"cycle", g.cycle},
                      {"arm", arm_name(g.arm)},
                      {"block", g.block.value},
                      {"min_ap_distance", g.min_ap_distance ? json(*g.min_ap_distance) : json(nullptr)}});
  json executed = json::array();
  for (const auto& e : r.executed)
    executed.push_back({{"tick", e.tick}, {"cycle", e.cycle}, {"action", to_string(e.action)}, {"completed", e.completed}});
  return {{"outcome", outcome_name(r.outcome)},
          {"detail", r.detail},
          {"final_visibility", r.final_visibility},
          {"replans", r.replans},
          {"replan_causes", causes},
          {"max_force_seen", r.max_force_seen},
          {"planning_times", r.planning_times},
          {"failures", failures},
          {"grasps", grasps},
          {"executed", executed},
          {"max_residual", r.max_residual},
          {"solves", r.solves},
          {"ticks", r.ticks}};
}

bool is_straight_success(const RunReport& r) { return r.outcome == Outcome::Success && r.replans == 0; }

bool is_lateral_recovery(const RunReport& r) {
  if (r.outcome != Outcome::Success) return false;
  for (const auto& f : r.failures) {
    if (f.cause != ReplanCause::ForceDuringPull) continue;
    for (const auto& e : r.executed)
      if (e.tick >= f.tick && e.action.kind == ActionKind::Move && e.action.arm == f.arm && e.completed) return true;
  }
  return false;
}

bool is_regrasp_recovery(const RunReport& r) {
  if (r.outcome != Outcome::Success) return false;
  for (const auto& f : r.failures) {
    if (f.cause != ReplanCause::ForceAtGrasp) continue;
    bool released = false;
    for (const auto& e : r.executed) {
      if (e.tick < f.tick) continue;
      if (e.action.kind == ActionKind::Release && e.action.arm == f.arm && e.completed) released = true;
      if (released && e.action.kind == ActionKind::Grasp && e.completed) return true;
    }
  }
  return false;
}

}  // namespace retract::exec
