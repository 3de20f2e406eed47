#include <limits>
#include <stdexcept>

#include "retract/reasoner.hpp"

// Exhaustive reference planner. Deliberately shares no transition code with
// the branch-and-bound search in reasoner.cpp.

namespace retract::reasoner {

namespace {

struct World {
  std::optional<int> at[2];
  std::optional<int> hand[2];
  bool closed[2] = {false, false};
  bool top[2] = {false, false};
  bool visible = false;
};

struct Ground {
  const DomainProgram* p = nullptr;
  std::vector<Action> universe;  // every syntactic action, in key order
};

bool pre(const World& w, const Action& a, const DomainProgram& p) {
  const int i = a.arm == Arm::Psm1 ? 0 : 1;
  const int j = 1 - i;
  const int b = a.block ? a.block->value : -1;
  if (a.kind == ActionKind::Release) return w.closed[i];
  if (a.kind == ActionKind::Reach)
    return !w.closed[i] && p.externals.reachable[static_cast<std::size_t>(b)] == a.arm;
  if (a.kind == ActionKind::Grasp) return !w.closed[i] && w.at[i] == b && !w.hand[j];
  if (a.kind == ActionKind::Pull) return w.hand[i] == b && !w.top[i];
  // move
  return w.hand[i] && *w.hand[i] != b && w.top[i] && p.externals.above_roi && p.externals.above_roi->value == b;
}

World post(World w, const Action& a) {
  const int i = a.arm == Arm::Psm1 ? 0 : 1;
  switch (a.kind) {
    case ActionKind::Reach: w.at[i] = a.block->value; break;
    case ActionKind::Grasp:
      w.closed[i] = true;
      w.hand[i] = a.block->value;
      break;
    case ActionKind::Release:
      w.closed[i] = false;
      w.hand[i].reset();
      w.top[i] = false;
      break;
    default: w.visible = true; break;
  }
  return w;
}

long long score_of(int b, const DomainProgram& p) {
  const auto& fixed = p.externals.fixed;
  long long ap = 0;
  bool any = false;
  if (p.weights.objective == ObjectiveKind::Min) {
    long long best = std::numeric_limits<long long>::max();
    for (int k = 0; k < p.num_blocks; ++k)
      if (fixed[static_cast<std::size_t>(k)]) {
        any = true;
        best = std::min<long long>(best, p.dist(BlockId{b}, BlockId{k}));
      }
    ap = any ? best : 0;
  } else {
    std::vector<bool> used;
    for (int k = 0; k < p.num_blocks; ++k) {
      if (!fixed[static_cast<std::size_t>(k)]) continue;
      const int d = p.dist(BlockId{b}, BlockId{k});
      if (static_cast<int>(used.size()) <= d) used.resize(static_cast<std::size_t>(d) + 1, false);
      if (!used[static_cast<std::size_t>(d)]) {
        used[static_cast<std::size_t>(d)] = true;
        ap += d;
      }
    }
  }
  const long long roi = p.externals.above_roi ? p.dist(BlockId{b}, *p.externals.above_roi) : 0;
  return p.weights.w_ap * ap - p.weights.w_roi * roi;
}

struct Best {
  bool have = false;
  bool satisfied_initially = false;
  long long score = 0;
  std::vector<Action> plan;
  std::optional<int> goal;
};

// True when candidate (score, plan) beats best.
bool improves(const Best& best, long long score, const std::vector<Action>& plan) {
  if (!best.have) return true;
  if (score != best.score) return score > best.score;
  if (plan.size() != best.plan.size()) return plan.size() < best.plan.size();
  for (std::size_t k = 0; k < plan.size(); ++k) {
    if (action_key_less(plan[k], best.plan[k])) return true;
    if (action_key_less(best.plan[k], plan[k])) return false;
  }
  return false;
}

void enumerate(const Ground& g, const World& w, std::vector<Action>& plan, std::optional<int> goal,
               bool initially_visible, Best& best) {
  const DomainProgram& p = *g.p;
  if (w.visible) {
    const long long sc = initially_visible ? std::numeric_limits<long long>::max()
                                           : score_of(*goal, p);
    if (improves(best, sc, plan)) {
      best.have = true;
      best.score = sc;
      best.plan = plan;
      best.goal = goal;
    }
  }
  if (static_cast<int>(plan.size()) == p.horizon) return;
  const int t = static_cast<int>(plan.size());
  for (Action a : g.universe) {
    if (!pre(w, a, p)) continue;
    a.timestep = t;
    std::optional<int> g2 = goal;
    if (!w.visible && (a.kind == ActionKind::Pull || a.kind == ActionKind::Move))
      g2 = w.hand[a.arm == Arm::Psm1 ? 0 : 1];
    plan.push_back(a);
    enumerate(g, post(w, a), plan, g2, initially_visible, best);
    plan.pop_back();
  }
}

}  // namespace

PlanResult brute_force_oracle(const DomainProgram& program) {
  if (program.num_blocks > 9 || program.horizon > 4)
    throw std::invalid_argument("brute_force_oracle: instance too large");
  const auto start = std::chrono::steady_clock::now();

  Ground g;
  g.p = &program;
  for (Arm a : kArms) g.universe.push_back({ActionKind::Release, a, std::nullopt, 0});
  for (int b = 0; b < program.num_blocks; ++b)
    for (Arm a : kArms)
      for (ActionKind k : {ActionKind::Reach, ActionKind::Grasp, ActionKind::Pull, ActionKind::Move})
        g.universe.push_back({k, a, BlockId{b}, 0});

  World w;
  const auto& f = program.externals;
  for (int i = 0; i < 2; ++i) {
    if (f.at[static_cast<std::size_t>(i)]) w.at[i] = f.at[static_cast<std::size_t>(i)]->value;
    if (f.in_hand[static_cast<std::size_t>(i)]) w.hand[i] = f.in_hand[static_cast<std::size_t>(i)]->value;
    w.closed[i] = f.closed_gripper[static_cast<std::size_t>(i)];
    w.top[i] = f.max_height[static_cast<std::size_t>(i)];
  }
  w.visible = f.visible_roi;

  Best best;
  std::vector<Action> plan;
  enumerate(g, w, plan, std::nullopt, w.visible, best);

  PlanResult r;
  if (best.have) {
    r.found = true;
    r.actions = best.plan;
    if (best.goal) {
      r.goal_block = BlockId{*best.goal};
      r.objective_value = best.score;
    }
  } else {
    r.violated = "visible_roi at t=" + std::to_string(program.horizon);
  }
  // History in the same form as solve so results compare field by field.
  World cur = w;
  auto to_state = [](const World& x) {
    SymbolicState s;
    for (int i = 0; i < 2; ++i) {
      const auto k = static_cast<std::size_t>(i);
      if (x.at[i]) s.at[k] = BlockId{*x.at[i]};
      if (x.hand[i]) s.in_hand[k] = BlockId{*x.hand[i]};
      s.closed_gripper[k] = x.closed[i];
      s.max_height[k] = x.top[i];
    }
    s.visible_roi = x.visible;
    return s;
  };
  for (std::size_t t = 0; t < r.actions.size(); ++t) {
    r.history.push_back({static_cast<int>(t), to_state(cur), r.actions[t]});
    cur = post(cur, r.actions[t]);
  }
  r.history.push_back({static_cast<int>(r.actions.size()), to_state(cur), std::nullopt});
  r.solve_time = std::chrono::steady_clock::now() - start;
  return r;
}

}  // namespace retract::reasoner
