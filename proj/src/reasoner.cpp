#include "retract/reasoner.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <sstream>
#include <unordered_map>

namespace retract::reasoner {

Weights weights_for(const Config& config, bool initial_plan) {
  Weights w{config.w_ap, config.w_roi, config.objective};
  if (config.ignore_aps && initial_plan) w.w_ap = 0;
  return w;
}

SymbolicState initial_state(const sa::FluentSet& f) {
  SymbolicState s;
  s.at = f.at;
  s.in_hand = f.in_hand;
  s.closed_gripper = f.closed_gripper;
  s.max_height = f.max_height;
  s.visible_roi = f.visible_roi;
  return s;
}

std::size_t DomainProgram::candidate_count() const {
  std::size_t n = 0;
  for (const auto& c : candidates) n += c.size();
  return n;
}

std::optional<int> min_ap_distance(BlockId b, const BlockGrid& grid, const std::vector<bool>& fixed) {
  std::optional<int> best;
  for (int i = 0; i < grid.size(); ++i) {
    if (!fixed[static_cast<std::size_t>(i)]) continue;
    const int d = block_distance(grid, b, BlockId{i});
    if (!best || d < *best) best = d;
  }
  return best;
}

long long grasp_score(BlockId b, const BlockGrid& grid, const std::vector<bool>& fixed_blocks,
                      std::optional<BlockId> roi_block, int w_ap, int w_roi, ObjectiveKind objective) {
  long long ap_term = 0;
  if (objective == ObjectiveKind::Min) {
    ap_term = min_ap_distance(b, grid, fixed_blocks).value_or(0);
  } else {
    // Set semantics of the aggregate: each distinct distance value counts once.
    std::set<int> distinct;
    for (int i = 0; i < grid.size(); ++i)
      if (fixed_blocks[static_cast<std::size_t>(i)]) distinct.insert(block_distance(grid, b, BlockId{i}));
    for (int d : distinct) ap_term += d;
  }
  const long long roi_term = roi_block ? block_distance(grid, b, *roi_block) : 0;
  return static_cast<long long>(w_ap) * ap_term - static_cast<long long>(w_roi) * roi_term;
}

bool action_key_less(const Action& a, const Action& b) {
  const int ba = a.block ? a.block->value : -1;
  const int bb = b.block ? b.block->value : -1;
  if (ba != bb) return ba < bb;
  if (a.arm != b.arm) return a.arm < b.arm;
  return a.kind < b.kind;
}

namespace {

// Three-valued relaxation of the fluents at one timestep: every value a
// fluent may take under some choice of earlier actions.
struct Relaxed {
  int num_blocks = 0;
  // Value sets for functional fluents; index num_blocks stands for "none".
  std::array<std::vector<char>, 2> at, in_hand;
  std::array<std::array<char, 2>, 2> closed{}, max_height{};  // [arm][false/true]
  std::array<char, 2> visible{};

  explicit Relaxed(int nb) : num_blocks(nb) {
    for (auto* v : {&at, &in_hand})
      for (auto& x : *v) x.assign(static_cast<std::size_t>(nb + 1), 0);
  }
  static std::size_t slot(const std::optional<BlockId>& b, int nb) {
    return static_cast<std::size_t>(b ? b->value : nb);
  }
};

Relaxed relax_initial(const sa::FluentSet& f, int nb) {
  Relaxed r(nb);
  for (Arm a : kArms) {
    const auto i = index(a);
    r.at[i][Relaxed::slot(f.at[i], nb)] = 1;
    r.in_hand[i][Relaxed::slot(f.in_hand[i], nb)] = 1;
    r.closed[i][f.closed_gripper[i] ? 1 : 0] = 1;
    r.max_height[i][f.max_height[i] ? 1 : 0] = 1;
  }
  r.visible[f.visible_roi ? 1 : 0] = 1;
  return r;
}

std::vector<Action> ground_step(const Relaxed& r, const sa::FluentSet& ext, int t) {
  std::vector<Action> out;
  const int nb = r.num_blocks;
  if (!r.visible[0]) return out;  // goal already certain
  for (int b = 0; b < nb; ++b) {
    const BlockId id{b};
    const auto sb = static_cast<std::size_t>(b);
    for (Arm a : kArms) {
      const auto i = index(a);
      const auto o = index(other(a));
      if (ext.reachable[sb] == a && r.closed[i][0]) out.push_back({ActionKind::Reach, a, id, t});
      if (r.at[i][sb] && r.closed[i][0] && r.in_hand[o][static_cast<std::size_t>(nb)])
        out.push_back({ActionKind::Grasp, a, id, t});
      // :- pull(A, B, t), max_height(A, t).
      if (r.in_hand[i][sb] && r.max_height[i][0]) out.push_back({ActionKind::Pull, a, id, t});
      bool other_block = false;
      for (int c = 0; c < nb; ++c) other_block = other_block || (c != b && r.in_hand[i][static_cast<std::size_t>(c)]);
      if (ext.above_roi == id && other_block && r.max_height[i][1])
        out.push_back({ActionKind::Move, a, id, t});
    }
  }
  for (Arm a : kArms)
    if (r.closed[index(a)][1]) out.push_back({ActionKind::Release, a, std::nullopt, t});
  std::sort(out.begin(), out.end(), action_key_less);
  return out;
}

void relax_apply(Relaxed& next, const Action& act, int nb) {
  const auto i = index(act.arm);
  switch (act.kind) {
    case ActionKind::Reach: next.at[i][static_cast<std::size_t>(act.block->value)] = 1; break;
    case ActionKind::Grasp:
      next.closed[i][1] = 1;
      next.in_hand[i][static_cast<std::size_t>(act.block->value)] = 1;
      break;
    case ActionKind::Pull:
    case ActionKind::Move: next.visible[1] = 1; break;
    case ActionKind::Release:
      next.closed[i][0] = 1;
      next.in_hand[i][static_cast<std::size_t>(nb)] = 1;
      next.max_height[i][0] = 1;
      break;
  }
}

// ---- concrete transition system used by the search ----

bool applicable(const SymbolicState& s, const Action& act, const sa::FluentSet& ext) {
  const auto i = index(act.arm);
  const auto o = index(other(act.arm));
  switch (act.kind) {
    case ActionKind::Reach:
      return ext.reachable[static_cast<std::size_t>(act.block->value)] == act.arm && !s.closed_gripper[i];
    case ActionKind::Grasp:
      return s.at[i] == act.block && !s.closed_gripper[i] && !s.in_hand[o];
    case ActionKind::Pull:
      return s.in_hand[i] == act.block && !s.max_height[i];
    case ActionKind::Move:
      return s.in_hand[i].has_value() && s.in_hand[i] != act.block && s.max_height[i] && ext.above_roi == act.block;
    case ActionKind::Release:
      return s.closed_gripper[i];
  }
  return false;
}

// Returns the goal block when this action first makes the ROI visible.
std::optional<BlockId> apply(SymbolicState& s, const Action& act) {
  const auto i = index(act.arm);
  std::optional<BlockId> goal;
  switch (act.kind) {
    case ActionKind::Reach: s.at[i] = act.block; break;
    case ActionKind::Grasp:
      s.closed_gripper[i] = true;
      s.in_hand[i] = act.block;
      break;
    case ActionKind::Pull:
    case ActionKind::Move:
      if (!s.visible_roi) goal = s.in_hand[i];
      s.visible_roi = true;
      break;
    case ActionKind::Release:
      s.closed_gripper[i] = false;
      s.in_hand[i].reset();
      s.max_height[i] = false;
      break;
  }
  return goal;
}

std::uint64_t state_key(const SymbolicState& s) {
  auto enc = [](const std::optional<BlockId>& b) { return static_cast<std::uint64_t>(b ? b->value + 1 : 0); };
  std::uint64_t k = 0;
  for (Arm a : kArms) {
    const auto i = index(a);
    k = (k << 12) | enc(s.at[i]);
    k = (k << 12) | enc(s.in_hand[i]);
    k = (k << 1) | (s.closed_gripper[i] ? 1u : 0u);
    k = (k << 1) | (s.max_height[i] ? 1u : 0u);
  }
  return (k << 1) | (s.visible_roi ? 1u : 0u);
}

struct Objective {
  long long score = 0;
  int length = 0;
};

// Lexicographic (score, -length).
bool better(const Objective& a, const Objective& b) {
  return a.score > b.score || (a.score == b.score && a.length < b.length);
}

class Search {
 public:
  explicit Search(const DomainProgram& p) : p_(p) {
    by_score_.resize(static_cast<std::size_t>(p.num_blocks));
    for (int b = 0; b < p.num_blocks; ++b) by_score_[static_cast<std::size_t>(b)] = b;
    std::stable_sort(by_score_.begin(), by_score_.end(), [&](int a, int b) {
      return p.score[static_cast<std::size_t>(a)] > p.score[static_cast<std::size_t>(b)];
    });
  }

  void run(const SymbolicState& s0) {
    plan_.clear();
    dfs(s0, 0, std::nullopt);
  }

  bool found() const { return best_.has_value(); }
  const Objective& objective() const { return *best_; }
  const std::vector<Action>& plan() const { return best_plan_; }
  std::optional<BlockId> goal_block() const { return best_goal_; }

 private:
  // Fewest steps after which block b can be the goal block from s.
  int steps_to_goal_with(const SymbolicState& s, int b) const {
    constexpr int kNever = std::numeric_limits<int>::max() / 2;
    int best = kNever;
    const BlockId id{b};
    const auto& ext = p_.externals;
    for (Arm a : kArms) {
      const auto i = index(a);
      if (s.in_hand[i] == id) {
        const bool one_step = !s.max_height[i] || (ext.above_roi && *ext.above_roi != id);
        best = std::min(best, one_step ? 1 : 3);
      }
      if (s.at[i] == id) best = std::min(best, s.closed_gripper[i] ? 3 : 2);
      if (ext.reachable[static_cast<std::size_t>(b)] == a) best = std::min(best, s.closed_gripper[i] ? 4 : 3);
    }
    return best;
  }

  // Optimistic objective of any completion from s at time t.
  std::optional<Objective> bound(const SymbolicState& s, int t) const {
    const int remaining = p_.horizon - t;
    std::optional<Objective> ub;
    for (int b : by_score_) {
      const long long sc = p_.score[static_cast<std::size_t>(b)];
      if (ub && sc < ub->score) break;
      const int k = steps_to_goal_with(s, b);
      if (k > remaining) continue;
      const Objective o{sc, t + k};
      if (!ub || better(o, *ub)) ub = o;
    }
    return ub;
  }

  void dfs(const SymbolicState& s, int t, std::optional<BlockId> goal) {
    if (s.visible_roi) {
      const Objective o{goal ? p_.score[static_cast<std::size_t>(goal->value)] : kSatisfied, t};
      if (!best_ || better(o, *best_)) {
        best_ = o;
        best_plan_ = plan_;
        best_goal_ = goal;
      }
      return;
    }
    if (t >= p_.horizon) return;
    const auto [it, inserted] = seen_.try_emplace(state_key(s), t);
    if (!inserted) {
      if (it->second <= t) return;
      it->second = t;
    }
    if (best_) {
      const auto ub = bound(s, t);
      if (!ub || !better(*ub, *best_)) return;
    }
    for (const Action& cand : p_.candidates[static_cast<std::size_t>(t)]) {
      if (!applicable(s, cand, p_.externals)) continue;
      SymbolicState next = s;
      const auto g = apply(next, cand);
      plan_.push_back(cand);
      dfs(next, t + 1, g ? g : goal);
      plan_.pop_back();
    }
  }

  static constexpr long long kSatisfied = std::numeric_limits<long long>::max();

  const DomainProgram& p_;
  std::vector<int> by_score_;
  std::unordered_map<std::uint64_t, int> seen_;
  std::vector<Action> plan_;
  std::optional<Objective> best_;
  std::vector<Action> best_plan_;
  std::optional<BlockId> best_goal_;
};

}  // namespace

DomainProgram ground_domain(const BlockGrid& grid, const sa::FluentSet& fluents, int horizon,
                            const Weights& weights) {
  if (horizon < 1) throw std::invalid_argument("horizon must be >= 1");
  const int nb = grid.size();
  if (static_cast<int>(fluents.reachable.size()) != nb || static_cast<int>(fluents.fixed.size()) != nb)
    throw std::invalid_argument("fluent set does not match the block grid");

  DomainProgram p;
  p.num_blocks = nb;
  p.horizon = horizon;
  p.externals = fluents;
  p.weights = weights;

  p.distance.resize(static_cast<std::size_t>(nb * nb));
  for (int a = 0; a < nb; ++a)
    for (int b = 0; b < nb; ++b)
      p.distance[static_cast<std::size_t>(a * nb + b)] = block_distance(grid, BlockId{a}, BlockId{b});

  p.score.resize(static_cast<std::size_t>(nb));
  for (int b = 0; b < nb; ++b)
    p.score[static_cast<std::size_t>(b)] = grasp_score(BlockId{b}, grid, fluents.fixed, fluents.above_roi,
                                                       weights.w_ap, weights.w_roi, weights.objective);

  Relaxed r = relax_initial(fluents, nb);
  p.candidates.resize(static_cast<std::size_t>(horizon));
  for (int t = 0; t < horizon; ++t) {
    auto& step = p.candidates[static_cast<std::size_t>(t)];
    step = ground_step(r, fluents, t);
    Relaxed next = r;
    for (const Action& a : step) relax_apply(next, a, nb);
    r = std::move(next);
  }
  return p;
}

namespace {

std::vector<HistoryStep> replay(const DomainProgram& p, const std::vector<Action>& actions) {
  std::vector<HistoryStep> h;
  SymbolicState s = initial_state(p.externals);
  for (std::size_t t = 0; t < actions.size(); ++t) {
    h.push_back({static_cast<int>(t), s, actions[t]});
    apply(s, actions[t]);
  }
  h.push_back({static_cast<int>(actions.size()), s, std::nullopt});
  return h;
}

}  // namespace

PlanResult solve(const DomainProgram& program) {
  const auto start = std::chrono::steady_clock::now();
  PlanResult result;
  Search search(program);
  search.run(initial_state(program.externals));
  if (search.found()) {
    result.found = true;
    result.actions = search.plan();
    result.goal_block = search.goal_block();
    result.objective_value = result.goal_block ? search.objective().score : 0;
    result.history = replay(program, result.actions);
  } else {
    result.violated = "visible_roi at t=" + std::to_string(program.horizon);
    result.history = replay(program, {});
  }
  result.solve_time = std::chrono::steady_clock::now() - start;
  return result;
}

std::vector<std::string> state_atoms(const SymbolicState& s, const DomainProgram& program) {
  sa::FluentSet f = program.externals;
  f.visible_roi = s.visible_roi;
  f.closed_gripper = s.closed_gripper;
  f.max_height = s.max_height;
  f.at = s.at;
  f.in_hand = s.in_hand;
  return f.atoms();
}

std::string render_history(const PlanResult& result, const DomainProgram& program) {
  std::ostringstream os;
  for (const auto& step : result.history) {
    os << "t=" << step.t << ":";
    const auto atoms = state_atoms(step.state, program);
    for (std::size_t i = 0; i < atoms.size(); ++i) os << (i ? ", " : " ") << atoms[i];
    if (step.action) os << " | action: " << to_string(*step.action);
    os << '\n';
  }
  return os.str();
}

}  // namespace retract::reasoner
