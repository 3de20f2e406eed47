#pragma once

#include <chrono>
#include <optional>
#include <string>
#include <vector>

#include "retract/awareness.hpp"
#include "retract/config.hpp"
#include "retract/grid.hpp"
#include "retract/types.hpp"

namespace retract::reasoner {

struct Weights {
  int w_ap = 1;
  int w_roi = 1;
  ObjectiveKind objective = ObjectiveKind::Min;
};

/// Weights from the configuration. When ignore_aps is set, the first plan of a
/// task drops the attachment term; re-plans always use the full objective.
Weights weights_for(const Config& config, bool initial_plan);

/// Truth of the time-varying fluents at one timestep. Statics and the
/// externals reachable/fixed/above_roi are inert over the horizon.
struct SymbolicState {
  std::array<std::optional<BlockId>, 2> at;
  std::array<std::optional<BlockId>, 2> in_hand;
  std::array<bool, 2> closed_gripper{false, false};
  std::array<bool, 2> max_height{false, false};
  bool visible_roi = false;

  friend bool operator==(const SymbolicState&, const SymbolicState&) = default;
};

SymbolicState initial_state(const sa::FluentSet& fluents);

/// Ground instantiation of the retraction domain over blocks, arms and timesteps.
struct DomainProgram {
  int num_blocks = 0;
  int horizon = 1;
  sa::FluentSet externals;            // t = 0 context, max_height markers included
  std::vector<int> distance;          // distance(B1, B2, X), row-major num_blocks^2
  Weights weights;
  std::vector<long long> score;       // grasp objective per block
  std::vector<std::vector<Action>> candidates;  // surviving action atoms per timestep, key order

  int dist(BlockId a, BlockId b) const {
    return distance[static_cast<std::size_t>(a.value * num_blocks + b.value)];
  }
  std::size_t candidate_count() const;
};

DomainProgram ground_domain(const BlockGrid& grid, const sa::FluentSet& fluents, int horizon,
                            const Weights& weights);

/// w_ap * (attachment term) - w_roi * distance to the ROI block. The attachment
/// term is the nearest fixed block distance (Min) or the sum of the distinct
/// fixed-block distances (Sum); zero when nothing is fixed.
long long grasp_score(BlockId b, const BlockGrid& grid, const std::vector<bool>& fixed_blocks,
                      std::optional<BlockId> roi_block, int w_ap, int w_roi,
                      ObjectiveKind objective = ObjectiveKind::Min);

/// Nearest fixed-block distance, or nullopt when no block is fixed.
std::optional<int> min_ap_distance(BlockId b, const BlockGrid& grid, const std::vector<bool>& fixed);

struct HistoryStep {
  int t = 0;
  SymbolicState state;
  std::optional<Action> action;
};

struct PlanResult {
  bool found = false;
  std::vector<Action> actions;
  std::vector<HistoryStep> history;
  long long objective_value = 0;            // score of the block that achieves the goal
  std::optional<BlockId> goal_block;        // block in hand when visible_roi first holds
  std::string violated;                     // set when !found
  std::chrono::nanoseconds solve_time{0};
};

/// Choice-rule semantics: at most one action per step, deterministic effects
/// with inertia, goal visible_roi at the horizon. Maximizes (score, -length),
/// ties broken by the action key order over the whole sequence.
PlanResult solve(const DomainProgram& program);

/// Exhaustive reference. Throws std::invalid_argument beyond 9 blocks or horizon 4.
PlanResult brute_force_oracle(const DomainProgram& program);

/// Ordering used for ties: (block, arm, kind) with release sorting before any block.
bool action_key_less(const Action& a, const Action& b);

/// One line per timestep: "t=2: atom, atom | action: pull(psm1,b12)".
std::string render_history(const PlanResult& result, const DomainProgram& program);

/// Ground atoms of a symbolic state plus the inert externals of program.
std::vector<std::string> state_atoms(const SymbolicState& s, const DomainProgram& program);

}  // namespace retract::reasoner
