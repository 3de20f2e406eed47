#include "retract/awareness.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace retract::sa {

std::vector<std::string> FluentSet::atoms() const {
  std::vector<std::string> out;
  const auto arm_atom = [](const char* name, Arm a) { return std::string(name) + "(" + std::string(arm_name(a)) + ")"; };
  const auto arm_block = [](const char* name, Arm a, BlockId b) {
    return std::string(name) + "(" + std::string(arm_name(a)) + "," + block_name(b) + ")";
  };
  if (visible_roi) out.emplace_back("visible_roi");
  for (Arm a : kArms) {
    if (closed_gripper[index(a)]) out.push_back(arm_atom("closed_gripper", a));
    if (max_height[index(a)]) out.push_back(arm_atom("max_height", a));
    if (at[index(a)]) out.push_back(arm_block("at", a, *at[index(a)]));
    if (in_hand[index(a)]) out.push_back(arm_block("in_hand", a, *in_hand[index(a)]));
  }
  if (above_roi) out.push_back("above_roi(" + block_name(*above_roi) + ")");
  for (std::size_t b = 0; b < fixed.size(); ++b)
    if (fixed[b]) out.push_back("fixed(" + block_name(BlockId{static_cast<int>(b)}) + ")");
  for (std::size_t b = 0; b < reachable.size(); ++b)
    out.push_back(arm_block("reachable", reachable[b], BlockId{static_cast<int>(b)}));
  return out;
}

BlockTracker BlockTracker::from_rest(const EnvState& rest, const BlockGrid& grid) {
  BlockTracker t;
  if (rest.points.empty()) return t;
  t.anchors.reserve(grid.centers.size());
  for (const Vec3& c : grid.centers) {
    std::size_t best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < rest.points.size(); ++i) {
      const double d = (rest.points[i] - c).squaredNorm();
      if (d < best_d) {
        best_d = d;
        best = i;
      }
    }
    t.anchors.push_back({best, c - rest.points[best]});
  }
  return t;
}

Vec3 BlockTracker::position(const EnvState& env, const BlockGrid& grid, BlockId b) const {
  if (anchors.empty()) return grid.center(b);
  const Anchor& a = anchors[static_cast<std::size_t>(b.value)];
  return env.points[a.point] + a.offset;
}

CloseSet init_close_set(const EnvState& env, const Config& config) {
  CloseSet close;
  for (std::size_t i = 0; i < env.points.size(); ++i)
    if ((env.points[i] - env.roi).norm() < config.close_radius) close.indices.push_back(i);
  if (close.indices.empty())
    throw ScenarioRejected("no tissue point within " + std::to_string(config.close_radius) +
                           " mm of the ROI");
  return close;
}

double roi_visibility(const EnvState& env, const CloseSet& close, const Config& config) {
  if (close.indices.empty()) return 0.0;
  std::size_t displaced = 0;
  for (std::size_t i : close.indices)
    if ((env.points[i] - env.roi).norm() > config.close_radius) ++displaced;
  return static_cast<double>(displaced) / static_cast<double>(close.indices.size());
}

FluentSet compute_fluents(const EnvState& env, const RobotState& robot, const CloseSet& close,
                          const BlockTracker& tracker, const BlockGrid& grid, const Config& config) {
  FluentSet f;
  f.visible_roi = roi_visibility(env, close, config) > config.delta;
  for (Arm a : kArms) f.closed_gripper[index(a)] = robot.jaw_deg[index(a)] < config.gripper_closed_deg;

  f.above_roi = block_of_point(grid, env.roi);

  const auto nb = static_cast<std::size_t>(grid.size());
  f.reachable.resize(nb);
  f.fixed.assign(nb, false);
  for (std::size_t idx : env.fixed_indices) {
    if (auto b = block_of_point(grid, env.points[idx])) f.fixed[static_cast<std::size_t>(b->value)] = true;
  }
  for (std::size_t i = 0; i < nb; ++i) {
    const BlockId b{static_cast<int>(i)};
    const double y = grid.center(b).y();
    const double d1 = std::abs(robot.arm_pos[0].y() - y);
    const double d2 = std::abs(robot.arm_pos[1].y() - y);
    f.reachable[i] = d2 < d1 ? Arm::Psm2 : Arm::Psm1;

    const Vec3 where = tracker.position(env, grid, b);
    for (Arm a : kArms) {
      if (f.at[index(a)]) continue;
      if ((robot.arm_pos[index(a)] - where).norm() < config.at_radius) {
        f.at[index(a)] = b;
        if (f.closed_gripper[index(a)]) f.in_hand[index(a)] = b;
      }
    }
  }
  return f;
}

bool check_failure(const EnvState& env, const Config& config) {
  double m = 0.0;
  for (double s : env.sigma) m = std::max(m, s);
  return m >= config.epsilon;
}

std::optional<Vec3> compute_target(const Action& action, const RobotState& robot, const BlockGrid& grid,
                                   const Config& config) {
  const Vec3& tip = robot.arm_pos[index(action.arm)];
  switch (action.kind) {
    case ActionKind::Reach:
      return grid.center(action.block.value());
    case ActionKind::Move: {
      const Vec3& c = grid.center(action.block.value());
      return Vec3(c.x(), c.y(), tip.z());
    }
    case ActionKind::Pull:
      return Vec3(tip.x(), tip.y(), tip.z() + config.pull_height);
    case ActionKind::Grasp:
    case ActionKind::Release:
      return std::nullopt;
  }
  throw std::invalid_argument("unknown action kind");
}

}  // namespace retract::sa
