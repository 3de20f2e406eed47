#pragma once

#include <array>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "retract/config.hpp"
#include "retract/grid.hpp"
#include "retract/types.hpp"

namespace retract::sa {

/// Context fluents for one instant. Per-block facts are indexed by BlockId.
struct FluentSet {
  bool visible_roi = false;
  std::array<bool, 2> closed_gripper{false, false};
  std::array<bool, 2> max_height{false, false};  // injected by the executive
  std::array<std::optional<BlockId>, 2> at;
  std::array<std::optional<BlockId>, 2> in_hand;
  std::vector<Arm> reachable;  // the single arm reaching each block
  std::vector<bool> fixed;
  std::optional<BlockId> above_roi;

  /// Ground atoms in a fixed order, e.g. "in_hand(psm1,b12)".
  std::vector<std::string> atoms() const;
  friend bool operator==(const FluentSet&, const FluentSet&) = default;
};

/// Tracked tissue points, indices into the task-start point cloud.
struct CloseSet {
  std::vector<std::size_t> indices;
};

/// Grasp candidates are material points: each block follows the surface point
/// nearest to its rest center. An empty tracker compares against rest centers.
struct BlockTracker {
  struct Anchor {
    std::size_t point = 0;
    Vec3 offset = Vec3::Zero();  // rest center minus rest anchor position
  };
  std::vector<Anchor> anchors;

  static BlockTracker from_rest(const EnvState& rest, const BlockGrid& grid);
  Vec3 position(const EnvState& env, const BlockGrid& grid, BlockId b) const;
};

class ScenarioRejected : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Points strictly within close_radius of the ROI. Throws ScenarioRejected if empty.
CloseSet init_close_set(const EnvState& env, const Config& config);

/// Share of the tracked points now farther than close_radius from the ROI.
double roi_visibility(const EnvState& env, const CloseSet& close, const Config& config);

FluentSet compute_fluents(const EnvState& env, const RobotState& robot, const CloseSet& close,
                          const BlockTracker& tracker, const BlockGrid& grid, const Config& config);

/// max(sigma) >= epsilon.
bool check_failure(const EnvState& env, const Config& config);

std::optional<Vec3> compute_target(const Action& action, const RobotState& robot,
                                   const BlockGrid& grid, const Config& config);

}  // namespace retract::sa
