#pragma once

#include <optional>
#include <stdexcept>
#include <variant>
#include <vector>

#include "retract/config.hpp"
#include "retract/types.hpp"

namespace retract::motion {

struct Trajectory {
  Arm arm = Arm::Psm1;
  std::vector<Vec3> waypoints;  // excludes the start, ends exactly at the target
};

struct GripperCommand {
  Arm arm = Arm::Psm1;
  double target_jaw_deg = 0.0;
};

using Primitive = std::variant<Trajectory, GripperCommand>;

class MotionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Straight line at control_step spacing, fixed orientation.
Trajectory linear_trajectory(Arm arm, const Vec3& start, const Vec3& target, double step);

/// Footprint inflated by 30 mm in xy, z in [0, 100] mm.
bool in_workspace(const Vec3& p, const Config& config);

Primitive primitive_for(const Action& action, const std::optional<Vec3>& target,
                        const RobotState& robot, const Config& config);

}  // namespace retract::motion
