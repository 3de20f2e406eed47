#include "retract/motion.hpp"

#include <cmath>

namespace retract::motion {

Trajectory linear_trajectory(Arm arm, const Vec3& start, const Vec3& target, double step) {
  if (!(step > 0)) throw MotionError("control step must be positive");
  Trajectory tr;
  tr.arm = arm;
  const double dist = (target - start).norm();
  const int n = std::max(1, static_cast<int>(std::ceil(dist / step - 1e-12)));
  tr.waypoints.reserve(static_cast<std::size_t>(n));
  for (int k = 1; k < n; ++k) {
    const double s = static_cast<double>(k) / n;
    tr.waypoints.push_back(start + s * (target - start));
  }
  tr.waypoints.push_back(target);
  return tr;
}

bool in_workspace(const Vec3& p, const Config& config) {
  constexpr double margin = 30.0;
  const double hx = config.tissue_dims[0] / 2 + margin;
  const double hy = config.tissue_dims[1] / 2 + margin;
  return std::abs(p.x()) <= hx && std::abs(p.y()) <= hy && p.z() >= 0.0 && p.z() <= 100.0;
}

Primitive primitive_for(const Action& action, const std::optional<Vec3>& target, const RobotState& robot,
                        const Config& config) {
  switch (action.kind) {
    case ActionKind::Grasp:
      return GripperCommand{action.arm, 0.0};
    case ActionKind::Release:
      return GripperCommand{action.arm, config.gripper_open_deg};
    case ActionKind::Reach:
    case ActionKind::Move:
    case ActionKind::Pull:
      break;
  }
  if (!target) throw MotionError(to_string(action) + ": spatial action without a target");
  if (!in_workspace(*target, config)) throw MotionError(to_string(action) + ": target outside the workspace");
  return linear_trajectory(action.arm, robot.arm_pos[index(action.arm)], *target, config.control_step);
}

}  // namespace retract::motion
