#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

namespace retract {

/// Positions are millimetres in the common tissue frame: the rest slab spans
/// [-X/2, X/2] x [-Y/2, Y/2] x [0, Z], so the top surface sits at z = Z.
using Vec3 = Eigen::Vector3d;

enum class Arm : std::uint8_t { Psm1 = 0, Psm2 = 1 };

inline constexpr std::array<Arm, 2> kArms{Arm::Psm1, Arm::Psm2};

constexpr std::size_t index(Arm a) { return static_cast<std::size_t>(a); }
constexpr Arm other(Arm a) { return a == Arm::Psm1 ? Arm::Psm2 : Arm::Psm1; }
std::string_view arm_name(Arm a);
std::optional<Arm> parse_arm(std::string_view name);

/// Row-major index of a candidate grasp cell: row along y, column along x.
struct BlockId {
  int value = 0;
  friend auto operator<=>(const BlockId&, const BlockId&) = default;
};

std::string block_name(BlockId b);

enum class ActionKind : std::uint8_t { Reach, Grasp, Pull, Move, Release };

std::string_view action_kind_name(ActionKind k);

struct Action {
  ActionKind kind = ActionKind::Reach;
  Arm arm = Arm::Psm1;
  std::optional<BlockId> block;  // absent only for release
  int timestep = 0;

  friend bool operator==(const Action&, const Action&) = default;
};

/// "reach(psm1,b12)" / "release(psm2)"; timestep omitted.
std::string to_string(const Action& a);

/// Environment snapshot consumed by situation awareness.
struct EnvState {
  std::vector<Vec3> points;               // current tissue surface positions
  std::vector<std::size_t> fixed_indices; // attachment points, indices into points
  Vec3 roi = Vec3::Zero();
  std::vector<double> sigma;              // force magnitude per point, N
};

struct RobotState {
  std::array<Vec3, 2> arm_pos{Vec3::Zero(), Vec3::Zero()};
  std::array<double, 2> jaw_deg{60.0, 60.0};
};

}  // namespace retract
