#include <doctest.h>

#include <algorithm>

#include "retract/awareness.hpp"

using namespace retract;
using namespace retract::sa;

namespace {

Config cfg2() {
  Config c;
  c.grid_n = 2;
  return c;
}

// Ten points on a 5 mm ring around the origin, plus two far away.
EnvState ring_env() {
  EnvState e;
  e.roi = Vec3::Zero();
  for (int i = 0; i < 10; ++i) {
    const double t = i * 0.6283185307179586;
    e.points.emplace_back(5 * std::cos(t), 5 * std::sin(t), 0.0);
  }
  e.points.emplace_back(40, 40, 5);
  e.points.emplace_back(-40, 40, 5);
  e.sigma.assign(e.points.size(), 0.0);
  return e;
}

RobotState arms(double y1, double y2, double j1 = 60, double j2 = 60) {
  RobotState r;
  r.arm_pos = {Vec3(0, y1, 40), Vec3(0, y2, 40)};
  r.jaw_deg = {j1, j2};
  return r;
}

}  // namespace

TEST_CASE("close set") {
  const Config c = cfg2();
  EnvState e = ring_env();
  e.points.emplace_back(10, 0, 0);     // on the boundary
  e.points.emplace_back(9.999, 0, 0);
  e.sigma.assign(e.points.size(), 0.0);
  const CloseSet cs = init_close_set(e, c);
  CHECK(cs.indices.size() == 11);
  CHECK(std::find(cs.indices.begin(), cs.indices.end(), 12u) == cs.indices.end());
  CHECK(std::find(cs.indices.begin(), cs.indices.end(), 13u) != cs.indices.end());

  EnvState far = ring_env();
  far.roi = Vec3(200, 0, 0);
  CHECK_THROWS_AS(init_close_set(far, c), ScenarioRejected);
}

TEST_CASE("visibility counts tracked points beyond the radius") {
  const Config c = cfg2();
  EnvState e = ring_env();
  const CloseSet cs = init_close_set(e, c);
  REQUIRE(cs.indices.size() == 10);
  CHECK(roi_visibility(e, cs, c) == 0.0);
  for (int i = 0; i < 8; ++i) e.points[static_cast<std::size_t>(i)].z() = 15.0;
  CHECK(roi_visibility(e, cs, c) == doctest::Approx(0.8));
  const FluentSet f = compute_fluents(e, arms(-50, 50), cs, {}, make_grid(c), c);
  CHECK(f.visible_roi);

  // exactly at the radius is not displaced; 70% is not above the threshold
  e = ring_env();
  for (int i = 0; i < 7; ++i) e.points[static_cast<std::size_t>(i)] = Vec3(0, 0, 10.0);
  CHECK(roi_visibility(e, cs, c) == 0.0);
  for (int i = 0; i < 7; ++i) e.points[static_cast<std::size_t>(i)] = Vec3(0, 0, 10.5);
  CHECK(roi_visibility(e, cs, c) == doctest::Approx(0.7));
  CHECK_FALSE(compute_fluents(e, arms(-50, 50), cs, {}, make_grid(c), c).visible_roi);
}

TEST_CASE("gripper threshold") {
  const Config c = cfg2();
  const EnvState e = ring_env();
  const CloseSet cs = init_close_set(e, c);
  const FluentSet f = compute_fluents(e, arms(-50, 50, 15, 45), cs, {}, make_grid(c), c);
  CHECK(f.closed_gripper[0]);
  CHECK_FALSE(f.closed_gripper[1]);
  CHECK_FALSE(compute_fluents(e, arms(-50, 50, 20, 19.9), cs, {}, make_grid(c), c).closed_gripper[0]);
  CHECK(compute_fluents(e, arms(-50, 50, 20, 19.9), cs, {}, make_grid(c), c).closed_gripper[1]);
}

TEST_CASE("reachability is the nearest arm in y") {
  Config c;
  c.grid_n = 5;  // rows at y = -48, -24, 0, 24, 48
  const BlockGrid g = make_grid(c);
  const EnvState e = ring_env();
  const CloseSet cs = init_close_set(e, c);
  const FluentSet f = compute_fluents(e, arms(-50, 50), cs, {}, g, c);
  for (int b = 0; b < g.size(); ++b) {
    const double y = g.center(BlockId{b}).y();
    if (y < 0) CHECK(f.reachable[static_cast<std::size_t>(b)] == Arm::Psm1);
    if (y > 0) CHECK(f.reachable[static_cast<std::size_t>(b)] == Arm::Psm2);
    if (y == 0) CHECK(f.reachable[static_cast<std::size_t>(b)] == Arm::Psm1);  // tie
  }

  // block at y = -20 with arms at -50 and +50
  Config c3;
  c3.tissue_dims = {100, 40, 5};
  c3.grid_n = 2;  // rows at y = -10, 10
  const FluentSet f3 = compute_fluents(e, arms(-50, 50), cs, {}, make_grid(c3), c3);
  CHECK(f3.reachable[0] == Arm::Psm1);
  CHECK(f3.reachable[2] == Arm::Psm2);

  // swapping the arms swaps every assignment
  const FluentSet s = compute_fluents(e, arms(30, -20), cs, {}, g, c);
  const FluentSet t = compute_fluents(e, arms(-20, 30), cs, {}, g, c);
  for (int b = 0; b < g.size(); ++b) {
    const auto i = static_cast<std::size_t>(b);
    if (std::abs(g.center(BlockId{b}).y() - 5.0) < 1e-9) continue;  // equidistant row
    CHECK(s.reachable[i] == other(t.reachable[i]));
  }
}

TEST_CASE("fixed blocks and the roi block") {
  const Config c = cfg2();
  EnvState e = ring_env();
  e.fixed_indices = {10};  // (40, 40) sits in block 3
  const CloseSet cs = init_close_set(e, c);
  const FluentSet f = compute_fluents(e, arms(-50, 50), cs, {}, make_grid(c), c);
  CHECK(f.fixed == std::vector<bool>{false, false, false, true});
  CHECK(f.above_roi == BlockId{0});  // origin corner goes to the lowest index
  e.roi = Vec3(20, 20, 0);
  e.points = {Vec3(20, 21, 0)};
  e.sigma = {0.0};
  e.fixed_indices.clear();
  const FluentSet g = compute_fluents(e, arms(-50, 50), init_close_set(e, c), {}, make_grid(c), c);
  CHECK(g.above_roi == BlockId{3});
  CHECK(g.fixed == std::vector<bool>(4, false));
}

TEST_CASE("at and in_hand use the 5 mm radius") {
  const Config c = cfg2();
  const BlockGrid g = make_grid(c);
  const EnvState e = ring_env();
  const CloseSet cs = init_close_set(e, c);
  RobotState r = arms(-50, 50, 10, 60);
  r.arm_pos[0] = g.center(BlockId{0}) + Vec3(3, 0, 0);
  r.arm_pos[1] = g.center(BlockId{3}) + Vec3(0, 0, 4.9);
  FluentSet f = compute_fluents(e, r, cs, {}, g, c);
  CHECK(f.at[0] == BlockId{0});
  CHECK(f.in_hand[0] == BlockId{0});
  CHECK(f.at[1] == BlockId{3});
  CHECK_FALSE(f.in_hand[1].has_value());

  r.arm_pos[0] = g.center(BlockId{0}) + Vec3(0, 5, 0);
  f = compute_fluents(e, r, cs, {}, g, c);
  CHECK_FALSE(f.at[0].has_value());
  CHECK_FALSE(f.in_hand[0].has_value());
}

TEST_CASE("tracked blocks follow their anchor point") {
  const Config c = cfg2();
  const BlockGrid g = make_grid(c);
  EnvState rest;
  rest.roi = Vec3::Zero();
  for (int b = 0; b < 4; ++b) rest.points.push_back(g.center(BlockId{b}) + Vec3(1, 0, 0));
  rest.points.emplace_back(0, 0, 5);
  rest.sigma.assign(rest.points.size(), 0.0);
  const BlockTracker tr = BlockTracker::from_rest(rest, g);
  CHECK((tr.position(rest, g, BlockId{2}) - g.center(BlockId{2})).norm() < 1e-12);

  EnvState lifted = rest;
  lifted.points[1] += Vec3(0, 0, 30);
  CHECK((tr.position(lifted, g, BlockId{1}) - (g.center(BlockId{1}) + Vec3(0, 0, 30))).norm() < 1e-12);

  RobotState r = arms(-50, 50, 5, 60);
  r.arm_pos[0] = g.center(BlockId{1}) + Vec3(0, 0, 31);
  const FluentSet f = compute_fluents(lifted, r, init_close_set(rest, c), tr, g, c);
  CHECK(f.in_hand[0] == BlockId{1});
}

TEST_CASE("failure threshold includes the boundary") {
  Config c;
  EnvState e;
  e.sigma = {0.1, 0.6};
  CHECK(check_failure(e, c));
  e.sigma = {0.49};
  CHECK_FALSE(check_failure(e, c));
  e.sigma = {0.5};
  CHECK(check_failure(e, c));
}

TEST_CASE("motion targets") {
  Config c;
  const BlockGrid g = make_grid(c);
  RobotState r;
  r.arm_pos = {Vec3(10, 20, 5), Vec3(0, 0, 40)};
  const Action pull{ActionKind::Pull, Arm::Psm1, BlockId{3}, 0};
  CHECK(*compute_target(pull, r, g, c) == Vec3(10, 20, 55));
  const Action reach{ActionKind::Reach, Arm::Psm2, BlockId{9}, 0};
  CHECK(*compute_target(reach, r, g, c) == g.center(BlockId{9}));
  const Action move{ActionKind::Move, Arm::Psm2, BlockId{9}, 0};
  const Vec3 m = *compute_target(move, r, g, c);
  CHECK(m.x() == g.center(BlockId{9}).x());
  CHECK(m.y() == g.center(BlockId{9}).y());
  CHECK(m.z() == 40.0);
  CHECK_FALSE(compute_target({ActionKind::Release, Arm::Psm1, std::nullopt, 0}, r, g, c).has_value());
  CHECK_FALSE(compute_target({ActionKind::Grasp, Arm::Psm1, BlockId{0}, 0}, r, g, c).has_value());
}

TEST_CASE("atom rendering") {
  FluentSet f;
  f.visible_roi = true;
  f.closed_gripper = {true, false};
  f.at[0] = BlockId{2};
  f.in_hand[0] = BlockId{2};
  f.reachable = {Arm::Psm1, Arm::Psm2};
  f.fixed = {false, true};
  f.above_roi = BlockId{0};
  const std::vector<std::string> expect{"visible_roi", "closed_gripper(psm1)", "at(psm1,b2)", "in_hand(psm1,b2)",
                                        "above_roi(b0)", "fixed(b1)", "reachable(psm1,b0)", "reachable(psm2,b1)"};
  CHECK(f.atoms() == expect);
}
