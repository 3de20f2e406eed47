#include <doctest.h>

#include "retract/grid.hpp"

using namespace retract;

namespace {
Config with_grid(int n) {
  Config c;
  c.grid_n = n;
  return c;
}
}  // namespace

TEST_CASE("grid cells divide the footprint") {
  const BlockGrid g5 = make_grid(with_grid(5));
  CHECK(g5.size() == 25);
  CHECK(g5.cell_dx == doctest::Approx(20.0));
  CHECK(g5.cell_dy == doctest::Approx(24.0));

  const BlockGrid g7 = make_grid(with_grid(7));
  CHECK(g7.cell_dx == doctest::Approx(100.0 / 7.0));
  CHECK(g7.cell_dy == doctest::Approx(120.0 / 7.0));
}

TEST_CASE("2x2 centers sit at the quarter points on the top surface") {
  const BlockGrid g = make_grid(with_grid(2));
  REQUIRE(g.size() == 4);
  const double xs[] = {-25, 25, -25, 25};
  const double ys[] = {-30, -30, 30, 30};
  for (int b = 0; b < 4; ++b) {
    CHECK(g.center(BlockId{b}).x() == doctest::Approx(xs[b]));
    CHECK(g.center(BlockId{b}).y() == doctest::Approx(ys[b]));
    CHECK(g.center(BlockId{b}).z() == doctest::Approx(5.0));
  }
}

TEST_CASE("block_of_point") {
  const BlockGrid g = make_grid(with_grid(2));
  for (int b = 0; b < 4; ++b) CHECK(block_of_point(g, g.center(BlockId{b})) == BlockId{b});
  CHECK_FALSE(block_of_point(g, Vec3(80, 0, 5)).has_value());
  CHECK_FALSE(block_of_point(g, Vec3(0, -61, 5)).has_value());

  // shared edges and the middle corner resolve to the lower index
  CHECK(block_of_point(g, Vec3(0, -30, 5)) == BlockId{0});
  CHECK(block_of_point(g, Vec3(0, 30, 5)) == BlockId{2});
  CHECK(block_of_point(g, Vec3(-25, 0, 5)) == BlockId{0});
  CHECK(block_of_point(g, Vec3(25, 0, 5)) == BlockId{1});
  CHECK(block_of_point(g, Vec3(0, 0, 5)) == BlockId{0});
  // outer boundary still belongs to the footprint
  CHECK(block_of_point(g, Vec3(50, 60, 5)) == BlockId{3});
  CHECK(block_of_point(g, Vec3(-50, -60, 5)) == BlockId{0});
}

TEST_CASE("every footprint point maps to exactly one cell") {
  const BlockGrid g = make_grid(with_grid(7));
  for (double x = -50; x <= 50; x += 2.5)
    for (double y = -60; y <= 60; y += 2.5) {
      auto b = block_of_point(g, Vec3(x, y, 5));
      REQUIRE(b.has_value());
      const Vec3& c = g.center(*b);
      CHECK(std::abs(c.x() - x) <= g.cell_dx / 2 + 1e-9);
      CHECK(std::abs(c.y() - y) <= g.cell_dy / 2 + 1e-9);
    }
}

TEST_CASE("block_distance") {
  const BlockGrid g = make_grid(with_grid(5));
  CHECK(block_distance(g, BlockId{7}, BlockId{7}) == 0);
  CHECK(block_distance(g, BlockId{0}, BlockId{1}) == 20);
  CHECK(block_distance(g, BlockId{0}, BlockId{5}) == 24);
  CHECK(block_distance(g, BlockId{0}, BlockId{6}) == 31);

  const BlockGrid g7 = make_grid(with_grid(7));
  for (int a = 0; a < g7.size(); ++a)
    for (int b = 0; b < g7.size(); ++b) {
      CHECK(block_distance(g7, BlockId{a}, BlockId{b}) == block_distance(g7, BlockId{b}, BlockId{a}));
      for (int c = 0; c < g7.size(); c += 5)
        CHECK(block_distance(g7, BlockId{a}, BlockId{b}) <=
              block_distance(g7, BlockId{a}, BlockId{c}) + block_distance(g7, BlockId{c}, BlockId{b}) + 1);
    }
}
