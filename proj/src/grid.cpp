#include "retract/grid.hpp"

#include <cmath>

namespace retract {

BlockGrid make_grid(const Config& config) {
  BlockGrid g;
  g.n = config.grid_n;
  g.cell_dx = config.tissue_dims[0] / g.n;
  g.cell_dy = config.tissue_dims[1] / g.n;
  g.origin_x = -config.tissue_dims[0] / 2.0;
  g.origin_y = -config.tissue_dims[1] / 2.0;
  const double top = config.tissue_dims[2];
  g.centers.reserve(static_cast<std::size_t>(g.n * g.n));
  for (int row = 0; row < g.n; ++row) {
    for (int col = 0; col < g.n; ++col) {
      g.centers.emplace_back(g.origin_x + (col + 0.5) * g.cell_dx, g.origin_y + (row + 0.5) * g.cell_dy,
                             top);
    }
  }
  return g;
}

namespace {

// Cell along one axis; an exact boundary belongs to the lower cell.
std::optional<int> axis_cell(double coord, double origin, double cell, int n) {
  const double t = (coord - origin) / cell;
  if (t < 0.0 || t > n) return std::nullopt;
  const double fl = std::floor(t);
  int c = static_cast<int>(fl);
  if (t == fl && c > 0) --c;
  return std::min(c, n - 1);
}

}  // namespace

std::optional<BlockId> block_of_point(const BlockGrid& grid, const Vec3& p) {
  const auto col = axis_cell(p.x(), grid.origin_x, grid.cell_dx, grid.n);
  const auto row = axis_cell(p.y(), grid.origin_y, grid.cell_dy, grid.n);
  if (!col || !row) return std::nullopt;
  return BlockId{*row * grid.n + *col};
}

int block_distance(const BlockGrid& grid, BlockId b1, BlockId b2) {
  const Vec3& a = grid.center(b1);
  const Vec3& b = grid.center(b2);
  return static_cast<int>(std::lround(std::hypot(a.x() - b.x(), a.y() - b.y())));
}

}  // namespace retract
