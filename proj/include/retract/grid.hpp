#pragma once

#include <optional>
#include <vector>

#include "retract/config.hpp"
#include "retract/types.hpp"

namespace retract {

/// N x N candidate grasp cells tiling the rest footprint.
struct BlockGrid {
  int n = 0;
  double cell_dx = 0.0;
  double cell_dy = 0.0;
  double origin_x = 0.0;  // footprint corner (min x, min y)
  double origin_y = 0.0;
  std::vector<Vec3> centers;  // rest top-surface midpoints, indexed by BlockId

  int size() const { return static_cast<int>(centers.size()); }
  const Vec3& center(BlockId b) const { return centers[static_cast<std::size_t>(b.value)]; }
  bool valid(BlockId b) const { return b.value >= 0 && b.value < size(); }
};

BlockGrid make_grid(const Config& config);

/// Cell containing (p.x, p.y). Points on a shared edge go to the lower index.
std::optional<BlockId> block_of_point(const BlockGrid& grid, const Vec3& p);

/// Rest-frame xy distance between centers, rounded to whole millimetres.
int block_distance(const BlockGrid& grid, BlockId b1, BlockId b2);

}  // namespace retract
