#include "retract/scenario.hpp"

#include <cmath>
#include <random>

namespace retract {

bool in_any_patch(const std::vector<ApPatch>& patches, double x, double y) {
  for (const auto& p : patches) {
    const double dx = x - p.center.x();
    const double dy = y - p.center.y();
    if (dx * dx + dy * dy < p.radius * p.radius) return true;
  }
  return false;
}

namespace {

std::vector<std::pair<double, double>> bottom_lattice(const Config& config) {
  const auto [sx, sy, sz] = config.tissue_dims;
  const int nx = config.mesh_resolution[0];
  const int ny = config.mesh_resolution[1];
  std::vector<std::pair<double, double>> pts;
  pts.reserve(static_cast<std::size_t>((nx + 1) * (ny + 1)));
  for (int j = 0; j <= ny; ++j) {
    for (int i = 0; i <= nx; ++i) {
      pts.emplace_back(-sx / 2.0 + sx * i / nx, -sy / 2.0 + sy * j / ny);
    }
  }
  return pts;
}

constexpr int kMaxPatchDraws = 20000;

}  // namespace

double fixed_bottom_fraction(const Config& config, const std::vector<ApPatch>& patches) {
  const auto pts = bottom_lattice(config);
  std::size_t fixed = 0;
  for (const auto& [x, y] : pts) fixed += in_any_patch(patches, x, y) ? 1 : 0;
  return static_cast<double>(fixed) / static_cast<double>(pts.size());
}

Scenario generate_scenario(const Config& config, unsigned long long seed) {
  std::mt19937_64 rng(seed);
  const auto [sx, sy, sz] = config.tissue_dims;
  const double margin = config.roi_margin;
  std::uniform_real_distribution<double> roi_x(-sx / 2.0 + margin, sx / 2.0 - margin);
  std::uniform_real_distribution<double> roi_y(-sy / 2.0 + margin, sy / 2.0 - margin);

  Scenario s;
  const double rx = roi_x(rng);
  const double ry = roi_y(rng);
  s.roi = Vec3(rx, ry, 0.0);

  const double target = config.ap_fraction / 100.0;
  if (target <= 0.0) return s;

  const auto pts = bottom_lattice(config);
  std::vector<bool> covered(pts.size(), false);
  std::size_t fixed = 0;
  const double r = config.ap_patch_radius;
  const double keep_clear = r + config.ap_roi_clearance;
  std::uniform_real_distribution<double> px(-sx / 2.0, sx / 2.0);
  std::uniform_real_distribution<double> py(-sy / 2.0, sy / 2.0);

  for (int draw = 0; draw < kMaxPatchDraws; ++draw) {
    const double cx = px(rng);
    const double cy = py(rng);
    if (std::hypot(cx - rx, cy - ry) < keep_clear) continue;
    s.patches.push_back(ApPatch{Vec3(cx, cy, 0.0), r});
    for (std::size_t i = 0; i < pts.size(); ++i) {
      if (covered[i]) continue;
      const double dx = pts[i].first - cx;
      const double dy = pts[i].second - cy;
      if (dx * dx + dy * dy < r * r) {
        covered[i] = true;
        ++fixed;
      }
    }
    if (static_cast<double>(fixed) >= target * static_cast<double>(pts.size())) return s;
  }
  throw ScenarioError("attachment fraction " + std::to_string(config.ap_fraction) +
                      "% not reachable after " + std::to_string(kMaxPatchDraws) + " patch draws");
}

}  // namespace retract
