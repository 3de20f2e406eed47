#pragma once

#include <stdexcept>
#include <vector>

#include "retract/config.hpp"
#include "retract/types.hpp"

namespace retract {

struct ApPatch {
  Vec3 center = Vec3::Zero();  // on the bottom plane
  double radius = 0.0;
};

struct Scenario {
  Vec3 roi = Vec3::Zero();
  std::vector<ApPatch> patches;
};

class ScenarioError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// True when the bottom-plane xy point lies strictly inside any patch.
bool in_any_patch(const std::vector<ApPatch>& patches, double x, double y);

/// Fraction of bottom lattice nodes of the configured mesh covered by patches.
double fixed_bottom_fraction(const Config& config, const std::vector<ApPatch>& patches);

/// Seeded ROI and attachment patches. Patches never cover the ROI neighbourhood
/// (their discs stay ap_roi_clearance clear of the ROI); throws ScenarioError when
/// the requested fraction cannot be reached within the draw budget.
Scenario generate_scenario(const Config& config, unsigned long long seed);

}  // namespace retract
