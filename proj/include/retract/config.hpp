#pragma once

#include <array>
#include <string>

#include <json.hpp>

namespace retract {

enum class ObjectiveKind { Min, Sum };

struct Config {
  int grid_n = 7;
  double delta = 0.7;
  double epsilon = 0.5;         // N
  double pull_height = 50.0;    // mm
  double grasp_radius = 5.0;    // mm, tissue nodes captured by a closing gripper
  double at_radius = 5.0;       // mm, tool-to-block distance for at(A, B)
  double close_radius = 10.0;   // mm, ROI neighbourhood for visibility
  double gripper_closed_deg = 20.0;
  double gripper_open_deg = 60.0;
  std::array<double, 3> tissue_dims{100.0, 120.0, 5.0};  // mm
  std::array<int, 3> mesh_resolution{20, 24, 1};
  double young_modulus = 3000.0;  // Pa
  double poisson = 0.45;
  double ap_fraction = 50.0;  // percent of bottom nodes attached
  double ap_patch_radius = 10.0;
  double roi_margin = 10.0;
  double ap_roi_clearance = 10.0;  // mm between a patch edge and the ROI
  int w_ap = 1;
  int w_roi = 1;
  ObjectiveKind objective = ObjectiveKind::Min;
  bool ignore_aps = false;  // initial grasp selection ignores attachment distance
  int horizon = 6;
  double control_step = 1.0;  // mm
  bool force_limit_enabled = true;
  int max_cycles = 10;
  unsigned long long seed = 0;

  /// Throws std::invalid_argument naming the first violated field.
  void validate() const;
};

void to_json(nlohmann::json& j, const Config& c);
/// Missing keys keep their defaults; unknown keys are rejected.
void from_json(const nlohmann::json& j, Config& c);

Config load_config(const std::string& path);

}  // namespace retract
