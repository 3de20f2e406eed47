#include "retract/config.hpp"

#include <fstream>
#include <set>
#include <stdexcept>

#include "retract/types.hpp"

namespace retract {

std::string_view arm_name(Arm a) { return a == Arm::Psm1 ? "psm1" : "psm2"; }

std::optional<Arm> parse_arm(std::string_view name) {
  if (name == "psm1") return Arm::Psm1;
  if (name == "psm2") return Arm::Psm2;
  return std::nullopt;
}

std::string block_name(BlockId b) { return "b" + std::to_string(b.value); }

std::string_view action_kind_name(ActionKind k) {
  switch (k) {
    case ActionKind::Reach: return "reach";
    case ActionKind::Grasp: return "grasp";
    case ActionKind::Pull: return "pull";
    case ActionKind::Move: return "move";
    case ActionKind::Release: return "release";
  }
  return "?";
}

std::string to_string(const Action& a) {
  std::string s{action_kind_name(a.kind)};
  s += '(';
  s += arm_name(a.arm);
  if (a.block) {
    s += ',';
    s += block_name(*a.block);
  }
  s += ')';
  return s;
}

namespace {

void require(bool ok, const char* what) {
  if (!ok) throw std::invalid_argument(std::string("invalid config: ") + what);
}

}  // namespace

void Config::validate() const {
  require(grid_n >= 2, "grid_n must be >= 2");
  require(delta >= 0.0 && delta <= 1.0, "delta must lie in [0, 1]");
  require(epsilon > 0.0, "epsilon must be > 0");
  require(poisson < 0.5, "poisson must be < 0.5");
  require(poisson >= 0.0, "poisson must be >= 0");
  require(young_modulus > 0.0, "young_modulus must be > 0");
  require(horizon >= 1, "horizon must be >= 1");
  require(control_step > 0.0, "control_step must be > 0");
  require(pull_height > 0.0, "pull_height must be > 0");
  require(grasp_radius > 0.0 && at_radius > 0.0 && close_radius > 0.0, "radii must be > 0");
  require(tissue_dims[0] > 0 && tissue_dims[1] > 0 && tissue_dims[2] > 0, "tissue_dims must be > 0");
  require(mesh_resolution[0] >= 1 && mesh_resolution[1] >= 1 && mesh_resolution[2] >= 1,
          "mesh_resolution must be >= 1");
  require(ap_fraction >= 0.0 && ap_fraction <= 100.0, "ap_fraction must lie in [0, 100]");
  require(w_ap >= 0 && w_roi >= 0, "weights must be nonnegative");
  require(ap_roi_clearance >= 0.0, "ap_roi_clearance must be >= 0");
  require(max_cycles >= 1, "max_cycles must be >= 1");
  require(gripper_closed_deg > 0.0 && gripper_open_deg >= gripper_closed_deg,
          "gripper open angle must not be below the closed threshold");
}

void to_json(nlohmann::json& j, const Config& c) {
  j = nlohmann::json{
      {"grid_n", c.grid_n},
      {"delta", c.delta},
      {"epsilon", c.epsilon},
      {"pull_height", c.pull_height},
      {"grasp_radius", c.grasp_radius},
      {"at_radius", c.at_radius},
      {"close_radius", c.close_radius},
      {"gripper_closed_deg", c.gripper_closed_deg},
      {"gripper_open_deg", c.gripper_open_deg},
      {"tissue_dims", c.tissue_dims},
      {"mesh_resolution", c.mesh_resolution},
      {"young_modulus", c.young_modulus},
      {"poisson", c.poisson},
      {"ap_fraction", c.ap_fraction},
      {"ap_patch_radius", c.ap_patch_radius},
      {"roi_margin", c.roi_margin},
      {"ap_roi_clearance", c.ap_roi_clearance},
      {"w_ap", c.w_ap},
      {"w_roi", c.w_roi},
      {"objective", c.objective == ObjectiveKind::Min ? "min" : "sum"},
      {"ignore_aps", c.ignore_aps},
      {"horizon", c.horizon},
      {"control_step", c.control_step},
      {"force_limit_enabled", c.force_limit_enabled},
      {"max_cycles", c.max_cycles},
      {"seed", c.seed},
  };
}

void from_json(const nlohmann::json& j, Config& c) {
  static const std::set<std::string> known{
      "grid_n", "delta", "epsilon", "pull_height", "grasp_radius", "at_radius", "close_radius",
      "gripper_closed_deg", "gripper_open_deg", "tissue_dims", "mesh_resolution", "young_modulus",
      "poisson", "ap_fraction", "ap_patch_radius", "roi_margin", "ap_roi_clearance", "w_ap", "w_roi", "objective",
      "ignore_aps", "horizon", "control_step", "force_limit_enabled", "max_cycles", "seed"};
  if (!j.is_object()) throw std::invalid_argument("config must be a JSON object");
  for (const auto& [key, _] : j.items()) {
    if (!known.contains(key)) throw std::invalid_argument("unknown config key: " + key);
  }
  auto get = [&](const char* key, auto& field) {
    if (j.contains(key)) j.at(key).get_to(field);
  };
  get("grid_n", c.grid_n);
  get("delta", c.delta);
  get("epsilon", c.epsilon);
  get("pull_height", c.pull_height);
  get("grasp_radius", c.grasp_radius);
  get("at_radius", c.at_radius);
  get("close_radius", c.close_radius);
  get("gripper_closed_deg", c.gripper_closed_deg);
  get("gripper_open_deg", c.gripper_open_deg);
  get("tissue_dims", c.tissue_dims);
  get("mesh_resolution", c.mesh_resolution);
  get("young_modulus", c.young_modulus);
  get("poisson", c.poisson);
  get("ap_fraction", c.ap_fraction);
  get("ap_patch_radius", c.ap_patch_radius);
  get("roi_margin", c.roi_margin);
  get("ap_roi_clearance", c.ap_roi_clearance);
  get("w_ap", c.w_ap);
  get("w_roi", c.w_roi);
  if (j.contains("objective")) {
    const auto s = j.at("objective").get<std::string>();
    if (s == "min") c.objective = ObjectiveKind::Min;
    else if (s == "sum") c.objective = ObjectiveKind::Sum;
    else throw std::invalid_argument("objective must be min or sum");
  }
  get("ignore_aps", c.ignore_aps);
  get("horizon", c.horizon);
  get("control_step", c.control_step);
  get("force_limit_enabled", c.force_limit_enabled);
  get("max_cycles", c.max_cycles);
  get("seed", c.seed);
}

Config load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error(path + ": " + e.what());
  }
  Config c = j.get<Config>();
  c.validate();
  return c;
}

}  // namespace retract
