#include "orelnav/config.hpp"

#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

namespace orelnav {

namespace {

constexpr double kDegToRad = M_PI / 180.0;

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r\n");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r\n");
  return s.substr(begin, end - begin + 1);
}

double parse_double(const std::string& key, const std::string& value) {
  try {
    size_t pos = 0;
    const double d = std::stod(value, &pos);
    if (trim(value.substr(pos)).empty()) return d;
  } catch (const std::exception&) {
  }
  throw std::invalid_argument("config: bad number for '" + key + "': " + value);
}

int parse_int(const std::string& key, const std::string& value) {
  try {
    size_t pos = 0;
    const int i = std::stoi(value, &pos);
    if (trim(value.substr(pos)).empty()) return i;
  } catch (const std::exception&) {
  }
  throw std::invalid_argument("config: bad integer for '" + key + "': " + value);
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1") return true;
  if (value == "false" || value == "0") return false;
  throw std::invalid_argument("config: bad boolean for '" + key + "': " + value);
}

std::vector<double> parse_numbers(const std::string& key,
                                  const std::string& value) {
  std::istringstream iss(value);
  std::vector<double> out;
  double d = 0.0;
  while (iss >> d) out.push_back(d);
  if (out.empty() || !iss.eof())
    throw std::invalid_argument("config: bad number list for '" + key + "'");
  return out;
}

Vec3 parse_vec3(const std::string& key, const std::string& value) {
  const auto nums = parse_numbers(key, value);
  if (nums.size() != 3)
    throw std::invalid_argument("config: '" + key + "' needs 3 numbers");
  return Vec3(nums[0], nums[1], nums[2]);
}

Quat rpy_deg_to_quat(const Vec3& rpy_deg) {
  const Vec3 rpy = rpy_deg * kDegToRad;
  return Quat(Eigen::AngleAxisd(rpy.z(), Vec3::UnitZ()) *
              Eigen::AngleAxisd(rpy.y(), Vec3::UnitY()) *
              Eigen::AngleAxisd(rpy.x(), Vec3::UnitX()));
}

// Scene objects arrive as "objectK = x y z [yaw_deg]" keys; they replace the
// default layout wholesale when any is present.
struct SceneOverride {
  std::map<int, Pose> objects;
  bool any() const { return !objects.empty(); }
};

void set_key(ScenarioConfig& cfg, SceneOverride& scene_override,
             const std::string& section, const std::string& key,
             const std::string& value) {
  const std::string full = section + "." + key;
  if (section == "scene") {
    if (key.rfind("object", 0) == 0) {
      const std::string idx_str = key.substr(6);
      int idx = -1;
      try {
        idx = std::stoi(idx_str);
      } catch (const std::exception&) {
        throw std::invalid_argument("config: unknown key '" + full + "'");
      }
      const auto nums = parse_numbers(full, value);
      if (nums.size() != 3 && nums.size() != 4)
        throw std::invalid_argument("config: '" + full +
                                    "' needs x y z [yaw_deg]");
      const double yaw = nums.size() == 4 ? nums[3] * kDegToRad : 0.0;
      scene_override.objects[idx] =
          Pose(Vec3(nums[0], nums[1], nums[2]),
               Quat(Eigen::AngleAxisd(yaw, Vec3::UnitZ())));
      return;
    }
    if (key == "range_min_m") cfg.scene.range_min_m = parse_double(full, value);
    else if (key == "range_max_m") cfg.scene.range_max_m = parse_double(full, value);
    else if (key == "fov_h_half_deg")
      cfg.scene.fov_h_half_rad = parse_double(full, value) * kDegToRad;
    else if (key == "fov_v_half_deg")
      cfg.scene.fov_v_half_rad = parse_double(full, value) * kDegToRad;
    else throw std::invalid_argument("config: unknown key '" + full + "'");
  } else if (section == "plan") {
    if (key == "distance_m") cfg.plan.distance_m = parse_double(full, value);
    else if (key == "height_m") cfg.plan.height_m = parse_double(full, value);
    else if (key == "sweep_deg")
      cfg.plan.sweep_rad = parse_double(full, value) * kDegToRad;
    else if (key == "step_deg")
      cfg.plan.angular_step_rad = parse_double(full, value) * kDegToRad;
    else if (key == "hover_duration_s")
      cfg.plan.hover_duration_s = parse_double(full, value);
    else if (key == "retreat_m")
      cfg.plan.retreat_distance_m = parse_double(full, value);
    else throw std::invalid_argument("config: unknown key '" + full + "'");
  } else if (section == "imu") {
    if (key == "rate_hz") cfg.imu_rate_hz = parse_double(full, value);
    else if (key == "accel_noise_density")
      cfg.imu_noise.sigma_na = parse_double(full, value);
    else if (key == "gyro_noise_density")
      cfg.imu_noise.sigma_nw = parse_double(full, value);
    else if (key == "accel_bias_walk")
      cfg.imu_noise.sigma_nba = parse_double(full, value);
    else if (key == "gyro_bias_walk")
      cfg.imu_noise.sigma_nbw = parse_double(full, value);
    else if (key == "gravity") cfg.imu_noise.gravity = parse_vec3(full, value);
    else if (key == "true_gyro_bias")
      cfg.true_gyro_bias = parse_vec3(full, value);
    else if (key == "true_accel_bias")
      cfg.true_accel_bias = parse_vec3(full, value);
    else throw std::invalid_argument("config: unknown key '" + full + "'");
  } else if (section == "poet") {
    if (key == "rate_hz") cfg.poet.rate_hz = parse_double(full, value);
    else if (key == "avg_te_m")
      cfg.poet.sigma_t = calibrate_from_table(parse_double(full, value), 0.0).sigma_t;
    else if (key == "avg_re_deg")
      cfg.poet.sigma_r = calibrate_from_table(0.0, parse_double(full, value)).sigma_r;
    else if (key == "dropout") cfg.poet.p_dropout = parse_double(full, value);
    else if (key == "distance_scaling")
      cfg.poet.distance_scaling = parse_bool(full, value);
    else if (key == "reference_distance_m")
      cfg.poet.reference_distance_m = parse_double(full, value);
    else throw std::invalid_argument("config: unknown key '" + full + "'");
  } else if (section == "filter") {
    if (key == "meas_sigma_p_m")
      cfg.meas_noise.sigma_p.setConstant(parse_double(full, value));
    else if (key == "meas_sigma_theta_deg")
      cfg.meas_noise.sigma_theta.setConstant(parse_double(full, value) * kDegToRad);
    else if (key == "gate_alpha") cfg.gate_alpha = parse_double(full, value);
    else if (key == "match_init_cost_m")
      cfg.match_init_cost = parse_double(full, value);
    else if (key == "pseudo_sigma_p_m")
      cfg.pseudo_sigma_p = parse_double(full, value);
    else if (key == "pseudo_sigma_yaw_rad")
      cfg.pseudo_sigma_yaw = parse_double(full, value);
    else if (key == "anchor_enabled")
      cfg.anchor_enabled = parse_bool(full, value);
    else if (key == "init_sigma_p") cfg.init.sigma_p = parse_double(full, value);
    else if (key == "init_sigma_v") cfg.init.sigma_v = parse_double(full, value);
    else if (key == "init_sigma_theta")
      cfg.init.sigma_theta = parse_double(full, value);
    else if (key == "init_sigma_bw") cfg.init.sigma_bw = parse_double(full, value);
    else if (key == "init_sigma_ba") cfg.init.sigma_ba = parse_double(full, value);
    else if (key == "init_sigma_extrinsic_p")
      cfg.init.sigma_extrinsic_p = parse_double(full, value);
    else if (key == "init_sigma_extrinsic_theta")
      cfg.init.sigma_extrinsic_theta = parse_double(full, value);
    else if (key == "extrinsic_p_ic")
      cfg.extrinsics.p_ic = parse_vec3(full, value);
    else if (key == "extrinsic_rpy_ic_deg")
      cfg.extrinsics.q_ic = rpy_deg_to_quat(parse_vec3(full, value));
    else if (key == "global_rate_hz")
      cfg.global_rate_hz = parse_double(full, value);
    else if (key == "global_sigma_p_m")
      cfg.global_noise.sigma_p.setConstant(parse_double(full, value));
    else if (key == "global_sigma_theta_deg")
      cfg.global_noise.sigma_theta.setConstant(parse_double(full, value) * kDegToRad);
    else throw std::invalid_argument("config: unknown key '" + full + "'");
  } else if (section == "run") {
    if (key == "mode") {
      if (value == "hover") cfg.mode = ScenarioMode::Hover;
      else if (value == "arc") cfg.mode = ScenarioMode::Arc;
      else if (value == "offline-replay") cfg.mode = ScenarioMode::OfflineReplay;
      else throw std::invalid_argument("config: unknown mode '" + value + "'");
    } else if (key == "duration_s") cfg.duration_s = parse_double(full, value);
    else if (key == "seed")
      cfg.seed = static_cast<std::uint64_t>(parse_int(full, value));
    else if (key == "approach_bearing_deg")
      cfg.approach_bearing_rad = parse_double(full, value) * kDegToRad;
    else if (key == "takeoff_offset")
      cfg.takeoff_offset = parse_vec3(full, value);
    else if (key == "verify_batches")
      cfg.verify_batches = parse_int(full, value);
    else if (key == "waypoint_tolerance_m")
      cfg.waypoint_tolerance_m = parse_double(full, value);
    else if (key == "max_velocity_mps")
      cfg.max_velocity_mps = parse_double(full, value);
    else if (key == "max_yaw_rate_rps")
      cfg.max_yaw_rate_rps = parse_double(full, value);
    else if (key == "divergence_abort_m")
      cfg.divergence_abort_m = parse_double(full, value);
    else if (key == "anchor_index") cfg.anchor_index = parse_int(full, value);
    else throw std::invalid_argument("config: unknown key '" + full + "'");
  } else {
    throw std::invalid_argument("config: unknown section '" + section + "'");
  }
}

void finish_scene(ScenarioConfig& cfg, const SceneOverride& scene_override) {
  if (!scene_override.any()) return;
  cfg.scene.object_poses_world.clear();
  int expected = 0;
  for (const auto& [idx, pose] : scene_override.objects) {
    if (idx != expected)
      throw std::invalid_argument(
          "config: scene objects must be numbered contiguously from object0");
    cfg.scene.object_poses_world.push_back(pose);
    ++expected;
  }
}

}  // namespace

ScenarioConfig default_scenario() {
  ScenarioConfig cfg;
  // Mock-up power pole: two crossarm insulators and one on top.
  cfg.scene.object_poses_world = {
      Pose(Vec3(0.0, 0.0, 3.2), Quat::Identity()),
      Pose(Vec3(-0.8, 0.0, 2.6), Quat::Identity()),
      Pose(Vec3(0.8, 0.0, 2.6), Quat::Identity()),
  };
  cfg.poet = calibrate_from_table(0.057, 2.72);
  cfg.meas_noise.sigma_p.setConstant(0.2);
  cfg.meas_noise.sigma_theta.setConstant(10.0 * kDegToRad);
  cfg.global_noise.sigma_p.setConstant(0.05);
  cfg.global_noise.sigma_theta.setConstant(2.0 * kDegToRad);
  cfg.extrinsics.p_ic = Vec3(0.1, 0.0, 0.0);
  // Camera optical axis along body +x.
  cfg.extrinsics.q_ic = rpy_deg_to_quat(Vec3(-90.0, 0.0, -90.0));
  cfg.takeoff_offset = Vec3(0.5, -1.5, -1.0);
  return cfg;
}

ScenarioConfig parse_scenario(const std::string& text) {
  ScenarioConfig cfg = default_scenario();
  SceneOverride scene_override;
  std::istringstream iss(text);
  std::string line;
  std::string section;
  int line_no = 0;
  while (std::getline(iss, line)) {
    ++line_no;
    const auto comment = line.find_first_of("#;");
    if (comment != std::string::npos) line = line.substr(0, comment);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw std::invalid_argument("config: malformed section at line " +
                                    std::to_string(line_no));
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("config: expected key=value at line " +
                                  std::to_string(line_no));
    if (section.empty())
      throw std::invalid_argument("config: key outside any section at line " +
                                  std::to_string(line_no));
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    set_key(cfg, scene_override, section, key, value);
  }
  finish_scene(cfg, scene_override);
  return cfg;
}

ScenarioConfig load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in)
    throw std::invalid_argument("config: cannot open file '" + path + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_scenario(buffer.str());
}

void apply_override(ScenarioConfig& cfg, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos)
    throw std::invalid_argument("override: expected section.key=value, got '" +
                                assignment + "'");
  const std::string path = trim(assignment.substr(0, eq));
  const std::string value = trim(assignment.substr(eq + 1));
  const auto dot = path.find('.');
  if (dot == std::string::npos)
    throw std::invalid_argument("override: expected section.key=value, got '" +
                                assignment + "'");
  SceneOverride scene_override;
  set_key(cfg, scene_override, path.substr(0, dot), path.substr(dot + 1), value);
  if (scene_override.any())
    throw std::invalid_argument(
        "override: scene objects cannot be overridden individually");
}

}  // namespace orelnav
