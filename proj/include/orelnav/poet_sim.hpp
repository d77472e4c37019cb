#pragma once

#include <cstdint>
#include <vector>

#include "orelnav/estimator_core.hpp"
#include "orelnav/landmark_sensor.hpp"

namespace orelnav {

// True object layout plus the visibility envelope of the emulated detector.
struct SceneConfig {
  std::vector<Pose> object_poses_world;  // T_WOk of each object of interest
  double range_min_m{2.5};
  double range_max_m{4.5};
  double fov_h_half_rad{1.047};  // 60 deg
  double fov_v_half_rad{0.785};  // 45 deg
};

// Statistical stand-in for the learned pose estimator: i.i.d. Gaussian
// translation/rotation noise and per-object dropout at camera rate.
struct PoETNoiseModel {
  Vec3 sigma_t{0.0357, 0.0357, 0.0357};  // [m] per axis
  Vec3 sigma_r{0.0297, 0.0297, 0.0297};  // [rad] per axis
  double p_dropout{0.04};
  double rate_hz{15.0};
  std::uint64_t seed{1};
  // Optional scaling of both sigmas with object distance relative to
  // reference_distance_m (errors grow with distance).
  bool distance_scaling{false};
  double reference_distance_m{3.3};
};

// E[||N(0, I3)||] = sqrt(8/pi); converts a mean-norm error to a per-axis
// sigma for an isotropic 3-dof Gaussian.
double mean_norm_factor_3d();

// Per-axis sigmas matching the reported average translation / rotation
// errors of the detector (rest of the model left at defaults).
PoETNoiseModel calibrate_from_table(double avg_te_m, double avg_re_deg);

// Emulated detector output for one frame: every object inside the range and
// FOV envelope observed through the true transform chain, perturbed, and
// dropped with probability p_dropout. Deterministic in (seed, t).
MeasurementBatch simulate_batch(const Pose& robot_wi,
                                const ExtrinsicState& extrinsics,
                                const SceneConfig& scene,
                                const PoETNoiseModel& noise, double t);

}  // namespace orelnav
