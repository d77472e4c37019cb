#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "orelnav/mission.hpp"
#include "orelnav/poet_sim.hpp"

namespace orelnav {

enum class ScenarioMode { Hover, Arc, OfflineReplay };

const char* to_string(ScenarioMode mode);

// Declarative description of one experiment; parsed from the sectioned
// key-value config file (see config.hpp) and fully determines a run
// together with the seed.
struct ScenarioConfig {
  // [scene]
  SceneConfig scene;
  // [plan]
  InspectionPlan plan;
  // [imu]
  double imu_rate_hz{200.0};
  NoiseParams imu_noise;
  Vec3 true_gyro_bias{Vec3::Zero()};
  Vec3 true_accel_bias{Vec3::Zero()};
  // [poet]
  PoETNoiseModel poet;
  // [filter]
  MeasurementNoise meas_noise;        // landmark sensor tuning
  double gate_alpha{0.05};
  double match_init_cost{1.0};
  double pseudo_sigma_p{1e-4};
  double pseudo_sigma_yaw{1e-4};
  bool anchor_enabled{true};
  InitUncertainty init;
  ExtrinsicState extrinsics;
  double global_rate_hz{10.0};
  MeasurementNoise global_noise;
  // [run]
  ScenarioMode mode{ScenarioMode::Arc};
  double duration_s{60.0};
  std::uint64_t seed{1};
  double approach_bearing_rad{-M_PI / 2.0};
  Vec3 takeoff_offset{Vec3::Zero()};
  int verify_batches{5};
  double waypoint_tolerance_m{0.15};
  double max_velocity_mps{0.5};
  double max_yaw_rate_rps{0.5};
  double divergence_abort_m{5.0};
  int anchor_index{-1};

  Vec3 scene_center() const;        // mean object position (x, y), z = 0
  Waypoint approach_waypoint() const;
  LandmarkSensorParams sensor_params() const;
  MissionParams mission_params() const;
};

// Exact kinematic ground truth advanced tick-by-tick by the waypoint
// tracker; attitude is yaw-only, acceleration piecewise constant per tick.
struct UavTruthState {
  double t{0.0};
  Vec3 p{Vec3::Zero()};
  Vec3 v{Vec3::Zero()};
  Quat q{Quat::Identity()};
  Vec3 a_world{Vec3::Zero()};
  Vec3 omega_body{Vec3::Zero()};
};

// Inverse of the propagation model: specific force and body rates that a
// perfect strapdown integration maps back onto the truth. Pass rng = nullptr
// for noiseless samples. accel/gyro noise are per-sample standard deviations.
ImuSample synthesize_imu(const UavTruthState& truth, const Vec3& gyro_bias,
                         const Vec3& accel_bias, const Vec3& gravity,
                         std::mt19937_64* rng = nullptr,
                         double accel_noise_std = 0.0,
                         double gyro_noise_std = 0.0);

struct LogRecord {
  double t{0.0};
  Pose truth;
  Vec3 truth_v{Vec3::Zero()};
  Pose est;
  Eigen::Matrix<double, 15, 1> cov_diag{Eigen::Matrix<double, 15, 1>::Zero()};
  MissionPhase phase{MissionPhase::GlobalTakeoff};
  int batch_size{-1};  // measurements fused at this tick, -1 when none
};

// Raw detector error sample against ground truth (diagnostic series).
struct RawErrorSample {
  double t{0.0};
  double te_m{0.0};
  double re_deg{0.0};
};

struct FlightLog {
  std::vector<LogRecord> records;
  // Recorded sensor streams (inputs of the estimator, replayable offline).
  std::vector<ImuSample> imu;
  std::vector<MeasurementBatch> batches;
  std::vector<GlobalPoseMeasurement> globals;
  std::vector<std::vector<RawErrorSample>> raw_errors;  // per object
  bool diverged{false};
  bool completed_waypoints{false};
  double or_switch_time{-1.0};
  double global_switch_time{-1.0};
  double or_switch_jump_m{-1.0};   // estimate discontinuity across the switch
  double global_switch_jump_m{-1.0};
  double first_return_innovation{-1.0};
};

struct TruthSample {
  double t{0.0};
  Pose pose;
  Vec3 v{Vec3::Zero()};
};

struct RecordedStreams {
  std::vector<ImuSample> imu;
  std::vector<MeasurementBatch> batches;
  std::vector<GlobalPoseMeasurement> globals;
  std::vector<TruthSample> truth;
};

RecordedStreams streams_from_log(const FlightLog& log);

// Deterministic closed-loop run: truth propagation, sensor synthesis,
// mission phase machine, and estimator wiring at IMU rate.
FlightLog run_closed_loop(const ScenarioConfig& cfg);

// Replay recorded streams through the estimator and mission logic without
// controller feedback. Throws std::invalid_argument on non-monotone streams.
FlightLog run_offline(const ScenarioConfig& cfg, const RecordedStreams& streams);

struct Metrics {
  double rmse_pos_m{0.0};
  double rmse_pos_std{0.0};
  double rmse_rot_deg{0.0};
  double rmse_rot_std{0.0};
  double max_pe_m{0.0};
  double mean_pos_m{0.0};   // average position error (hover-table style)
  double mean_rot_deg{0.0};
  int n_samples{0};
  std::vector<double> raw_te_mean_m;    // per object
  std::vector<double> raw_re_mean_deg;  // per object
};

// Error statistics over the object-relative segment of a log. Throws
// std::invalid_argument when the log has no such segment.
Metrics compute_metrics(const FlightLog& log);

}  // namespace orelnav
