#pragma once

#include <Eigen/Core>
#include <optional>
#include <vector>

#include "orelnav/geometry.hpp"

namespace orelnav {

// IMU-centric navigation states: pose of the IMU frame I in the world W,
// velocity, and the two IMU biases.
struct CoreState {
  Vec3 p_wi{Vec3::Zero()};
  Vec3 v_wi{Vec3::Zero()};
  Quat q_wi{Quat::Identity()};
  Vec3 b_w{Vec3::Zero()};  // gyro bias [rad/s]
  Vec3 b_a{Vec3::Zero()};  // accel bias [m/s^2]
};

// IMU-camera calibration, carried in the state vector but kept effectively
// constant via a near-zero covariance block.
struct ExtrinsicState {
  Vec3 p_ic{Vec3::Zero()};
  Quat q_ic{Quat::Identity()};
};

// Transform of the world frame with respect to object frame O_k. The object's
// own pose in the world is the inverse of this transform.
struct ObjectWorldState {
  Vec3 p_ow{Vec3::Zero()};
  Quat q_ow{Quat::Identity()};
  bool initialized{false};
};

// Fixed reference pose of the anchor landmark; its position and yaw are held
// to these values through pseudo-measurement rows.
struct AnchorReference {
  int index{-1};
  Vec3 p_ref{Vec3::Zero()};
  Quat q_ref{Quat::Identity()};
};

struct ImuSample {
  double t{0.0};
  Vec3 a_m{Vec3::Zero()};    // specific force, IMU frame [m/s^2]
  Vec3 omega{Vec3::Zero()};  // angular rate, IMU frame [rad/s]
};

// Continuous-time noise densities plus the gravity acceleration vector
// (z-up world, so gravity points along -z).
struct NoiseParams {
  double sigma_na{0.02};     // accel noise [m/s^2/sqrt(Hz)]
  double sigma_nw{0.002};    // gyro noise [rad/s/sqrt(Hz)]
  double sigma_nba{1e-4};    // accel bias random walk
  double sigma_nbw{1e-4};    // gyro bias random walk
  Vec3 gravity{0.0, 0.0, -9.81};
};

// Per-block initial standard deviations for the error-state covariance.
struct InitUncertainty {
  double sigma_p{0.1};
  double sigma_v{0.1};
  double sigma_theta{0.05};
  double sigma_bw{0.01};
  double sigma_ba{0.05};
  double sigma_extrinsic_p{1e-6};
  double sigma_extrinsic_theta{1e-6};
};

// Full filter state: nominal states plus the error-state covariance.
// Error-state ordering (frozen; all Jacobians and tests rely on it):
//   [dp dv dtheta db_w db_a | dp_ic dtheta_ic | dp_o0 dtheta_o0 | ...]
// Attitude errors are 3-vectors retracted as q <- small_angle_quat(dtheta) ⊗ q.
struct FilterState {
  static constexpr int kCoreDim = 15;
  static constexpr int kExtrinsicDim = 6;
  static constexpr int kLandmarkDim = 6;

  double t{0.0};
  CoreState core;
  ExtrinsicState extrinsics;
  std::vector<ObjectWorldState> objects;
  Eigen::MatrixXd P;
  std::optional<AnchorReference> anchor;

  int num_objects() const { return static_cast<int>(objects.size()); }
  int error_dim() const {
    return kCoreDim + kExtrinsicDim + kLandmarkDim * num_objects();
  }
  int landmark_offset(int k) const {
    return kCoreDim + kExtrinsicDim + kLandmarkDim * k;
  }
};

// Keep P numerically symmetric; call after every covariance-touching step.
void symmetrize(Eigen::MatrixXd& p);

// Apply an error-state vector to the nominal state (positions add, attitude
// errors retract through the quaternion exponential). Covariance untouched.
FilterState retract(const FilterState& state, const Eigen::VectorXd& dx);

// Build a filter with the core set from the initial pose (zero velocity and
// biases), all objects uninitialized, and a block-diagonal covariance.
// Throws std::invalid_argument for non-positive std devs or n_objects < 1.
FilterState init_filter(const Pose& initial_pose, const InitUncertainty& init,
                        const ExtrinsicState& extrinsics, int n_objects);

// Strapdown mean propagation and first-order error-state covariance
// propagation. Throws std::invalid_argument on dt <= 0, dt > 0.1, or a
// non-monotone sample timestamp.
FilterState propagate(const FilterState& state, const ImuSample& imu,
                      const NoiseParams& noise, double dt);

// Joseph-form EKF update for a stacked residual/Jacobian pair with diagonal
// measurement noise; retracts the correction into the nominal state and
// returns it. Throws std::runtime_error on a non-PSD innovation covariance.
Eigen::VectorXd apply_update(FilterState& state, const Eigen::MatrixXd& h,
                             const Eigen::VectorXd& r,
                             const Eigen::VectorXd& noise_diag);

}  // namespace orelnav
