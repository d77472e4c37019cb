#pragma once

#include <Eigen/Core>
#include <vector>

#include "orelnav/estimator_core.hpp"

namespace orelnav {

// One camera-object relative 6-DoF pose: transform of the camera frame with
// respect to the object frame (p_OC, q_OC).
struct RelPoseMeasurement {
  double t{0.0};
  Vec3 p_oc{Vec3::Zero()};
  Quat q_oc{Quat::Identity()};
  int object_hint{-1};  // unused when objects are indistinguishable
};

// All relative poses extracted from one camera frame.
struct MeasurementBatch {
  double t{0.0};
  std::vector<RelPoseMeasurement> measurements;
};

struct MeasurementNoise {
  Vec3 sigma_p{0.1, 0.1, 0.1};          // [m] per axis
  Vec3 sigma_theta{0.087, 0.087, 0.087};  // [rad] per axis

  Eigen::Matrix<double, 6, 6> covariance() const;
};

struct LandmarkSensorParams {
  MeasurementNoise noise;
  double gate_alpha{0.05};
  // Cost charged for assigning a measurement to a free (uninitialized) slot;
  // acts as the distance beyond which spawning a new landmark is cheaper
  // than matching an existing one.
  double match_init_cost{1.0};
  // Near-zero pseudo-measurement noise for the anchor position and yaw rows.
  double pseudo_sigma_p{1e-4};
  double pseudo_sigma_yaw{1e-4};
  bool anchor_rows_enabled{true};
};

struct GateDecision {
  bool accept{false};
  double mahalanobis_sq{0.0};
  double threshold{0.0};
  bool singular{false};
};

struct MatchedMeasurement {
  RelPoseMeasurement meas;
  int landmark{-1};
};

struct MatchResult {
  std::vector<int> meas_to_landmark;         // -1 where discarded
  std::vector<MatchedMeasurement> matched;   // to initialized landmarks
  std::vector<MatchedMeasurement> to_initialize;  // to free slots
};

struct UpdateReport {
  int stacked_rows{0};
  bool pseudo_rows{false};
  double innovation_norm{0.0};
  double dx_norm{0.0};
};

// chi-squared quantile (inverse CDF).
double chi2_quantile(int dof, double prob);

// Mahalanobis gate: accept iff r' S^-1 r <= chi2_quantile(1 - alpha, dim(r)).
// A singular/non-PSD S rejects with the singular flag set.
GateDecision chi2_gate(const Eigen::VectorXd& residual,
                       const Eigen::MatrixXd& innovation_cov, double alpha);

// World-frame position of object k implied by the stored object-world
// transform (the transform inverted).
Vec3 landmark_world_position(const FilterState& state, int k);

// Object-world transform a measurement implies under the current estimate:
//   R_OW = R_OC R_IC' R_WI',  p_OW = p_OC - R_OW (R_WI p_IC + p_WI)
Pose project_measurement_to_world(const FilterState& state,
                                  const RelPoseMeasurement& meas);

// Measurement model h(x) for an initialized landmark:
//   q_OC = q_OW ⊗ q_WI ⊗ q_IC,  p_OC = p_OW + R_OW (p_WI + R_WI p_IC)
RelPoseMeasurement predict_measurement(const FilterState& state, int k);

// 6-vector residual [p_meas - p_pred; 2 * vec/scalar of q_pred^-1 ⊗ q_meas],
// with the error quaternion sign-canonicalized before the division.
Eigen::Matrix<double, 6, 1> measurement_residual(const RelPoseMeasurement& pred,
                                                 const RelPoseMeasurement& meas);

// Analytic Jacobian of the landmark measurement residual with respect to the
// error state (rows: 3 position + 3 rotation).
Eigen::MatrixXd landmark_jacobian(const FilterState& state, int k);

// Anchor pseudo-measurement rows: 3 position residuals plus the yaw row of
// the rotation residual against the stored reference.
Eigen::Vector4d anchor_residual(const FilterState& state);
Eigen::MatrixXd anchor_jacobian(const FilterState& state);

// Initialize object-world k from its first relative pose measurement and the
// current estimate; seeds the covariance block (and cross-covariance) by
// mapping the robot-pose marginal and the measurement noise through the
// initialization transform. Throws on double initialization.
void initialize_landmark(FilterState& state, int k,
                         const RelPoseMeasurement& meas,
                         const MeasurementNoise& noise);

// Hungarian 1-to-1 matching of a batch against landmark slots; measurements
// won by free slots are returned for initialization, surplus measurements
// are discarded.
MatchResult match_measurements(const FilterState& state,
                               const MeasurementBatch& batch,
                               double match_init_cost);

// Joint EKF update over all matched measurements (anchor pseudo rows
// appended when an anchor is set), Joseph-form covariance update, quaternion
// states retracted from the error state. Throws std::runtime_error on a
// non-PSD innovation covariance.
UpdateReport stacked_update(FilterState& state,
                            const std::vector<MatchedMeasurement>& matched,
                            const LandmarkSensorParams& params);

// Store landmark k's current estimate as the fixed pseudo-measurement
// reference. Throws if the landmark is uninitialized.
void set_anchor(FilterState& state, int k);
void clear_anchor(FilterState& state);

// Deactivate all object-worlds (and the anchor); used when handing
// estimation back to a global sensor.
void remove_landmarks(FilterState& state);

struct BatchReport {
  MatchResult match;
  std::vector<GateDecision> gates;  // one per matched-to-initialized entry
  UpdateReport update;
  int initialized{0};
  bool updated{false};
};

// Full per-frame pipeline: match, initialize free-slot winners, gate each
// landmark block, then one stacked update over the survivors.
BatchReport process_batch(FilterState& state, const MeasurementBatch& batch,
                          const LandmarkSensorParams& params);

}  // namespace orelnav
