#include "orelnav/mission.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace orelnav {

const char* to_string(MissionPhase phase) {
  switch (phase) {
    case MissionPhase::GlobalTakeoff: return "GlobalTakeoff";
    case MissionPhase::HoverVerify: return "HoverVerify";
    case MissionPhase::ObjectRelative: return "ObjectRelative";
    case MissionPhase::ReturnToGlobal: return "ReturnToGlobal";
    case MissionPhase::Done: return "Done";
  }
  return "Unknown";
}

std::vector<Waypoint> generate_arc_waypoints(const Pose& anchor_object_world,
                                             const InspectionPlan& plan,
                                             const Pose& current) {
  if (!(plan.distance_m > 0.0))
    throw std::invalid_argument("generate_arc_waypoints: degenerate distance");
  if (plan.sweep_rad > 0.0 && !(plan.angular_step_rad > 0.0))
    throw std::invalid_argument("generate_arc_waypoints: non-positive step");

  const Vec3 center = anchor_object_world.inverse().p;
  const double bearing0 =
      std::atan2(current.p.y() - center.y(), current.p.x() - center.x());
  const double z = current.p.z();

  int steps = 0;
  if (plan.sweep_rad > 0.0)
    steps = static_cast<int>(std::round(plan.sweep_rad / plan.angular_step_rad));

  std::vector<Waypoint> waypoints;
  waypoints.reserve(static_cast<size_t>(2 * steps + 1));
  for (int k = -steps; k <= steps; ++k) {
    const double bearing = bearing0 + k * plan.angular_step_rad;
    Waypoint wp;
    wp.p = Vec3(center.x() + plan.distance_m * std::cos(bearing),
                center.y() + plan.distance_m * std::sin(bearing), z);
    wp.yaw = wrap_angle(bearing + M_PI);  // camera axis toward the anchor
    waypoints.push_back(wp);
  }
  return waypoints;
}

MissionController::MissionController(const MissionParams& params,
                                     const LandmarkSensorParams& sensor,
                                     const Waypoint& approach)
    : params_(params), sensor_(sensor), approach_(approach) {}

bool MissionController::uses_global_sensor() const {
  return phase_ == MissionPhase::GlobalTakeoff ||
         phase_ == MissionPhase::HoverVerify ||
         phase_ == MissionPhase::ReturnToGlobal ||
         phase_ == MissionPhase::Done;
}

GateDecision MissionController::global_pose_update(
    FilterState& state, const GlobalPoseMeasurement& meas) {
  if (!uses_global_sensor())
    throw std::logic_error("global_pose_update: global sensor is switched off");

  Pose corrected(meas.p, meas.q);
  if (phase_ == MissionPhase::ReturnToGlobal && global_reference_)
    corrected = (*global_reference_) * corrected;

  const int dim = state.error_dim();
  Eigen::VectorXd r(6);
  r.head<3>() = corrected.p - state.core.p_wi;
  const Quat err = canonical(state.core.q_wi.conjugate() * corrected.q);
  r.tail<3>() = 2.0 * err.vec() / err.w();

  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(6, dim);
  h.block<3, 3>(0, 0) = Mat3::Identity();
  h.block<3, 3>(3, 6) = state.core.q_wi.toRotationMatrix().transpose();

  Eigen::VectorXd noise_diag(6);
  noise_diag.head<3>() = meas.noise.sigma_p.cwiseProduct(meas.noise.sigma_p);
  noise_diag.tail<3>() =
      meas.noise.sigma_theta.cwiseProduct(meas.noise.sigma_theta);

  const Eigen::MatrixXd s =
      (h * state.P * h.transpose() + Eigen::MatrixXd(noise_diag.asDiagonal()));
  const GateDecision gate = chi2_gate(r, s, sensor_.gate_alpha);
  if (phase_ == MissionPhase::ReturnToGlobal && !return_first_update_done_) {
    return_first_update_done_ = true;
    first_return_innovation_ = r.norm();
  }
  if (gate.accept) apply_update(state, h, r, noise_diag);
  return gate;
}

bool MissionController::try_switch_to_object_relative(
    FilterState& state, const MeasurementBatch& batch) {
  if (phase_ != MissionPhase::HoverVerify)
    throw std::logic_error("try_switch_to_object_relative: not in HoverVerify");

  if (batch.measurements.empty()) {
    consecutive_detections_ = 0;
    return false;
  }
  ++consecutive_detections_;
  if (consecutive_detections_ < params_.verify_batches) return false;

  // Initialize every visible object; the anchor is fixed at its freshly
  // initialized estimate.
  const MatchResult match =
      match_measurements(state, batch, sensor_.match_init_cost);
  for (const MatchedMeasurement& mm : match.to_initialize)
    initialize_landmark(state, mm.landmark, mm.meas, sensor_.noise);

  int anchor = params_.anchor_index;
  if (anchor < 0) {
    double best_z = -std::numeric_limits<double>::infinity();
    for (int k = 0; k < state.num_objects(); ++k) {
      if (!state.objects[static_cast<size_t>(k)].initialized) continue;
      const double z = landmark_world_position(state, k).z();
      if (z > best_z) {
        best_z = z;
        anchor = k;
      }
    }
  }
  if (anchor < 0 || !state.objects[static_cast<size_t>(anchor)].initialized)
    return false;  // nothing usable in view yet
  set_anchor(state, anchor);

  const AnchorReference& ref = *state.anchor;
  const Pose current(state.core.p_wi, state.core.q_wi);
  waypoints_ =
      generate_arc_waypoints(Pose(ref.p_ref, ref.q_ref), params_.plan, current);
  if (!params_.hold_object_relative && params_.plan.retreat_distance_m > 0.0) {
    // Radial retreat leg before handing back to the global sensor.
    const Vec3 center = Pose(ref.p_ref, ref.q_ref).inverse().p;
    Waypoint retreat = waypoints_.back();
    const Vec3 radial =
        (retreat.p - Vec3(center.x(), center.y(), retreat.p.z())).normalized();
    retreat.p += params_.plan.retreat_distance_m * radial;
    waypoints_.push_back(retreat);
  }
  waypoint_index_ = 0;
  inspection_complete_ = false;
  phase_ = MissionPhase::ObjectRelative;
  return true;
}

void MissionController::switch_to_global(FilterState& state,
                                         const GlobalPoseMeasurement& first) {
  if (phase_ != MissionPhase::ObjectRelative)
    throw std::logic_error("switch_to_global: not in ObjectRelative");
  const Pose estimate(state.core.p_wi, state.core.q_wi);
  global_reference_ = estimate * Pose(first.p, first.q).inverse();
  remove_landmarks(state);
  return_first_update_done_ = false;
  phase_ = MissionPhase::ReturnToGlobal;
}

BatchReport MissionController::landmark_update(FilterState& state,
                                               const MeasurementBatch& batch) {
  if (phase_ != MissionPhase::ObjectRelative)
    throw std::logic_error("landmark_update: landmark sensor is switched off");
  return process_batch(state, batch, sensor_);
}

std::optional<Waypoint> MissionController::current_waypoint() const {
  switch (phase_) {
    case MissionPhase::GlobalTakeoff:
    case MissionPhase::HoverVerify:
      return approach_;
    case MissionPhase::ObjectRelative:
      if (waypoint_index_ < waypoints_.size()) return waypoints_[waypoint_index_];
      return waypoints_.empty() ? approach_ : waypoints_.back();
    case MissionPhase::ReturnToGlobal:
    case MissionPhase::Done:
      return waypoints_.empty() ? approach_ : waypoints_.back();
  }
  return std::nullopt;
}

void MissionController::on_estimate(const FilterState& state) {
  const Vec3 p = state.core.p_wi;
  switch (phase_) {
    case MissionPhase::GlobalTakeoff:
      if ((p - approach_.p).norm() < params_.waypoint_tolerance_m)
        phase_ = MissionPhase::HoverVerify;
      break;
    case MissionPhase::ObjectRelative:
      while (waypoint_index_ < waypoints_.size() &&
             (p - waypoints_[waypoint_index_].p).norm() <
                 params_.waypoint_tolerance_m) {
        ++waypoint_index_;
      }
      if (waypoint_index_ >= waypoints_.size() && !params_.hold_object_relative)
        inspection_complete_ = true;
      break;
    case MissionPhase::ReturnToGlobal:
      if (return_first_update_done_ && !waypoints_.empty() &&
          (p - waypoints_.back().p).norm() < params_.waypoint_tolerance_m)
        phase_ = MissionPhase::Done;
      break;
    default:
      break;
  }
}

}  // namespace orelnav
