#pragma once

#include <optional>
#include <vector>

#include "orelnav/landmark_sensor.hpp"

namespace orelnav {

enum class MissionPhase {
  GlobalTakeoff,
  HoverVerify,
  ObjectRelative,
  ReturnToGlobal,
  Done,
};

const char* to_string(MissionPhase phase);

struct GlobalPoseMeasurement {
  double t{0.0};
  Vec3 p{Vec3::Zero()};
  Quat q{Quat::Identity()};
  MeasurementNoise noise;
};

struct InspectionPlan {
  double distance_m{3.3};      // arc radius around the anchor
  double height_m{2.0};        // approach/inspection height
  double sweep_rad{0.8727};    // +/- range around the start bearing (50 deg)
  double angular_step_rad{0.17453};  // 10 deg
  double hover_duration_s{10.0};     // verification hover before switching
  double retreat_distance_m{1.0};    // extra radial leg before switching back
};

struct Waypoint {
  Vec3 p{Vec3::Zero()};
  double yaw{0.0};
};

// Waypoints on the circle of radius plan.distance_m around the anchor's
// world position, z taken from the current pose, ordered from -sweep to
// +sweep relative to the current bearing, each yaw facing the anchor.
// anchor_object_world is the stored (p_OAW, q_OAW) transform.
std::vector<Waypoint> generate_arc_waypoints(const Pose& anchor_object_world,
                                             const InspectionPlan& plan,
                                             const Pose& current);

struct MissionParams {
  InspectionPlan plan;
  // Consecutive non-empty batches required before switching to
  // object-relative navigation.
  int verify_batches{5};
  double waypoint_tolerance_m{0.15};
  // Anchor choice: -1 selects the landmark with the highest world z
  // (insulator at the top); >= 0 forces a slot index.
  int anchor_index{-1};
  bool hold_object_relative{false};  // hover scenarios never return to global
};

// Global <-> object-relative sensor-switching state machine. Drives the
// filter but owns no estimation state of its own beyond the phase, the
// waypoint list, and the global-sensor reference offset.
class MissionController {
 public:
  MissionController(const MissionParams& params, const LandmarkSensorParams& sensor,
                    const Waypoint& approach);

  MissionPhase phase() const { return phase_; }
  bool uses_global_sensor() const;
  bool uses_landmark_sensor() const { return phase_ == MissionPhase::ObjectRelative; }

  // 6-DoF pose update on (p_WI, q_WI); in ReturnToGlobal the measurement is
  // composed with the stored reference offset. Throws std::logic_error
  // outside global phases. Returns the gate decision (innovation statistics).
  GateDecision global_pose_update(FilterState& state,
                                  const GlobalPoseMeasurement& meas);

  // HoverVerify only: count consecutive non-empty batches; once the
  // verification threshold is met, initialize the visible landmarks, pick
  // and fix the anchor, generate the inspection waypoints, and enter
  // ObjectRelative. Returns true when the switch happened.
  bool try_switch_to_object_relative(FilterState& state,
                                     const MeasurementBatch& batch);

  // ObjectRelative only: store the offset between the current estimate and
  // the first global measurement, drop the object states, and enter
  // ReturnToGlobal. The first subsequent global update has zero innovation.
  void switch_to_global(FilterState& state, const GlobalPoseMeasurement& first);

  // Landmark batch processing in ObjectRelative phase (throws otherwise).
  BatchReport landmark_update(FilterState& state, const MeasurementBatch& batch);

  // Waypoint tracking helpers for the vehicle controller.
  const std::vector<Waypoint>& waypoints() const { return waypoints_; }
  std::optional<Waypoint> current_waypoint() const;
  // Called with the current estimate; advances the target waypoint and the
  // GlobalTakeoff -> HoverVerify transition. Marks Done once ReturnToGlobal
  // has held position at the approach point.
  void on_estimate(const FilterState& state);

  bool inspection_complete() const { return inspection_complete_; }
  int consecutive_detections() const { return consecutive_detections_; }
  double first_return_innovation() const { return first_return_innovation_; }

 private:
  MissionParams params_;
  LandmarkSensorParams sensor_;
  MissionPhase phase_{MissionPhase::GlobalTakeoff};
  Waypoint approach_;
  std::vector<Waypoint> waypoints_;
  size_t waypoint_index_{0};
  int consecutive_detections_{0};
  bool inspection_complete_{false};
  std::optional<Pose> global_reference_;  // offset Delta applied in ReturnToGlobal
  bool return_first_update_done_{false};
  double first_return_innovation_{-1.0};
};

}  // namespace orelnav
