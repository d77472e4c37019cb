#include "orelnav/sim_harness.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace orelnav {

namespace {

constexpr double kTimeEps = 1e-9;
constexpr double kPosGainPerS = 1.0;     // waypoint tracker P gain
constexpr double kYawGain = 1.5;
constexpr double kVelocityLagS = 0.3;    // first-order velocity response
constexpr double kAccelCap = 2.0;        // [m/s^2]

double clamp_mag(double x, double cap) { return std::clamp(x, -cap, cap); }

Quat yaw_quat(double yaw) {
  return Quat(Eigen::AngleAxisd(yaw, Vec3::UnitZ()));
}

// Exact tick-wise truth integration: acceleration and body rate are held
// constant over each tick, so strapdown reconstruction has no model error.
struct TruthStepper {
  UavTruthState s;
  double yaw{0.0};

  void step(const Vec3& v_cmd, double omega_z, double dt) {
    Vec3 a = (v_cmd - s.v) / kVelocityLagS;
    const double an = a.norm();
    if (an > kAccelCap) a *= kAccelCap / an;
    s.a_world = a;
    s.omega_body = Vec3(0.0, 0.0, omega_z);
    s.p += s.v * dt + 0.5 * a * dt * dt;
    s.v += a * dt;
    yaw = wrap_angle(yaw + omega_z * dt);
    s.q = yaw_quat(yaw);
    s.t += dt;
  }
};

// Estimator-side event processing shared verbatim by the closed-loop run and
// the offline replay so both produce identical estimates for identical
// streams.
class EstimatorPipeline {
 public:
  EstimatorPipeline(const ScenarioConfig& cfg, FlightLog& log)
      : cfg_(cfg),
        log_(log),
        mission_(cfg.mission_params(), cfg.sensor_params(),
                 cfg.approach_waypoint()) {
    const Waypoint approach = cfg.approach_waypoint();
    const Vec3 start = approach.p + cfg.takeoff_offset;
    const Vec3 center = cfg.scene_center();
    const double yaw0 =
        std::atan2(center.y() - start.y(), center.x() - start.x());
    state_ = init_filter(Pose(start, yaw_quat(yaw0)), cfg.init,
                         cfg.extrinsics, static_cast<int>(
                             cfg.scene.object_poses_world.size()));
  }

  FilterState& state() { return state_; }
  MissionController& mission() { return mission_; }

  void on_estimate() {
    const MissionPhase before = mission_.phase();
    mission_.on_estimate(state_);
    if (before != MissionPhase::HoverVerify &&
        mission_.phase() == MissionPhase::HoverVerify) {
      hover_entry_t_ = state_.t;
    }
  }

  void on_imu(const ImuSample& imu) {
    const double dt = imu.t - state_.t;
    state_ = propagate(state_, imu, cfg_.imu_noise, dt);
  }

  void on_batch(const MeasurementBatch& batch) {
    switch (mission_.phase()) {
      case MissionPhase::HoverVerify: {
        if (hover_entry_t_ < 0.0 ||
            batch.t - hover_entry_t_ + kTimeEps < cfg_.plan.hover_duration_s)
          return;
        const Pose before(state_.core.p_wi, state_.core.q_wi);
        if (mission_.try_switch_to_object_relative(state_, batch)) {
          log_.or_switch_time = batch.t;
          log_.or_switch_jump_m = (state_.core.p_wi - before.p).norm() +
                                  geodesic_angle(state_.core.q_wi, before.q);
        }
        break;
      }
      case MissionPhase::ObjectRelative:
        mission_.landmark_update(state_, batch);
        break;
      default:
        break;
    }
  }

  void on_global(const GlobalPoseMeasurement& meas) {
    if (mission_.phase() == MissionPhase::ObjectRelative) {
      if (!mission_.inspection_complete()) return;
      const Pose before(state_.core.p_wi, state_.core.q_wi);
      mission_.switch_to_global(state_, meas);
      log_.global_switch_time = meas.t;
      log_.global_switch_jump_m = (state_.core.p_wi - before.p).norm() +
                                  geodesic_angle(state_.core.q_wi, before.q);
      mission_.global_pose_update(state_, meas);
      log_.first_return_innovation = mission_.first_return_innovation();
      return;
    }
    if (mission_.uses_global_sensor()) mission_.global_pose_update(state_, meas);
  }

 private:
  const ScenarioConfig& cfg_;
  FlightLog& log_;
  FilterState state_;
  MissionController mission_;
  double hover_entry_t_{-1.0};
};

LogRecord make_record(double t, const Pose& truth, const Vec3& truth_v,
                      const FilterState& est, MissionPhase phase,
                      int batch_size) {
  LogRecord rec;
  rec.t = t;
  rec.truth = truth;
  rec.truth_v = truth_v;
  rec.est = Pose(est.core.p_wi, est.core.q_wi);
  rec.cov_diag = est.P.diagonal().head<15>();
  rec.phase = phase;
  rec.batch_size = batch_size;
  return rec;
}

}  // namespace

const char* to_string(ScenarioMode mode) {
  switch (mode) {
    case ScenarioMode::Hover: return "hover";
    case ScenarioMode::Arc: return "arc";
    case ScenarioMode::OfflineReplay: return "offline-replay";
  }
  return "unknown";
}

Vec3 ScenarioConfig::scene_center() const {
  Vec3 c = Vec3::Zero();
  for (const Pose& obj : scene.object_poses_world) c += obj.p;
  if (!scene.object_poses_world.empty())
    c /= static_cast<double>(scene.object_poses_world.size());
  c.z() = 0.0;
  return c;
}

Waypoint ScenarioConfig::approach_waypoint() const {
  const Vec3 center = scene_center();
  Waypoint wp;
  wp.p = Vec3(center.x() + plan.distance_m * std::cos(approach_bearing_rad),
              center.y() + plan.distance_m * std::sin(approach_bearing_rad),
              plan.height_m);
  wp.yaw = wrap_angle(approach_bearing_rad + M_PI);
  return wp;
}

LandmarkSensorParams ScenarioConfig::sensor_params() const {
  LandmarkSensorParams p;
  p.noise = meas_noise;
  p.gate_alpha = gate_alpha;
  p.match_init_cost = match_init_cost;
  p.pseudo_sigma_p = pseudo_sigma_p;
  p.pseudo_sigma_yaw = pseudo_sigma_yaw;
  p.anchor_rows_enabled = anchor_enabled;
  return p;
}

MissionParams ScenarioConfig::mission_params() const {
  MissionParams p;
  p.plan = plan;
  p.verify_batches = verify_batches;
  p.waypoint_tolerance_m = waypoint_tolerance_m;
  p.anchor_index = anchor_index;
  p.hold_object_relative = (mode == ScenarioMode::Hover);
  return p;
}

ImuSample synthesize_imu(const UavTruthState& truth, const Vec3& gyro_bias,
                         const Vec3& accel_bias, const Vec3& gravity,
                         std::mt19937_64* rng, double accel_noise_std,
                         double gyro_noise_std) {
  ImuSample s;
  s.t = truth.t;
  s.a_m = truth.q.toRotationMatrix().transpose() * (truth.a_world - gravity) +
          accel_bias;
  s.omega = truth.omega_body + gyro_bias;
  if (rng) {
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (int i = 0; i < 3; ++i) s.a_m(i) += accel_noise_std * gauss(*rng);
    for (int i = 0; i < 3; ++i) s.omega(i) += gyro_noise_std * gauss(*rng);
  }
  return s;
}

RecordedStreams streams_from_log(const FlightLog& log) {
  RecordedStreams streams;
  streams.imu = log.imu;
  streams.batches = log.batches;
  streams.globals = log.globals;
  streams.truth.reserve(log.records.size());
  for (const LogRecord& rec : log.records)
    streams.truth.push_back({rec.t, rec.truth, rec.truth_v});
  return streams;
}

FlightLog run_closed_loop(const ScenarioConfig& cfg) {
  if (!(cfg.imu_rate_hz >= cfg.poet.rate_hz))
    throw std::invalid_argument("run_closed_loop: imu_rate must be >= cam rate");
  if (!(cfg.imu_rate_hz > 0.0) || !(cfg.poet.rate_hz > 0.0) ||
      !(cfg.global_rate_hz > 0.0))
    throw std::invalid_argument("run_closed_loop: rates must be positive");

  FlightLog log;
  log.raw_errors.assign(cfg.scene.object_poses_world.size(), {});
  EstimatorPipeline pipeline(cfg, log);

  PoETNoiseModel poet = cfg.poet;
  poet.seed = cfg.seed;
  std::seed_seq imu_seq{cfg.seed, std::uint64_t{0xA11CE}};
  std::seed_seq glob_seq{cfg.seed, std::uint64_t{0x610BA1}};
  std::mt19937_64 imu_rng(imu_seq);
  std::mt19937_64 glob_rng(glob_seq);
  std::normal_distribution<double> gauss(0.0, 1.0);

  const double dt = 1.0 / cfg.imu_rate_hz;
  const double accel_noise_std = cfg.imu_noise.sigma_na * std::sqrt(cfg.imu_rate_hz);
  const double gyro_noise_std = cfg.imu_noise.sigma_nw * std::sqrt(cfg.imu_rate_hz);

  TruthStepper truth;
  truth.s.p = pipeline.state().core.p_wi;
  truth.yaw = yaw_of(pipeline.state().core.q_wi);
  truth.s.q = yaw_quat(truth.yaw);

  const auto n_ticks = static_cast<long>(std::llround(cfg.duration_s * cfg.imu_rate_hz));
  long cam_count = 0;
  long glob_count = 0;
  const double cam_dt = 1.0 / cfg.poet.rate_hz;
  const double glob_dt = 1.0 / cfg.global_rate_hz;

  log.records.push_back(make_record(0.0, Pose(truth.s.p, truth.s.q), truth.s.v,
                                    pipeline.state(),
                                    pipeline.mission().phase(), -1));

  for (long i = 1; i <= n_ticks; ++i) {
    const double t = static_cast<double>(i) * dt;
    pipeline.on_estimate();

    // Bounded-velocity kinematic tracking of the estimator's waypoint; the
    // position error is taken against the *estimate*, closing the loop.
    const auto wp = pipeline.mission().current_waypoint();
    Vec3 v_cmd = Vec3::Zero();
    double omega_cmd = 0.0;
    if (wp) {
      v_cmd = kPosGainPerS * (wp->p - pipeline.state().core.p_wi);
      const double vn = v_cmd.norm();
      if (vn > cfg.max_velocity_mps) v_cmd *= cfg.max_velocity_mps / vn;
      const double yaw_err =
          wrap_angle(wp->yaw - yaw_of(pipeline.state().core.q_wi));
      omega_cmd = clamp_mag(kYawGain * yaw_err, cfg.max_yaw_rate_rps);
    }

    const Quat q_pre = truth.s.q;
    truth.step(v_cmd, omega_cmd, dt);

    UavTruthState sample_state = truth.s;
    sample_state.q = q_pre;  // attitude at the start of the covered interval
    ImuSample imu = synthesize_imu(sample_state, cfg.true_gyro_bias,
                                   cfg.true_accel_bias, cfg.imu_noise.gravity,
                                   &imu_rng, accel_noise_std, gyro_noise_std);
    log.imu.push_back(imu);
    pipeline.on_imu(imu);

    int batch_size = -1;
    if (t + kTimeEps >= static_cast<double>(cam_count + 1) * cam_dt) {
      ++cam_count;
      const Pose robot(truth.s.p, truth.s.q);
      MeasurementBatch batch =
          simulate_batch(robot, cfg.extrinsics, cfg.scene, poet, t);
      for (const RelPoseMeasurement& m : batch.measurements) {
        if (m.object_hint < 0) continue;
        const Pose true_oc =
            cfg.scene.object_poses_world[static_cast<size_t>(m.object_hint)]
                .inverse() *
            (robot * Pose(cfg.extrinsics.p_ic, cfg.extrinsics.q_ic));
        log.raw_errors[static_cast<size_t>(m.object_hint)].push_back(
            {t, (m.p_oc - true_oc.p).norm(),
             geodesic_angle(m.q_oc, true_oc.q) * 180.0 / M_PI});
      }
      log.batches.push_back(batch);
      pipeline.on_batch(batch);
      batch_size = static_cast<int>(batch.measurements.size());
    }

    if (t + kTimeEps >= static_cast<double>(glob_count + 1) * glob_dt) {
      ++glob_count;
      GlobalPoseMeasurement meas;
      meas.t = t;
      meas.noise = cfg.global_noise;
      meas.p = truth.s.p + Vec3(gauss(glob_rng), gauss(glob_rng),
                                gauss(glob_rng))
                               .cwiseProduct(cfg.global_noise.sigma_p);
      meas.q = quat_multiply(
          truth.s.q,
          small_angle_quat(Vec3(gauss(glob_rng), gauss(glob_rng),
                                gauss(glob_rng))
                               .cwiseProduct(cfg.global_noise.sigma_theta)));
      log.globals.push_back(meas);
      pipeline.on_global(meas);
    }

    log.records.push_back(make_record(t, Pose(truth.s.p, truth.s.q), truth.s.v,
                                      pipeline.state(),
                                      pipeline.mission().phase(), batch_size));

    if ((pipeline.state().core.p_wi - truth.s.p).norm() >
        cfg.divergence_abort_m) {
      log.diverged = true;
      break;
    }
  }

  log.completed_waypoints = pipeline.mission().inspection_complete() ||
                            pipeline.mission().phase() == MissionPhase::Done;
  return log;
}

FlightLog run_offline(const ScenarioConfig& cfg, const RecordedStreams& streams) {
  for (size_t i = 1; i < streams.imu.size(); ++i) {
    if (!(streams.imu[i].t > streams.imu[i - 1].t))
      throw std::invalid_argument("run_offline: non-monotone IMU stream");
  }
  for (size_t i = 1; i < streams.batches.size(); ++i) {
    if (!(streams.batches[i].t > streams.batches[i - 1].t))
      throw std::invalid_argument("run_offline: non-monotone batch stream");
  }
  for (size_t i = 1; i < streams.globals.size(); ++i) {
    if (!(streams.globals[i].t > streams.globals[i - 1].t))
      throw std::invalid_argument("run_offline: non-monotone global stream");
  }

  FlightLog log;
  log.raw_errors.assign(cfg.scene.object_poses_world.size(), {});
  EstimatorPipeline pipeline(cfg, log);

  auto truth_at = [&](size_t truth_idx, double t) -> TruthSample {
    // Truth samples are tick-aligned with the IMU stream when present.
    if (truth_idx < streams.truth.size()) return streams.truth[truth_idx];
    TruthSample s;
    s.t = t;
    s.pose = Pose(pipeline.state().core.p_wi, pipeline.state().core.q_wi);
    return s;
  };

  size_t bi = 0;
  size_t gi = 0;
  const TruthSample t0 = truth_at(0, 0.0);
  log.records.push_back(make_record(t0.t, t0.pose, t0.v, pipeline.state(),
                                    pipeline.mission().phase(), -1));

  for (size_t i = 0; i < streams.imu.size(); ++i) {
    const ImuSample& imu = streams.imu[i];
    pipeline.on_estimate();
    pipeline.on_imu(imu);

    int batch_size = -1;
    while (bi < streams.batches.size() &&
           streams.batches[bi].t <= imu.t + kTimeEps) {
      pipeline.on_batch(streams.batches[bi]);
      batch_size = static_cast<int>(streams.batches[bi].measurements.size());
      ++bi;
    }
    while (gi < streams.globals.size() &&
           streams.globals[gi].t <= imu.t + kTimeEps) {
      pipeline.on_global(streams.globals[gi]);
      ++gi;
    }

    const TruthSample ts = truth_at(i + 1, imu.t);
    log.records.push_back(make_record(imu.t, ts.pose, ts.v, pipeline.state(),
                                      pipeline.mission().phase(), batch_size));
  }

  log.completed_waypoints = pipeline.mission().inspection_complete() ||
                            pipeline.mission().phase() == MissionPhase::Done;
  return log;
}

Metrics compute_metrics(const FlightLog& log) {
  std::vector<double> pos_err;
  std::vector<double> rot_err_deg;
  for (const LogRecord& rec : log.records) {
    if (rec.phase != MissionPhase::ObjectRelative) continue;
    pos_err.push_back((rec.est.p - rec.truth.p).norm());
    rot_err_deg.push_back(geodesic_angle(rec.est.q, rec.truth.q) * 180.0 / M_PI);
  }
  if (pos_err.empty())
    throw std::invalid_argument("compute_metrics: no object-relative segment");

  auto mean = [](const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
  };
  auto stddev = [&](const std::vector<double>& v) {
    const double m = mean(v);
    double s = 0.0;
    for (double x : v) s += (x - m) * (x - m);
    return std::sqrt(s / static_cast<double>(v.size()));
  };

  Metrics metrics;
  metrics.n_samples = static_cast<int>(pos_err.size());
  double sq = 0.0;
  for (double e : pos_err) sq += e * e;
  metrics.rmse_pos_m = std::sqrt(sq / static_cast<double>(pos_err.size()));
  sq = 0.0;
  for (double e : rot_err_deg) sq += e * e;
  metrics.rmse_rot_deg = std::sqrt(sq / static_cast<double>(rot_err_deg.size()));
  metrics.rmse_pos_std = stddev(pos_err);
  metrics.rmse_rot_std = stddev(rot_err_deg);
  metrics.max_pe_m = *std::max_element(pos_err.begin(), pos_err.end());
  metrics.mean_pos_m = mean(pos_err);
  metrics.mean_rot_deg = mean(rot_err_deg);
  for (const auto& series : log.raw_errors) {
    double te = 0.0;
    double re = 0.0;
    for (const RawErrorSample& s : series) {
      te += s.te_m;
      re += s.re_deg;
    }
    const double n = series.empty() ? 1.0 : static_cast<double>(series.size());
    metrics.raw_te_mean_m.push_back(te / n);
    metrics.raw_re_mean_deg.push_back(re / n);
  }
  return metrics;
}

}  // namespace orelnav
