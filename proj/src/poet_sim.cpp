#include "orelnav/poet_sim.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

namespace orelnav {

double mean_norm_factor_3d() { return std::sqrt(8.0 / M_PI); }

PoETNoiseModel calibrate_from_table(double avg_te_m, double avg_re_deg) {
  if (avg_te_m < 0.0 || avg_re_deg < 0.0)
    throw std::invalid_argument("calibrate_from_table: negative average error");
  PoETNoiseModel model;
  const double factor = mean_norm_factor_3d();
  model.sigma_t.setConstant(avg_te_m / factor);
  model.sigma_r.setConstant(avg_re_deg * M_PI / 180.0 / factor);
  return model;
}

MeasurementBatch simulate_batch(const Pose& robot_wi,
                                const ExtrinsicState& extrinsics,
                                const SceneConfig& scene,
                                const PoETNoiseModel& noise, double t) {
  if (scene.object_poses_world.empty())
    throw std::invalid_argument("simulate_batch: scene has no objects");
  if (!(scene.range_min_m < scene.range_max_m))
    throw std::invalid_argument("simulate_batch: invalid detection range");

  MeasurementBatch batch;
  batch.t = t;

  // One RNG per frame keyed on (seed, frame index) so batches are
  // reproducible regardless of how many frames were generated before.
  const auto frame = static_cast<std::uint64_t>(
      std::llround(t * noise.rate_hz));
  std::seed_seq seq{noise.seed,
                    static_cast<std::uint64_t>(frame ^ 0x9e3779b97f4a7c15ULL)};
  std::mt19937_64 rng(seq);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);

  const Pose t_wc = robot_wi * Pose(extrinsics.p_ic, extrinsics.q_ic);
  const Pose t_cw = t_wc.inverse();

  for (size_t k = 0; k < scene.object_poses_world.size(); ++k) {
    // Draw every random number whether or not the object is visible, so the
    // stream stays aligned across frames with different visibility.
    Vec3 nt(gauss(rng), gauss(rng), gauss(rng));
    Vec3 nr(gauss(rng), gauss(rng), gauss(rng));
    const double drop_draw = uniform(rng);

    const Pose& t_wo = scene.object_poses_world[k];
    const Vec3 p_co = t_cw * t_wo.p;  // object position in the camera frame
    const double dist = p_co.norm();
    if (!(p_co.z() > 0.0)) continue;
    if (dist < scene.range_min_m || dist > scene.range_max_m) continue;
    if (std::abs(std::atan2(p_co.x(), p_co.z())) > scene.fov_h_half_rad)
      continue;
    if (std::abs(std::atan2(p_co.y(), p_co.z())) > scene.fov_v_half_rad)
      continue;
    if (drop_draw < noise.p_dropout) continue;

    double scale = 1.0;
    if (noise.distance_scaling && noise.reference_distance_m > 0.0)
      scale = dist / noise.reference_distance_m;

    const Pose t_oc = t_wo.inverse() * t_wc;
    RelPoseMeasurement meas;
    meas.t = t;
    meas.object_hint = static_cast<int>(k);
    meas.p_oc = t_oc.p + scale * noise.sigma_t.cwiseProduct(nt);
    meas.q_oc = quat_multiply(
        t_oc.q, small_angle_quat(scale * noise.sigma_r.cwiseProduct(nr)));
    batch.measurements.push_back(meas);
  }
  return batch;
}

}  // namespace orelnav
