#include "orelnav/estimator_core.hpp"

#include <Eigen/Cholesky>
#include <stdexcept>

namespace orelnav {

void symmetrize(Eigen::MatrixXd& p) {
  p = 0.5 * (p + p.transpose()).eval();
}

FilterState retract(const FilterState& state, const Eigen::VectorXd& dx) {
  if (dx.size() != state.error_dim())
    throw std::invalid_argument("retract: error-state dimension mismatch");
  FilterState out = state;
  out.core.p_wi += dx.segment<3>(0);
  out.core.v_wi += dx.segment<3>(3);
  out.core.q_wi = quat_multiply(small_angle_quat(dx.segment<3>(6)), state.core.q_wi);
  out.core.b_w += dx.segment<3>(9);
  out.core.b_a += dx.segment<3>(12);
  out.extrinsics.p_ic += dx.segment<3>(15);
  out.extrinsics.q_ic =
      quat_multiply(small_angle_quat(dx.segment<3>(18)), state.extrinsics.q_ic);
  for (int k = 0; k < state.num_objects(); ++k) {
    const int off = state.landmark_offset(k);
    out.objects[k].p_ow += dx.segment<3>(off);
    out.objects[k].q_ow =
        quat_multiply(small_angle_quat(dx.segment<3>(off + 3)), state.objects[k].q_ow);
  }
  return out;
}

FilterState init_filter(const Pose& initial_pose, const InitUncertainty& init,
                        const ExtrinsicState& extrinsics, int n_objects) {
  if (n_objects < 1)
    throw std::invalid_argument("init_filter: need at least one object slot");
  const double sigmas[] = {init.sigma_p,  init.sigma_v,
                           init.sigma_theta, init.sigma_bw,
                           init.sigma_ba, init.sigma_extrinsic_p,
                           init.sigma_extrinsic_theta};
  for (double s : sigmas) {
    if (!(s > 0.0))
      throw std::invalid_argument("init_filter: std devs must be positive");
  }

  FilterState s;
  s.core.p_wi = initial_pose.p;
  s.core.q_wi = initial_pose.q.normalized();
  s.extrinsics = extrinsics;
  s.extrinsics.q_ic.normalize();
  s.objects.assign(static_cast<size_t>(n_objects), ObjectWorldState{});

  const int dim = s.error_dim();
  s.P = Eigen::MatrixXd::Zero(dim, dim);
  auto block = [&](int off, double sigma) {
    s.P.block<3, 3>(off, off) = sigma * sigma * Mat3::Identity();
  };
  block(0, init.sigma_p);
  block(3, init.sigma_v);
  block(6, init.sigma_theta);
  block(9, init.sigma_bw);
  block(12, init.sigma_ba);
  block(15, init.sigma_extrinsic_p);
  block(18, init.sigma_extrinsic_theta);
  // Landmark blocks stay zero until a slot is initialized from its first
  // measurement.
  return s;
}

FilterState propagate(const FilterState& state, const ImuSample& imu,
                      const NoiseParams& noise, double dt) {
  if (!(dt > 0.0))
    throw std::invalid_argument("propagate: dt must be positive");
  if (dt > 0.1)
    throw std::invalid_argument("propagate: dt exceeds 0.1 s timestamp gap guard");
  if (imu.t <= state.t)
    throw std::invalid_argument("propagate: non-monotone IMU timestamp");

  FilterState out = state;
  const Mat3 r_wi = state.core.q_wi.toRotationMatrix();
  const Vec3 a_body = imu.a_m - state.core.b_a;
  const Vec3 a_world = r_wi * a_body + noise.gravity;
  const Vec3 w_body = imu.omega - state.core.b_w;

  out.core.p_wi = state.core.p_wi + state.core.v_wi * dt + 0.5 * a_world * dt * dt;
  out.core.v_wi = state.core.v_wi + a_world * dt;
  out.core.q_wi = quat_multiply(state.core.q_wi, small_angle_quat(w_body * dt));
  out.t = state.t + dt;

  // First-order error-state transition, left-multiplicative attitude error:
  //   dp'     = dp + dv dt
  //   dv'     = dv - [R(a_m - b_a)]x dtheta dt - R db_a dt
  //   dtheta' = dtheta - R db_w dt
  const int dim = state.error_dim();
  Eigen::MatrixXd phi = Eigen::MatrixXd::Identity(dim, dim);
  phi.block<3, 3>(0, 3) = dt * Mat3::Identity();
  phi.block<3, 3>(3, 6) = -dt * skew(r_wi * a_body);
  phi.block<3, 3>(3, 12) = -dt * r_wi;
  phi.block<3, 3>(6, 9) = -dt * r_wi;

  Eigen::MatrixXd q = Eigen::MatrixXd::Zero(dim, dim);
  q.block<3, 3>(3, 3) = noise.sigma_na * noise.sigma_na * dt * Mat3::Identity();
  q.block<3, 3>(6, 6) = noise.sigma_nw * noise.sigma_nw * dt * Mat3::Identity();
  q.block<3, 3>(9, 9) = noise.sigma_nbw * noise.sigma_nbw * dt * Mat3::Identity();
  q.block<3, 3>(12, 12) = noise.sigma_nba * noise.sigma_nba * dt * Mat3::Identity();
  // Extrinsic and object-world blocks receive zero process noise.

  out.P = phi * state.P * phi.transpose() + q;
  symmetrize(out.P);
  return out;
}

Eigen::VectorXd apply_update(FilterState& state, const Eigen::MatrixXd& h,
                             const Eigen::VectorXd& r,
                             const Eigen::VectorXd& noise_diag) {
  const int dim = state.error_dim();
  Eigen::MatrixXd s = h * state.P * h.transpose();
  s.diagonal() += noise_diag;
  Eigen::LDLT<Eigen::MatrixXd> ldlt(s);
  if (ldlt.info() != Eigen::Success || !ldlt.isPositive())
    throw std::runtime_error("apply_update: innovation covariance not PSD");

  const Eigen::MatrixXd pht = state.P * h.transpose();
  const Eigen::MatrixXd k_gain = ldlt.solve(pht.transpose()).transpose();
  const Eigen::VectorXd dx = k_gain * r;

  const Eigen::MatrixXd i_kh = Eigen::MatrixXd::Identity(dim, dim) - k_gain * h;
  state.P = i_kh * state.P * i_kh.transpose() +
            k_gain * noise_diag.asDiagonal() * k_gain.transpose();
  symmetrize(state.P);

  const FilterState updated = retract(state, dx);
  state.core = updated.core;
  state.extrinsics = updated.extrinsics;
  state.objects = updated.objects;
  return dx;
}

}  // namespace orelnav
