#include "orelnav/landmark_sensor.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <boost/math/distributions/chi_squared.hpp>
#include <cmath>
#include <stdexcept>

#include "orelnav/assignment.hpp"

namespace orelnav {

Eigen::Matrix<double, 6, 6> MeasurementNoise::covariance() const {
  Eigen::Matrix<double, 6, 6> r = Eigen::Matrix<double, 6, 6>::Zero();
  r.diagonal().head<3>() = sigma_p.cwiseProduct(sigma_p);
  r.diagonal().tail<3>() = sigma_theta.cwiseProduct(sigma_theta);
  return r;
}

double chi2_quantile(int dof, double prob) {
  boost::math::chi_squared dist(static_cast<double>(dof));
  return boost::math::quantile(dist, prob);
}

GateDecision chi2_gate(const Eigen::VectorXd& residual,
                       const Eigen::MatrixXd& innovation_cov, double alpha) {
  GateDecision d;
  d.threshold = chi2_quantile(static_cast<int>(residual.size()), 1.0 - alpha);
  Eigen::LDLT<Eigen::MatrixXd> ldlt(innovation_cov);
  if (ldlt.info() != Eigen::Success || !ldlt.isPositive()) {
    d.singular = true;
    return d;
  }
  d.mahalanobis_sq = residual.dot(ldlt.solve(residual));
  if (!std::isfinite(d.mahalanobis_sq)) {
    d.singular = true;
    d.mahalanobis_sq = 0.0;
    return d;
  }
  d.accept = d.mahalanobis_sq <= d.threshold;
  return d;
}

Vec3 landmark_world_position(const FilterState& state, int k) {
  const ObjectWorldState& obj = state.objects.at(static_cast<size_t>(k));
  return Pose(obj.p_ow, obj.q_ow).inverse().p;
}

Pose project_measurement_to_world(const FilterState& state,
                                  const RelPoseMeasurement& meas) {
  const Mat3 r_wi = state.core.q_wi.toRotationMatrix();
  const Mat3 r_ic = state.extrinsics.q_ic.toRotationMatrix();
  const Mat3 r_oc = meas.q_oc.toRotationMatrix();
  const Mat3 r_ow = r_oc * r_ic.transpose() * r_wi.transpose();
  const Vec3 p_ow =
      meas.p_oc - r_ow * (r_wi * state.extrinsics.p_ic + state.core.p_wi);
  return Pose(p_ow, Quat(r_ow));
}

RelPoseMeasurement predict_measurement(const FilterState& state, int k) {
  const ObjectWorldState& obj = state.objects.at(static_cast<size_t>(k));
  if (!obj.initialized)
    throw std::invalid_argument("predict_measurement: landmark uninitialized");
  RelPoseMeasurement m;
  m.t = state.t;
  m.q_oc = quat_multiply(quat_multiply(obj.q_ow, state.core.q_wi),
                         state.extrinsics.q_ic);
  m.p_oc = obj.p_ow + obj.q_ow.toRotationMatrix() *
                          (state.core.p_wi +
                           state.core.q_wi.toRotationMatrix() * state.extrinsics.p_ic);
  m.object_hint = k;
  return m;
}

Eigen::Matrix<double, 6, 1> measurement_residual(const RelPoseMeasurement& pred,
                                                 const RelPoseMeasurement& meas) {
  Eigen::Matrix<double, 6, 1> r;
  r.head<3>() = meas.p_oc - pred.p_oc;
  const Quat err = canonical(pred.q_oc.conjugate() * meas.q_oc);
  r.tail<3>() = 2.0 * err.vec() / err.w();
  return r;
}

Eigen::MatrixXd landmark_jacobian(const FilterState& state, int k) {
  const ObjectWorldState& obj = state.objects.at(static_cast<size_t>(k));
  if (!obj.initialized)
    throw std::invalid_argument("landmark_jacobian: landmark uninitialized");
  const int dim = state.error_dim();
  const int off = state.landmark_offset(k);

  const Mat3 r_wi = state.core.q_wi.toRotationMatrix();
  const Mat3 r_ic = state.extrinsics.q_ic.toRotationMatrix();
  const Mat3 r_ow = obj.q_ow.toRotationMatrix();
  const Vec3 cam_lever = r_wi * state.extrinsics.p_ic;  // R_WI p_IC

  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(6, dim);
  // Position rows: p_OC = p_OW + R_OW (p_WI + R_WI p_IC)
  h.block<3, 3>(0, 0) = r_ow;
  h.block<3, 3>(0, 6) = -r_ow * skew(cam_lever);
  h.block<3, 3>(0, 15) = r_ow * r_wi;
  h.block<3, 3>(0, off) = Mat3::Identity();
  h.block<3, 3>(0, off + 3) = -skew(r_ow * (state.core.p_wi + cam_lever));
  // Rotation rows: q_OC = q_OW ⊗ q_WI ⊗ q_IC, left-multiplicative errors.
  h.block<3, 3>(3, 6) = (r_wi * r_ic).transpose();
  h.block<3, 3>(3, 18) = r_ic.transpose();
  h.block<3, 3>(3, off + 3) = (r_ow * r_wi * r_ic).transpose();
  return h;
}

Eigen::Vector4d anchor_residual(const FilterState& state) {
  if (!state.anchor) throw std::invalid_argument("anchor_residual: no anchor set");
  const AnchorReference& a = *state.anchor;
  const ObjectWorldState& obj = state.objects.at(static_cast<size_t>(a.index));
  Eigen::Vector4d r;
  r.head<3>() = a.p_ref - obj.p_ow;
  const Quat err = canonical(obj.q_ow.conjugate() * a.q_ref);
  r(3) = 2.0 * err.z() / err.w();
  return r;
}

Eigen::MatrixXd anchor_jacobian(const FilterState& state) {
  if (!state.anchor) throw std::invalid_argument("anchor_jacobian: no anchor set");
  const AnchorReference& a = *state.anchor;
  const ObjectWorldState& obj = state.objects.at(static_cast<size_t>(a.index));
  const int dim = state.error_dim();
  const int off = state.landmark_offset(a.index);

  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(4, dim);
  h.block<3, 3>(0, off) = Mat3::Identity();
  // Yaw row only: the z row of the rotation-residual Jacobian R_OW'. Rows
  // for roll and pitch stay zero so those angles remain free; for an upright
  // anchor this reduces to the (0 0 1) selector.
  h.block<1, 3>(3, off + 3) =
      obj.q_ow.toRotationMatrix().transpose().row(2);
  return h;
}

void initialize_landmark(FilterState& state, int k,
                         const RelPoseMeasurement& meas,
                         const MeasurementNoise& noise) {
  ObjectWorldState& obj = state.objects.at(static_cast<size_t>(k));
  if (obj.initialized)
    throw std::invalid_argument("initialize_landmark: slot already initialized");

  const Pose ow = project_measurement_to_world(state, meas);
  obj.p_ow = ow.p;
  obj.q_ow = canonical(ow.q);
  obj.initialized = true;

  // Seed covariance by solving the measurement model for the landmark error:
  //   H_x dx + H_L dL = dz  =>  dL = H_L^-1 (dz - H_x dx)
  const int dim = state.error_dim();
  const int off = state.landmark_offset(k);
  Eigen::MatrixXd h = landmark_jacobian(state, k);
  const Eigen::Matrix<double, 6, 6> h_l = h.block<6, 6>(0, off);
  Eigen::MatrixXd h_x = h;
  h_x.block<6, 6>(0, off).setZero();

  const Eigen::Matrix<double, 6, 6> b = h_l.inverse();
  const Eigen::MatrixXd a = -b * h_x;

  const Eigen::MatrixXd cross = a * state.P;  // 6 x dim
  const Eigen::Matrix<double, 6, 6> p_ll =
      cross * a.transpose() + b * noise.covariance() * b.transpose();
  state.P.block(off, 0, 6, dim) = cross;
  state.P.block(0, off, dim, 6) = cross.transpose();
  state.P.block<6, 6>(off, off) = p_ll;
  symmetrize(state.P);
}

MatchResult match_measurements(const FilterState& state,
                               const MeasurementBatch& batch,
                               double match_init_cost) {
  MatchResult result;
  const int m = static_cast<int>(batch.measurements.size());
  const int n = state.num_objects();
  result.meas_to_landmark.assign(static_cast<size_t>(m), -1);
  if (m == 0) return result;

  Eigen::MatrixXd cost(m, n);
  for (int i = 0; i < m; ++i) {
    const Pose projected =
        project_measurement_to_world(state, batch.measurements[i]);
    const Vec3 p_world = projected.inverse().p;
    for (int k = 0; k < n; ++k) {
      cost(i, k) = state.objects[k].initialized
                       ? (p_world - landmark_world_position(state, k)).norm()
                       : match_init_cost;
    }
  }

  const AssignmentResult assignment = solve_assignment(cost);
  for (int i = 0; i < m; ++i) {
    const int k = assignment.row_to_col[static_cast<size_t>(i)];
    result.meas_to_landmark[static_cast<size_t>(i)] = k;
    if (k < 0) continue;
    if (state.objects[k].initialized) {
      result.matched.push_back({batch.measurements[i], k});
    } else {
      result.to_initialize.push_back({batch.measurements[i], k});
    }
  }
  return result;
}

UpdateReport stacked_update(FilterState& state,
                            const std::vector<MatchedMeasurement>& matched,
                            const LandmarkSensorParams& params) {
  if (matched.empty())
    throw std::invalid_argument("stacked_update: empty matched batch");
  const int dim = state.error_dim();
  const bool pseudo =
      params.anchor_rows_enabled && state.anchor.has_value();
  const int rows = 6 * static_cast<int>(matched.size()) + (pseudo ? 4 : 0);

  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(rows, dim);
  Eigen::VectorXd r(rows);
  Eigen::VectorXd noise_diag(rows);
  int row = 0;
  for (const MatchedMeasurement& mm : matched) {
    const RelPoseMeasurement pred = predict_measurement(state, mm.landmark);
    r.segment<6>(row) = measurement_residual(pred, mm.meas);
    h.block(row, 0, 6, dim) = landmark_jacobian(state, mm.landmark);
    noise_diag.segment<3>(row) =
        params.noise.sigma_p.cwiseProduct(params.noise.sigma_p);
    noise_diag.segment<3>(row + 3) =
        params.noise.sigma_theta.cwiseProduct(params.noise.sigma_theta);
    row += 6;
  }
  if (pseudo) {
    r.segment<4>(row) = anchor_residual(state);
    h.block(row, 0, 4, dim) = anchor_jacobian(state);
    noise_diag.segment<3>(row).setConstant(params.pseudo_sigma_p *
                                           params.pseudo_sigma_p);
    noise_diag(row + 3) = params.pseudo_sigma_yaw * params.pseudo_sigma_yaw;
    row += 4;
  }

  const Eigen::VectorXd dx = apply_update(state, h, r, noise_diag);

  UpdateReport report;
  report.stacked_rows = rows;
  report.pseudo_rows = pseudo;
  report.innovation_norm = r.norm();
  report.dx_norm = dx.norm();
  return report;
}

void set_anchor(FilterState& state, int k) {
  const ObjectWorldState& obj = state.objects.at(static_cast<size_t>(k));
  if (!obj.initialized)
    throw std::invalid_argument("set_anchor: landmark uninitialized");
  AnchorReference ref;
  ref.index = k;
  ref.p_ref = obj.p_ow;
  ref.q_ref = canonical(obj.q_ow);
  state.anchor = ref;
}

void clear_anchor(FilterState& state) { state.anchor.reset(); }

void remove_landmarks(FilterState& state) {
  const int dim = state.error_dim();
  for (int k = 0; k < state.num_objects(); ++k) {
    state.objects[static_cast<size_t>(k)] = ObjectWorldState{};
    const int off = state.landmark_offset(k);
    state.P.block(off, 0, 6, dim).setZero();
    state.P.block(0, off, dim, 6).setZero();
  }
  clear_anchor(state);
}

BatchReport process_batch(FilterState& state, const MeasurementBatch& batch,
                          const LandmarkSensorParams& params) {
  BatchReport report;
  report.match = match_measurements(state, batch, params.match_init_cost);

  for (const MatchedMeasurement& mm : report.match.to_initialize) {
    initialize_landmark(state, mm.landmark, mm.meas, params.noise);
    ++report.initialized;
  }

  std::vector<MatchedMeasurement> survivors;
  const Eigen::Matrix<double, 6, 6> r_meas = params.noise.covariance();
  for (const MatchedMeasurement& mm : report.match.matched) {
    const RelPoseMeasurement pred = predict_measurement(state, mm.landmark);
    const Eigen::Matrix<double, 6, 1> res = measurement_residual(pred, mm.meas);
    const Eigen::MatrixXd h = landmark_jacobian(state, mm.landmark);
    const Eigen::MatrixXd s = h * state.P * h.transpose() + r_meas;
    const GateDecision gate = chi2_gate(res, s, params.gate_alpha);
    report.gates.push_back(gate);
    if (gate.accept) survivors.push_back(mm);
  }

  if (!survivors.empty()) {
    report.update = stacked_update(state, survivors, params);
    report.updated = true;
  }
  return report;
}

}  // namespace orelnav
