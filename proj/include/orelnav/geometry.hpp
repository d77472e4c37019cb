#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace orelnav {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Mat4 = Eigen::Matrix4d;

// Hamilton quaternion, coefficients stored [qx qy qz qw] (vector part first).
// Frame convention used throughout: q_AB / R_AB rotate vectors expressed in
// frame B into frame A, and p_AB is the origin of B expressed in A. Poses
// compose as T_AC = T_AB * T_BC.
using Quat = Eigen::Quaterniond;

Mat3 skew(const Vec3& v);

// Hamilton product a ⊗ b, renormalized.
Quat quat_multiply(const Quat& a, const Quat& b);

// Same rotation with qw >= 0 (q and -q are identified at API boundaries).
Quat canonical(const Quat& q);

// Quaternion derivative matrix: q̇ = 0.5 * Omega(w) * q with coefficients
// ordered [qv qw]. Equivalent to right-multiplication by the pure quaternion
// (w, 0). Antisymmetric by construction.
Mat4 omega_matrix(const Vec3& omega);

// Exact exponential map from a rotation vector (angle-axis, rad).
Quat small_angle_quat(const Vec3& dtheta);

// Rotation vector of q (inverse of small_angle_quat), angle in [0, pi].
Vec3 rotation_log(const Quat& q);

// Z angle of the Z-Y-X (yaw-pitch-roll) Euler factorization, in (-pi, pi].
double yaw_of(const Quat& q);

// (roll, pitch, yaw) of the Z-Y-X factorization.
Vec3 euler_rpy(const Quat& q);

// Geodesic angle between two rotations, in [0, pi].
double geodesic_angle(const Quat& a, const Quat& b);

// Wrap to (-pi, pi].
double wrap_angle(double a);

struct Pose {
  Vec3 p{Vec3::Zero()};
  Quat q{Quat::Identity()};

  Pose() = default;
  Pose(const Vec3& p_in, const Quat& q_in) : p(p_in), q(q_in.normalized()) {}

  static Pose Identity() { return Pose{}; }

  Mat3 rotation() const { return q.toRotationMatrix(); }

  // T_AC = T_AB * T_BC
  Pose operator*(const Pose& other) const;
  Pose inverse() const;
  // x_A = R_AB * x_B + p_AB
  Vec3 operator*(const Vec3& x) const;
};

}  // namespace orelnav
