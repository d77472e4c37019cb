#include "orelnav/geometry.hpp"

#include <cmath>

namespace orelnav {

Mat3 skew(const Vec3& v) {
  Mat3 m;
  m << 0.0, -v.z(), v.y(),  //
      v.z(), 0.0, -v.x(),   //
      -v.y(), v.x(), 0.0;
  return m;
}

Quat quat_multiply(const Quat& a, const Quat& b) {
  Quat r = a * b;
  r.normalize();
  return r;
}

Quat canonical(const Quat& q) {
  Quat r = q.normalized();
  if (r.w() < 0.0) r.coeffs() = -r.coeffs();
  return r;
}

Mat4 omega_matrix(const Vec3& omega) {
  // Coefficient order [qv qw]; q̇ = 0.5 * Omega(w) * q == 0.5 * q ⊗ (w, 0).
  Mat4 m = Mat4::Zero();
  m.topLeftCorner<3, 3>() = -skew(omega);
  m.topRightCorner<3, 1>() = omega;
  m.bottomLeftCorner<1, 3>() = -omega.transpose();
  return m;
}

Quat small_angle_quat(const Vec3& dtheta) {
  const double angle = dtheta.norm();
  double half_sinc;  // sin(angle/2) / angle
  if (angle < 1e-8) {
    half_sinc = 0.5 - angle * angle / 48.0;
  } else {
    half_sinc = std::sin(0.5 * angle) / angle;
  }
  Quat q;
  q.vec() = half_sinc * dtheta;
  q.w() = std::cos(0.5 * angle);
  q.normalize();
  return q;
}

Vec3 rotation_log(const Quat& q) {
  const Quat c = canonical(q);
  const double vnorm = c.vec().norm();
  if (vnorm < 1e-12) return 2.0 * c.vec();
  const double angle = 2.0 * std::atan2(vnorm, c.w());
  return (angle / vnorm) * c.vec();
}

double yaw_of(const Quat& q) {
  const Quat n = q.normalized();
  const double siny = 2.0 * (n.w() * n.z() + n.x() * n.y());
  const double cosy = 1.0 - 2.0 * (n.y() * n.y() + n.z() * n.z());
  double yaw = std::atan2(siny, cosy);
  if (yaw <= -M_PI) yaw += 2.0 * M_PI;
  return yaw;
}

Vec3 euler_rpy(const Quat& q) {
  const Quat n = q.normalized();
  const double sinp = 2.0 * (n.w() * n.y() - n.z() * n.x());
  double pitch;
  if (std::abs(sinp) >= 1.0) {
    pitch = std::copysign(M_PI / 2.0, sinp);
  } else {
    pitch = std::asin(sinp);
  }
  const double roll =
      std::atan2(2.0 * (n.w() * n.x() + n.y() * n.z()),
                 1.0 - 2.0 * (n.x() * n.x() + n.y() * n.y()));
  return Vec3(roll, pitch, yaw_of(n));
}

double geodesic_angle(const Quat& a, const Quat& b) {
  return rotation_log(a.conjugate() * b).norm();
}

double wrap_angle(double a) {
  a = std::fmod(a, 2.0 * M_PI);
  if (a > M_PI) a -= 2.0 * M_PI;
  if (a <= -M_PI) a += 2.0 * M_PI;
  return a;
}

Pose Pose::operator*(const Pose& other) const {
  return Pose(p + q * other.p, quat_multiply(q, other.q));
}

Pose Pose::inverse() const {
  const Quat qi = q.conjugate();
  return Pose(qi * (-p), qi);
}

Vec3 Pose::operator*(const Vec3& x) const { return p + q * x; }

}  // namespace orelnav
