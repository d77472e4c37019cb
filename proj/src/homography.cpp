#include "orelnav/homography.hpp"

#include <cmath>
#include <stdexcept>

namespace orelnav {

Mat3 CameraIntrinsics::matrix() const {
  Mat3 k;
  k << fx, 0.0, cx,  //
      0.0, fy, cy,   //
      0.0, 0.0, 1.0;
  return k;
}

Eigen::Vector2d CameraIntrinsics::center() const {
  return {0.5 * width, 0.5 * height};
}

void CameraIntrinsics::validate() const {
  if (!(fx > 0.0) || !(fy > 0.0))
    throw std::invalid_argument("intrinsics: focal lengths must be positive");
  if (width <= 0 || height <= 0)
    throw std::invalid_argument("intrinsics: image size must be positive");
  if (!(cx > 0.0 && cx < width) || !(cy > 0.0 && cy < height))
    throw std::invalid_argument("intrinsics: principal point outside image");
}

Eigen::Vector2d project(const CameraIntrinsics& cam, const Vec3& x_camera) {
  if (!(x_camera.z() > 0.0))
    throw std::invalid_argument("project: point has non-positive depth");
  return {cam.fx * x_camera.x() / x_camera.z() + cam.cx,
          cam.fy * x_camera.y() / x_camera.z() + cam.cy};
}

Homography Homography::inverse() const {
  Homography inv;
  inv.H = H.inverse();
  return inv;
}

Homography compute_homography(const CameraIntrinsics& target,
                              const CameraIntrinsics& source) {
  target.validate();
  source.validate();
  const Mat3 k_hat = source.matrix();
  if (std::abs(k_hat.determinant()) < 1e-12)
    throw std::invalid_argument("compute_homography: singular source matrix");

  const Mat3 h_hat = target.matrix() * k_hat.inverse();

  // Project the source image center and align it with the target center.
  const Eigen::Vector2d sc = source.center();
  const Vec3 projected = h_hat * Vec3(sc.x(), sc.y(), 1.0);
  const Eigen::Vector2d pc(projected.x() / projected.z(),
                           projected.y() / projected.z());
  const Eigen::Vector2d tc = target.center();

  Homography result;
  result.u_o = tc.x() - pc.x();
  result.v_o = tc.y() - pc.y();
  Mat3 t = Mat3::Identity();
  t(0, 2) = result.u_o;
  t(1, 2) = result.v_o;
  result.H = t * h_hat;
  return result;
}

Eigen::Vector2d map_pixel(const Homography& h, const Eigen::Vector2d& px) {
  const Vec3 mapped = h.H * Vec3(px.x(), px.y(), 1.0);
  if (mapped.z() == 0.0)
    throw std::runtime_error("map_pixel: degenerate projection (s = 0)");
  return {mapped.x() / mapped.z(), mapped.y() / mapped.z()};
}

}  // namespace orelnav
