#pragma once

#include <Eigen/Core>

#include "orelnav/geometry.hpp"

namespace orelnav {

// Zero-skew pinhole intrinsics. Pixel coordinates are continuous; the image
// center is (width/2, height/2).
struct CameraIntrinsics {
  double fx{0.0}, fy{0.0};  // focal lengths [px]
  double cx{0.0}, cy{0.0};  // principal point [px]
  int width{0}, height{0};  // image size [px]

  Mat3 matrix() const;
  Eigen::Vector2d center() const;
  // Throws std::invalid_argument on non-positive focals or a principal
  // point outside the image.
  void validate() const;
};

// Pinhole projection of a camera-frame point with positive depth.
Eigen::Vector2d project(const CameraIntrinsics& cam, const Vec3& x_camera);

// Projective pixel map between two cameras sharing a pose: H = T * K * K̂⁻¹,
// where T translates the projected source image center onto the target image
// center. u_o/v_o are the center-alignment offsets applied by T (zero for
// derived maps such as inverses).
struct Homography {
  Mat3 H{Mat3::Identity()};
  double u_o{0.0};
  double v_o{0.0};

  Homography inverse() const;
};

Homography compute_homography(const CameraIntrinsics& target,
                              const CameraIntrinsics& source);

// Homogeneous multiply then dehomogenize. Throws std::runtime_error on a
// degenerate projection (s == 0).
Eigen::Vector2d map_pixel(const Homography& h, const Eigen::Vector2d& px);

}  // namespace orelnav
