#pragma once

#include <optional>

#include <Eigen/Core>

namespace anchorweave {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Mat4 = Eigen::Matrix4d;

/// Rigid camera-to-world transform. A camera looks along its +z axis with
/// +x to the right and +y down in the image.
struct Pose {
  Mat3 rotation = Mat3::Identity();
  Vec3 translation = Vec3::Zero();

  static Pose identity() { return {}; }
  static Pose from_matrix(const Mat4& m);
  Mat4 matrix() const;

  Vec3 apply(const Vec3& p) const { return rotation * p + translation; }

  bool operator==(const Pose& other) const {
    return rotation == other.rotation && translation == other.translation;
  }
};

struct Intrinsics {
  double fx = 110.0;
  double fy = 110.0;
  double cx = 63.5;
  double cy = 63.5;
  int width = 128;
  int height = 128;

  /// Intrinsics of the same camera sampled on a grid `factor` times coarser.
  /// Pixel centres sit at integer coordinates at both resolutions.
  Intrinsics downsampled(int factor) const;

  bool operator==(const Intrinsics&) const = default;
};

struct PixelPoint {
  double u = 0.0;
  double v = 0.0;
  double depth = 0.0;
};

namespace geometry {

inline constexpr double kOrthoTolerance = 1e-9;

bool is_valid(const Pose& pose, double tol = 1e-6);
void validate(const Pose& pose);
void validate(const Intrinsics& k);

/// Largest absolute entry of R^T R - I.
double orthonormality_drift(const Mat3& r);
/// Closest rotation in the Frobenius sense (polar factor via SVD).
Mat3 nearest_rotation(const Mat3& r);

Pose compose(const Pose& a, const Pose& b);
Pose invert(const Pose& pose);
/// Maps coordinates in the memory camera frame into the target camera frame.
Pose relative_pose(const Pose& memory, const Pose& target);

std::optional<PixelPoint> project(const Vec3& world, const Pose& cam, const Intrinsics& k);
Vec3 unproject(const PixelPoint& p, const Pose& cam, const Intrinsics& k);

/// Geodesic rotation angle in radians, in [0, pi].
double rotation_angle(const Mat3& r);
double pose_distance(const Pose& rel, double lambda_r = 1.0, double lambda_t = 1.0);

Pose translate(double x, double y, double z);
Pose rotate_x(double radians);
Pose rotate_y(double radians);
Pose rotate_z(double radians);
/// Rotation by the axis-angle vector `omega` (Rodrigues).
Mat3 exp_so3(const Vec3& omega);

double max_abs_difference(const Pose& a, const Pose& b);

}  // namespace geometry
}  // namespace anchorweave
