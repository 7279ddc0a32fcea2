#include "anchorweave/geometry.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Geometry>
#include <Eigen/SVD>

#include "anchorweave/error.hpp"

namespace anchorweave {

Pose Pose::from_matrix(const Mat4& m) {
  Pose p;
  p.rotation = m.topLeftCorner<3, 3>();
  p.translation = m.topRightCorner<3, 1>();
  return p;
}

Mat4 Pose::matrix() const {
  Mat4 m = Mat4::Identity();
  m.topLeftCorner<3, 3>() = rotation;
  m.topRightCorner<3, 1>() = translation;
  return m;
}

Intrinsics Intrinsics::downsampled(int factor) const {
  if (factor <= 1) return *this;
  const double f = static_cast<double>(factor);
  Intrinsics k;
  k.fx = fx / f;
  k.fy = fy / f;
  k.cx = (cx + 0.5) / f - 0.5;
  k.cy = (cy + 0.5) / f - 0.5;
  k.width = (width + factor - 1) / factor;
  k.height = (height + factor - 1) / factor;
  return k;
}

namespace geometry {

double orthonormality_drift(const Mat3& r) {
  return (r.transpose() * r - Mat3::Identity()).cwiseAbs().maxCoeff();
}

Mat3 nearest_rotation(const Mat3& r) {
  Eigen::JacobiSVD<Mat3> svd(r, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Mat3 u = svd.matrixU();
  const Mat3 v = svd.matrixV();
  if ((u * v.transpose()).determinant() < 0.0) u.col(2) *= -1.0;
  return u * v.transpose();
}

bool is_valid(const Pose& pose, double tol) {
  if (!pose.rotation.allFinite() || !pose.translation.allFinite()) return false;
  if (orthonormality_drift(pose.rotation) > tol) return false;
  return pose.rotation.determinant() > 0.0;
}

void validate(const Pose& pose) {
  if (!is_valid(pose)) throw Error(ErrorCode::invalid_pose, "pose is not a finite proper rotation");
}

void validate(const Intrinsics& k) {
  const bool ok = std::isfinite(k.fx) && std::isfinite(k.fy) && std::isfinite(k.cx) &&
                  std::isfinite(k.cy) && k.fx > 0.0 && k.fy > 0.0 && k.width > 0 && k.height > 0;
  if (!ok) throw Error(ErrorCode::validation, "intrinsics require fx, fy, width, height > 0");
}

Pose compose(const Pose& a, const Pose& b) {
  if (!a.rotation.allFinite() || !a.translation.allFinite() || !b.rotation.allFinite() ||
      !b.translation.allFinite()) {
    throw Error(ErrorCode::invalid_pose, "compose: non-finite pose");
  }
  Pose out;
  out.rotation = a.rotation * b.rotation;
  out.translation = a.rotation * b.translation + a.translation;
  if (orthonormality_drift(out.rotation) > kOrthoTolerance) {
    out.rotation = nearest_rotation(out.rotation);
  }
  return out;
}

Pose invert(const Pose& pose) {
  if (!pose.rotation.allFinite() || !pose.translation.allFinite()) {
    throw Error(ErrorCode::invalid_pose, "invert: non-finite pose");
  }
  Pose out;
  out.rotation = pose.rotation.transpose();
  out.translation = -(out.rotation * pose.translation);
  return out;
}

Pose relative_pose(const Pose& memory, const Pose& target) {
  return compose(invert(target), memory);
}

std::optional<PixelPoint> project(const Vec3& world, const Pose& cam, const Intrinsics& k) {
  if (!world.allFinite()) throw Error(ErrorCode::domain, "project: non-finite point");
  const Vec3 c = cam.rotation.transpose() * (world - cam.translation);
  if (!(c.z() > 0.0)) return std::nullopt;
  return PixelPoint{k.cx + k.fx * c.x() / c.z(), k.cy + k.fy * c.y() / c.z(), c.z()};
}

Vec3 unproject(const PixelPoint& p, const Pose& cam, const Intrinsics& k) {
  if (!(p.depth > 0.0) || !std::isfinite(p.depth)) {
    throw Error(ErrorCode::domain, "unproject: depth must be positive and finite");
  }
  const Vec3 c((p.u - k.cx) / k.fx * p.depth, (p.v - k.cy) / k.fy * p.depth, p.depth);
  return cam.apply(c);
}

double rotation_angle(const Mat3& r) {
  const Vec3 axis(r(2, 1) - r(1, 2), r(0, 2) - r(2, 0), r(1, 0) - r(0, 1));
  return std::atan2(0.5 * axis.norm(), 0.5 * (r.trace() - 1.0));
}

double pose_distance(const Pose& rel, double lambda_r, double lambda_t) {
  return lambda_r * rotation_angle(rel.rotation) + lambda_t * rel.translation.norm();
}

Pose translate(double x, double y, double z) {
  Pose p;
  p.translation = Vec3(x, y, z);
  return p;
}

Pose rotate_x(double radians) {
  Pose p;
  p.rotation = Eigen::AngleAxisd(radians, Vec3::UnitX()).toRotationMatrix();
  return p;
}

Pose rotate_y(double radians) {
  Pose p;
  p.rotation = Eigen::AngleAxisd(radians, Vec3::UnitY()).toRotationMatrix();
  return p;
}

Pose rotate_z(double radians) {
  Pose p;
  p.rotation = Eigen::AngleAxisd(radians, Vec3::UnitZ()).toRotationMatrix();
  return p;
}

Mat3 exp_so3(const Vec3& omega) {
  const double angle = omega.norm();
  if (angle < 1e-15) return Mat3::Identity();
  return Eigen::AngleAxisd(angle, omega / angle).toRotationMatrix();
}

double max_abs_difference(const Pose& a, const Pose& b) {
  return std::max((a.rotation - b.rotation).cwiseAbs().maxCoeff(),
                  (a.translation - b.translation).cwiseAbs().maxCoeff());
}

}  // namespace geometry
}  // namespace anchorweave
