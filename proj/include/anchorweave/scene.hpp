#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <variant>
#include <vector>

#include "anchorweave/geometry.hpp"
#include "anchorweave/raster.hpp"

namespace anchorweave {

/// Flat colour when `checker_period` is zero, otherwise a checkerboard of
/// `primary` and `secondary` squares with the given world-space period.
struct Material {
  Rgb8 primary{200, 200, 200};
  Rgb8 secondary{50, 50, 50};
  double checker_period = 0.0;

  Rgb8 shade(double a, double b) const;
  bool operator==(const Material&) const = default;
};

/// Axis-aligned box. Faces ordered -x, +x, -y, +y, -z, +z.
struct Box {
  Vec3 center = Vec3::Zero();
  Vec3 half_extents = Vec3::Ones();
  std::array<Material, 6> faces{};

  bool operator==(const Box&) const = default;
};

/// Axis-aligned rectangle with normal along `normal_axis`. `half_extents`
/// holds the in-plane half sizes along the two remaining axes in increasing
/// axis order.
struct Plane {
  int normal_axis = 1;
  Vec3 center = Vec3::Zero();
  Eigen::Vector2d half_extents = Eigen::Vector2d::Ones();
  Material material{};

  bool operator==(const Plane&) const = default;
};

using Primitive = std::variant<Box, Plane>;

struct Aabb {
  Vec3 min = Vec3::Zero();
  Vec3 max = Vec3::Zero();
  bool contains(const Aabb& other, double tol = 0.0) const;
  bool operator==(const Aabb&) const = default;
};

Aabb bounds_of(const Primitive& p);

struct SceneSpec {
  std::uint64_t seed = 0;
  std::vector<Primitive> primitives;
  Aabb bounds;

  bool operator==(const SceneSpec&) const = default;
};

/// Colour, depth and camera of one frame. Depth is camera-frame z, with
/// kNoDepth where no surface was hit.
struct Frame {
  RgbImage rgb;
  DepthMap depth;
  Pose pose;
  Intrinsics intrinsics;
};
using GroundTruthFrame = Frame;

struct RayHit {
  double t = kNoDepth;
  Rgb8 color = kBackgroundGray;
};

namespace scene {

/// Desk-scale room: a checkered floor, a back wall, and 2-6 boxes standing on
/// the floor in front of the origin camera.
SceneSpec make_scene(std::uint64_t seed);
void validate(const SceneSpec& spec);

/// Nearest hit along origin + t * dir for t > 0.
RayHit cast_ray(const SceneSpec& spec, const Vec3& origin, const Vec3& dir);
GroundTruthFrame render_ground_truth(const SceneSpec& spec, const Pose& pose, const Intrinsics& k);

/// Distance from `p` to the closest primitive surface.
double distance_to_surface(const SceneSpec& spec, const Vec3& p);

}  // namespace scene

/// Reconstruction errors injected by the synthetic estimator.
struct NoiseConfig {
  double depth_sigma = 0.0;           // scene units, additive Gaussian per pixel
  double rotation_sigma_deg = 0.0;    // per-axis small-angle jitter
  double translation_sigma = 0.0;     // scene units per axis
  std::uint64_t seed = 0;

  bool enabled() const { return depth_sigma > 0.0 || rotation_sigma_deg > 0.0 || translation_sigma > 0.0; }
};

struct EstimatedGeometry {
  DepthMap depth;
  Pose pose;
};

/// Per-frame geometry and pose estimation from a video frame. Implementations
/// must be deterministic in (frame content, pose, frame_index).
class GeometryEstimator {
 public:
  virtual ~GeometryEstimator() = default;
  virtual EstimatedGeometry estimate(const RgbImage& rgb, const Pose& camera, const Intrinsics& k,
                                     std::int64_t frame_index) const = 0;
};

/// Exact scene geometry, optionally corrupted by NoiseConfig.
class GroundTruthEstimator final : public GeometryEstimator {
 public:
  explicit GroundTruthEstimator(std::shared_ptr<const SceneSpec> scene, NoiseConfig noise = {});

  EstimatedGeometry estimate(const RgbImage& rgb, const Pose& camera, const Intrinsics& k,
                             std::int64_t frame_index) const override;

  const NoiseConfig& noise() const { return noise_; }

 private:
  std::shared_ptr<const SceneSpec> scene_;
  NoiseConfig noise_;
};

std::shared_ptr<GeometryEstimator> ground_truth_estimator(const SceneSpec& spec, NoiseConfig noise = {});

}  // namespace anchorweave
