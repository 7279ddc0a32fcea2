#include "anchorweave/scene.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "anchorweave/error.hpp"

namespace anchorweave {

namespace {

constexpr double kHitEpsilon = 1e-9;
constexpr double kFloorY = 1.2;

std::pair<int, int> in_plane_axes(int normal_axis) {
  switch (normal_axis) {
    case 0: return {1, 2};
    case 1: return {0, 2};
    default: return {0, 1};
  }
}

Rgb8 random_color(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> channel(30, 230);
  return {static_cast<std::uint8_t>(channel(rng)), static_cast<std::uint8_t>(channel(rng)),
          static_cast<std::uint8_t>(channel(rng))};
}

Material random_material(std::mt19937_64& rng, double checker_probability, std::span<const double> periods) {
  Material m;
  m.primary = random_color(rng);
  m.secondary = random_color(rng);
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  if (coin(rng) < checker_probability) {
    std::uniform_int_distribution<std::size_t> pick(0, periods.size() - 1);
    m.checker_period = periods[pick(rng)];
  }
  return m;
}

RayHit intersect(const Box& box, const Vec3& origin, const Vec3& dir) {
  double t_near = -kNoDepth;
  double t_far = kNoDepth;
  int entry_axis = -1;
  for (int a = 0; a < 3; ++a) {
    const double lo = box.center[a] - box.half_extents[a];
    const double hi = box.center[a] + box.half_extents[a];
    if (dir[a] == 0.0) {
      if (origin[a] < lo || origin[a] > hi) return {};
      continue;
    }
    double t0 = (lo - origin[a]) / dir[a];
    double t1 = (hi - origin[a]) / dir[a];
    if (t0 > t1) std::swap(t0, t1);
    if (t0 > t_near) {
      t_near = t0;
      entry_axis = a;
    }
    t_far = std::min(t_far, t1);
  }
  // Rays starting inside a box are ignored; cameras never sit inside geometry.
  if (entry_axis < 0 || t_near > t_far || t_near <= kHitEpsilon) return {};
  const Vec3 hit = origin + t_near * dir;
  const int face = entry_axis * 2 + (dir[entry_axis] > 0.0 ? 0 : 1);
  const auto [a, b] = in_plane_axes(entry_axis);
  return {t_near, box.faces[static_cast<std::size_t>(face)].shade(hit[a], hit[b])};
}

RayHit intersect(const Plane& plane, const Vec3& origin, const Vec3& dir) {
  const int n = plane.normal_axis;
  if (dir[n] == 0.0) return {};
  const double t = (plane.center[n] - origin[n]) / dir[n];
  if (!(t > kHitEpsilon)) return {};
  const Vec3 hit = origin + t * dir;
  const auto [a, b] = in_plane_axes(n);
  if (std::abs(hit[a] - plane.center[a]) > plane.half_extents[0] ||
      std::abs(hit[b] - plane.center[b]) > plane.half_extents[1]) {
    return {};
  }
  return {t, plane.material.shade(hit[a], hit[b])};
}

double distance_to(const Box& box, const Vec3& p) {
  const Vec3 q = (p - box.center).cwiseAbs() - box.half_extents;
  const double outside = q.cwiseMax(0.0).norm();
  const double inside = std::min(q.maxCoeff(), 0.0);
  return outside > 0.0 ? outside : -inside;
}

double distance_to(const Plane& plane, const Vec3& p) {
  const int n = plane.normal_axis;
  const auto [a, b] = in_plane_axes(n);
  const double da = std::max(std::abs(p[a] - plane.center[a]) - plane.half_extents[0], 0.0);
  const double db = std::max(std::abs(p[b] - plane.center[b]) - plane.half_extents[1], 0.0);
  const double dn = p[n] - plane.center[n];
  return std::sqrt(da * da + db * db + dn * dn);
}

}  // namespace

Rgb8 Material::shade(double a, double b) const {
  if (checker_period <= 0.0) return primary;
  const auto ia = static_cast<long long>(std::floor(a / checker_period));
  const auto ib = static_cast<long long>(std::floor(b / checker_period));
  return ((ia + ib) & 1) == 0 ? primary : secondary;
}

bool Aabb::contains(const Aabb& other, double tol) const {
  return (other.min.array() >= min.array() - tol).all() && (other.max.array() <= max.array() + tol).all();
}

Aabb bounds_of(const Primitive& p) {
  return std::visit(
      [](const auto& prim) -> Aabb {
        using T = std::decay_t<decltype(prim)>;
        if constexpr (std::is_same_v<T, Box>) {
          return {prim.center - prim.half_extents, prim.center + prim.half_extents};
        } else {
          Vec3 h = Vec3::Zero();
          const auto [a, b] = in_plane_axes(prim.normal_axis);
          h[a] = prim.half_extents[0];
          h[b] = prim.half_extents[1];
          return {prim.center - h, prim.center + h};
        }
      },
      p);
}

namespace scene {

SceneSpec make_scene(std::uint64_t seed) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32), 0x5ce9eu};
  std::mt19937_64 rng(seq);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto uniform = [&](double lo, double hi) { return lo + (hi - lo) * unit(rng); };

  SceneSpec spec;
  spec.seed = seed;

  Plane floor;
  floor.normal_axis = 1;
  floor.center = Vec3(0.0, kFloorY, 4.5);
  floor.half_extents = Eigen::Vector2d(6.0, 7.5);
  floor.material = {random_color(rng), random_color(rng), 1.0};
  spec.primitives.emplace_back(floor);

  const std::array<double, 2> wall_periods{1.0, 1.5};
  Plane wall;
  wall.normal_axis = 2;
  wall.center = Vec3(0.0, kFloorY - 2.1, 12.0);
  wall.half_extents = Eigen::Vector2d(6.0, 2.1);
  wall.material = random_material(rng, 0.5, wall_periods);
  spec.primitives.emplace_back(wall);

  const std::array<double, 3> box_periods{0.5, 0.75, 1.0};
  std::uniform_int_distribution<int> box_count(2, 6);
  const int boxes = box_count(rng);
  for (int i = 0; i < boxes; ++i) {
    Box box;
    box.half_extents = Vec3(uniform(0.3, 0.8), uniform(0.3, 1.2), uniform(0.3, 0.8));
    box.center = Vec3(uniform(-4.0, 4.0), kFloorY - box.half_extents.y(), uniform(3.0, 10.0));
    for (auto& face : box.faces) face = random_material(rng, 0.5, box_periods);
    spec.primitives.emplace_back(box);
  }

  spec.bounds = bounds_of(spec.primitives.front());
  for (const auto& p : spec.primitives) {
    const Aabb b = bounds_of(p);
    spec.bounds.min = spec.bounds.min.cwiseMin(b.min);
    spec.bounds.max = spec.bounds.max.cwiseMax(b.max);
  }
  return spec;
}

void validate(const SceneSpec& spec) {
  if (spec.primitives.empty()) throw Error(ErrorCode::validation, "scene has no primitives");
  for (const auto& p : spec.primitives) {
    const bool ok = std::visit(
        [](const auto& prim) {
          using T = std::decay_t<decltype(prim)>;
          if constexpr (std::is_same_v<T, Box>) {
            return (prim.half_extents.array() > 0.0).all();
          } else {
            return prim.normal_axis >= 0 && prim.normal_axis < 3 && (prim.half_extents.array() > 0.0).all();
          }
        },
        p);
    if (!ok) throw Error(ErrorCode::validation, "primitive extents must be positive");
  }
}

RayHit cast_ray(const SceneSpec& spec, const Vec3& origin, const Vec3& dir) {
  RayHit best;
  for (const auto& p : spec.primitives) {
    const RayHit hit = std::visit([&](const auto& prim) { return intersect(prim, origin, dir); }, p);
    if (hit.t < best.t) best = hit;
  }
  return best;
}

GroundTruthFrame render_ground_truth(const SceneSpec& spec, const Pose& pose, const Intrinsics& k) {
  geometry::validate(pose);
  geometry::validate(k);
  GroundTruthFrame frame{RgbImage(k.width, k.height, kBackgroundGray), DepthMap(k.width, k.height, kNoDepth),
                         pose, k};
  for (int y = 0; y < k.height; ++y) {
    for (int x = 0; x < k.width; ++x) {
      // Camera-frame ray with unit z, so the hit parameter is the camera depth.
      const Vec3 dir_cam((x - k.cx) / k.fx, (y - k.cy) / k.fy, 1.0);
      const RayHit hit = cast_ray(spec, pose.translation, pose.rotation * dir_cam);
      if (std::isfinite(hit.t)) {
        frame.rgb(x, y) = hit.color;
        frame.depth(x, y) = hit.t;
      }
    }
  }
  return frame;
}

double distance_to_surface(const SceneSpec& spec, const Vec3& p) {
  double best = kNoDepth;
  for (const auto& prim : spec.primitives) {
    best = std::min(best, std::visit([&](const auto& q) { return distance_to(q, p); }, prim));
  }
  return best;
}

}  // namespace scene

GroundTruthEstimator::GroundTruthEstimator(std::shared_ptr<const SceneSpec> scene, NoiseConfig noise)
    : scene_(std::move(scene)), noise_(noise) {
  if (!scene_) throw Error(ErrorCode::validation, "estimator requires a scene");
}

EstimatedGeometry GroundTruthEstimator::estimate(const RgbImage&, const Pose& camera, const Intrinsics& k,
                                                 std::int64_t frame_index) const {
  EstimatedGeometry out{scene::render_ground_truth(*scene_, camera, k).depth, camera};
  if (!noise_.enabled()) return out;

  std::seed_seq seq{static_cast<std::uint32_t>(noise_.seed), static_cast<std::uint32_t>(noise_.seed >> 32),
                    static_cast<std::uint32_t>(frame_index), static_cast<std::uint32_t>(frame_index >> 32)};
  std::mt19937_64 rng(seq);
  std::normal_distribution<double> gauss(0.0, 1.0);

  if (noise_.depth_sigma > 0.0) {
    for (double& d : out.depth.pixels()) {
      if (!std::isfinite(d)) continue;
      d = std::max(d + noise_.depth_sigma * gauss(rng), 0.05 * d);
    }
  }
  if (noise_.rotation_sigma_deg > 0.0 || noise_.translation_sigma > 0.0) {
    const double rs = noise_.rotation_sigma_deg * M_PI / 180.0;
    const Vec3 omega(rs * gauss(rng), rs * gauss(rng), rs * gauss(rng));
    const Vec3 delta(noise_.translation_sigma * gauss(rng), noise_.translation_sigma * gauss(rng),
                     noise_.translation_sigma * gauss(rng));
    out.pose.rotation = camera.rotation * geometry::exp_so3(omega);
    out.pose.translation = camera.translation + delta;
  }
  return out;
}

std::shared_ptr<GeometryEstimator> ground_truth_estimator(const SceneSpec& spec, NoiseConfig noise) {
  return std::make_shared<GroundTruthEstimator>(std::make_shared<const SceneSpec>(spec), noise);
}

}  // namespace anchorweave
