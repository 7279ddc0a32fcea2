#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <vector>

#include "anchorweave/chunk_plan.hpp"
#include "anchorweave/geometry.hpp"
#include "anchorweave/kernels.hpp"
#include "anchorweave/memory_bank.hpp"
#include "anchorweave/raster.hpp"

namespace anchorweave {

/// One rendered view of a point cloud. Invisible pixels carry background
/// gray and kNoDepth.
struct AnchorFrame {
  RgbImage rgb;
  Mask visibility;
  DepthMap depth;

  static AnchorFrame invisible(int width, int height);
  bool any_visible() const;
};

struct AnchorClip {
  std::vector<AnchorFrame> frames;
  std::vector<Pose> rel_poses;
  std::optional<std::int64_t> source_memory_id;  // nullopt marks a padding clip

  bool is_padding() const noexcept { return !source_memory_id.has_value(); }
};

namespace render {

/// Points closer than this in depth are treated as tied; the lower point index
/// keeps the pixel.
inline constexpr double kDepthTieEpsilon = 1e-6;
/// Squared-distance margin (px^2) on the open disc boundary so that points
/// landing on a pixel centre up to rounding never leak into the 4-neighbours.
inline constexpr double kFootprintGuard = 1e-6;

kernels::ProjectionParams projection_params(const Pose& camera, const Intrinsics& k);

/// Visits the pixels covered by a splat centred at (u, v): the pixel nearest
/// the centre plus every pixel centre strictly inside the disc of `radius`.
template <typename Fn>
void for_each_splat_pixel(double u, double v, double radius, int width, int height, Fn&& fn) {
  // Also rejects NaN and huge coordinates from points near the camera plane.
  if (!(u > -radius - 1.0 && u < width + radius && v > -radius - 1.0 && v < height + radius)) return;
  const double nu = std::floor(u + 0.5);
  const double nv = std::floor(v + 0.5);
  const double r2 = radius * radius - kFootprintGuard;
  const int x0 = static_cast<int>(std::max(std::ceil(u - radius), 0.0));
  const int x1 = static_cast<int>(std::min(std::floor(u + radius), static_cast<double>(width - 1)));
  const int y0 = static_cast<int>(std::max(std::ceil(v - radius), 0.0));
  const int y1 = static_cast<int>(std::min(std::floor(v + radius), static_cast<double>(height - 1)));
  bool nearest_done = false;
  for (int py = y0; py <= y1; ++py) {
    for (int px = x0; px <= x1; ++px) {
      const double du = px - u;
      const double dv = py - v;
      const bool nearest = (px == nu && py == nv);
      if (nearest || du * du + dv * dv < r2) {
        fn(px, py);
        nearest_done = nearest_done || nearest;
      }
    }
  }
  if (!nearest_done && nu >= 0.0 && nv >= 0.0 && nu < width && nv < height) {
    fn(static_cast<int>(nu), static_cast<int>(nv));
  }
}

/// Projects all cloud points into `camera` using the dispatched kernel.
struct ProjectedCloud {
  std::vector<double> u, v, depth;
};
ProjectedCloud project_cloud(const LocalPointCloud& cloud, const Pose& camera, const Intrinsics& k);

AnchorFrame render_anchor_frame(const LocalPointCloud& cloud, const Pose& target, const Intrinsics& k,
                                double splat_radius);

/// Renders one frame per chunk pose; rel_poses are memory-to-target.
AnchorClip render_anchor_clip(const LocalPointCloud& cloud, const ChunkPlan& chunk, const Intrinsics& k,
                              double splat_radius, std::optional<std::int64_t> source_memory_id = std::nullopt);

AnchorClip invisible_clip(std::size_t length, const Intrinsics& k);

}  // namespace render
}  // namespace anchorweave
