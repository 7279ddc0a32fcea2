#include "anchorweave/anchor_renderer.hpp"

#include <algorithm>

#include "anchorweave/error.hpp"

namespace anchorweave {

AnchorFrame AnchorFrame::invisible(int width, int height) {
  return {RgbImage(width, height, kBackgroundGray), Mask(width, height, 0), DepthMap(width, height, kNoDepth)};
}

bool AnchorFrame::any_visible() const {
  return std::any_of(visibility.pixels().begin(), visibility.pixels().end(), [](std::uint8_t m) { return m != 0; });
}

namespace render {

kernels::ProjectionParams projection_params(const Pose& camera, const Intrinsics& k) {
  const Pose w2c = geometry::invert(camera);
  kernels::ProjectionParams p{};
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) p.r[r * 3 + c] = w2c.rotation(r, c);
    p.t[r] = w2c.translation[r];
  }
  p.fx = k.fx;
  p.fy = k.fy;
  p.cx = k.cx;
  p.cy = k.cy;
  return p;
}

ProjectedCloud project_cloud(const LocalPointCloud& cloud, const Pose& camera, const Intrinsics& k) {
  ProjectedCloud out;
  const std::size_t n = cloud.size();
  out.u.resize(n);
  out.v.resize(n);
  out.depth.resize(n);
  kernels::project_points(projection_params(camera, k), {cloud.x, cloud.y, cloud.z}, {out.u, out.v, out.depth});
  return out;
}

AnchorFrame render_anchor_frame(const LocalPointCloud& cloud, const Pose& target, const Intrinsics& k,
                                double splat_radius) {
  if (!(splat_radius >= 0.0)) throw Error(ErrorCode::validation, "splat radius must be >= 0");
  geometry::validate(k);
  AnchorFrame frame = AnchorFrame::invisible(k.width, k.height);
  if (cloud.empty()) return frame;

  const ProjectedCloud proj = project_cloud(cloud, target, k);
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const double d = proj.depth[i];
    if (!(d > 0.0)) continue;
    for_each_splat_pixel(proj.u[i], proj.v[i], splat_radius, k.width, k.height, [&](int px, int py) {
      const std::size_t idx = frame.depth.index(px, py);
      if (frame.visibility[idx] && !(d < frame.depth[idx] - kDepthTieEpsilon)) return;
      frame.visibility[idx] = 1;
      frame.depth[idx] = d;
      frame.rgb[idx] = cloud.colors[i];
    });
  }
  return frame;
}

AnchorClip render_anchor_clip(const LocalPointCloud& cloud, const ChunkPlan& chunk, const Intrinsics& k,
                              double splat_radius, std::optional<std::int64_t> source_memory_id) {
  if (chunk.poses.empty()) throw Error(ErrorCode::validation, "chunk has no poses");
  AnchorClip clip;
  clip.source_memory_id = source_memory_id;
  clip.frames.reserve(chunk.size());
  clip.rel_poses.reserve(chunk.size());
  for (const Pose& target : chunk.poses) {
    clip.frames.push_back(render_anchor_frame(cloud, target, k, splat_radius));
    clip.rel_poses.push_back(geometry::relative_pose(cloud.capture_pose, target));
  }
  return clip;
}

AnchorClip invisible_clip(std::size_t length, const Intrinsics& k) {
  if (length < 1) throw Error(ErrorCode::validation, "invisible clip length must be >= 1");
  AnchorClip clip;
  clip.frames.assign(length, AnchorFrame::invisible(k.width, k.height));
  clip.rel_poses.assign(length, Pose::identity());
  return clip;
}

}  // namespace render
}  // namespace anchorweave
