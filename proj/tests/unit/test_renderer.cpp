#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "anchorweave/anchor_renderer.hpp"
#include "anchorweave/error.hpp"
#include "anchorweave/metrics.hpp"
#include "anchorweave/scene.hpp"
#include "oracles.hpp"

using namespace anchorweave;

namespace {

LocalPointCloud cloud_of(std::initializer_list<std::pair<Vec3, Rgb8>> pts) {
  LocalPointCloud c;
  for (const auto& [p, col] : pts) c.push_back(p, col);
  return c;
}

}  // namespace

TEST(Renderer, EmptyCloudIsInvisible) {
  const Intrinsics k;
  const AnchorFrame f = render::render_anchor_frame({}, Pose::identity(), k, 1.0);
  EXPECT_FALSE(f.any_visible());
  EXPECT_EQ(f.rgb, RgbImage(128, 128, kBackgroundGray));
  EXPECT_EQ(f.depth, DepthMap(128, 128, kNoDepth));

  ChunkPlan chunk{0, {Pose::identity(), geometry::translate(0, 0, 1)}, 0, 2};
  const AnchorClip clip = render::render_anchor_clip({}, chunk, k, 1.0);
  ASSERT_EQ(clip.frames.size(), 2u);
  for (const auto& fr : clip.frames) EXPECT_FALSE(fr.any_visible());
}

TEST(Renderer, InvisibleClip) {
  const AnchorClip clip = render::invisible_clip(8, Intrinsics{});
  ASSERT_EQ(clip.frames.size(), 8u);
  EXPECT_TRUE(clip.is_padding());
  for (const auto& f : clip.frames) {
    EXPECT_FALSE(f.any_visible());
    EXPECT_EQ(f.depth(17, 90), kNoDepth);
  }
  EXPECT_THROW(render::invisible_clip(0, Intrinsics{}), Error);
}

TEST(Renderer, ClipAtCapturePose) {
  LocalPointCloud c = cloud_of({{Vec3(0, 0, 3), {9, 9, 9}}});
  c.capture_pose = geometry::translate(0.2, 0, 0);
  ChunkPlan one{0, {c.capture_pose}, 0, 1};
  const AnchorClip clip = render::render_anchor_clip(c, one, Intrinsics{}, 1.0, 4);
  ASSERT_EQ(clip.frames.size(), 1u);
  EXPECT_LE(geometry::max_abs_difference(clip.rel_poses[0], Pose::identity()), 1e-15);
  EXPECT_EQ(clip.source_memory_id, 4);

  ChunkPlan eight{0, {}, 0, 8};
  for (int i = 0; i < 8; ++i) eight.poses.push_back(geometry::translate(0, 0, 0.1 * i));
  const AnchorClip c8 = render::render_anchor_clip(c, eight, Intrinsics{}, 1.0);
  EXPECT_EQ(c8.frames.size(), 8u);
  EXPECT_EQ(c8.rel_poses.size(), 8u);
}

TEST(Renderer, NearerPointWins) {
  const Intrinsics k;
  // Both points on the optical axis through pixel (63.5, 63.5) -> nearest (64, 64).
  for (bool near_first : {true, false}) {
    LocalPointCloud c = near_first ? cloud_of({{Vec3(0, 0, 2), {255, 0, 0}}, {Vec3(0, 0, 5), {0, 255, 0}}})
                                   : cloud_of({{Vec3(0, 0, 5), {0, 255, 0}}, {Vec3(0, 0, 2), {255, 0, 0}}});
    const AnchorFrame f = render::render_anchor_frame(c, Pose::identity(), k, 1.0);
    EXPECT_EQ(f.depth(64, 64), 2.0);
    EXPECT_EQ(f.rgb(64, 64), (Rgb8{255, 0, 0}));
    EXPECT_EQ(count_set(f.visibility), 4u);  // the four pixels around the centre
  }
}

TEST(Renderer, TieKeepsLowerIndex) {
  const LocalPointCloud c = cloud_of({{Vec3(0, 0, 3), {1, 1, 1}}, {Vec3(0, 0, 3 + 1e-9), {2, 2, 2}}});
  const AnchorFrame f = render::render_anchor_frame(c, Pose::identity(), Intrinsics{}, 1.0);
  EXPECT_EQ(f.rgb(64, 64), (Rgb8{1, 1, 1}));
  const LocalPointCloud d = cloud_of({{Vec3(0, 0, 3 + 1e-9), {2, 2, 2}}, {Vec3(0, 0, 3), {1, 1, 1}}});
  EXPECT_EQ(render::render_anchor_frame(d, Pose::identity(), Intrinsics{}, 1.0).rgb(64, 64), (Rgb8{2, 2, 2}));
}

TEST(Renderer, PointsBehindCameraIgnored) {
  const LocalPointCloud c = cloud_of({{Vec3(0, 0, -2), {1, 1, 1}}, {Vec3(0.1, 0, 0), {1, 1, 1}}});
  EXPECT_FALSE(render::render_anchor_frame(c, Pose::identity(), Intrinsics{}, 2.0).any_visible());
}

TEST(Renderer, FootprintMatchesOracle) {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> uv(-3.0, 20.0);
  std::uniform_real_distribution<double> rad(0.0, 3.0);
  for (int i = 0; i < 3000; ++i) {
    const double u = uv(rng);
    const double v = uv(rng);
    const double r = i % 10 == 0 ? 1.0 : rad(rng);
    std::vector<std::pair<int, int>> got;
    render::for_each_splat_pixel(u, v, r, 17, 13, [&](int x, int y) { got.emplace_back(x, y); });
    std::sort(got.begin(), got.end(), [](auto a, auto b) { return std::tie(a.second, a.first) < std::tie(b.second, b.first); });
    ASSERT_EQ(got, awtest::splat_pixels(u, v, r, 17, 13)) << u << "," << v << " r=" << r;
  }
  // A splat centred on a pixel centre with radius 1 touches only that pixel.
  int n = 0;
  render::for_each_splat_pixel(5.0, 5.0, 1.0, 10, 10, [&](int, int) { ++n; });
  EXPECT_EQ(n, 1);
}

TEST(Renderer, DepthIsMinimumOverSplats) {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> xy(-0.2, 0.2);
  std::uniform_real_distribution<double> z(1.0, 4.0);
  LocalPointCloud c;
  for (int i = 0; i < 400; ++i) c.push_back(Vec3(xy(rng), xy(rng), z(rng)), {static_cast<std::uint8_t>(i), 0, 0});
  const Intrinsics k;
  const double radius = 1.7;
  const AnchorFrame f = render::render_anchor_frame(c, Pose::identity(), k, radius);
  DepthMap best(k.width, k.height, kNoDepth);
  for (std::size_t i = 0; i < c.size(); ++i) {
    const auto p = awtest::project(c.point(i), Pose::identity(), k);
    for (auto [x, y] : awtest::splat_pixels(p.u, p.v, radius, k.width, k.height)) {
      best(x, y) = std::min(best(x, y), p.depth);
    }
  }
  for (std::size_t i = 0; i < best.size(); ++i) {
    ASSERT_EQ(f.visibility[i] != 0, std::isfinite(best[i]));
    if (f.visibility[i]) {
      ASSERT_NEAR(f.depth[i], best[i], 1e-12);
    }
  }
}

TEST(Renderer, VisibilityMonotoneInRadius) {
  const SceneSpec s = scene::make_scene(4);
  const auto gt = scene::render_ground_truth(s, Pose::identity(), Intrinsics{});
  const auto cloud = memory::build_cloud(gt, 3);
  const Pose view = geometry::compose(geometry::translate(0.4, 0, 0.3), geometry::rotate_y(-0.2));
  Mask prev = render::render_anchor_frame(cloud, view, Intrinsics{}, 0.0).visibility;
  for (double r : {0.5, 1.0, 1.5, 2.5}) {
    const Mask cur = render::render_anchor_frame(cloud, view, Intrinsics{}, r).visibility;
    for (std::size_t i = 0; i < cur.size(); ++i) ASSERT_LE(prev[i], cur[i]);
    prev = cur;
  }
}

TEST(Renderer, SelfRenderReproducesFrame) {
  const Intrinsics k;
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    const SceneSpec s = scene::make_scene(seed);
    const Pose cam = geometry::rotate_y(0.1 * seed);
    const auto gt = scene::render_ground_truth(s, cam, k);
    const AnchorFrame f = render::render_anchor_frame(memory::build_cloud(gt, 1), cam, k, 1.0);
    EXPECT_GE(metrics::psnr(f.rgb, gt.rgb, f.visibility), 30.0);
    for (std::size_t i = 0; i < gt.depth.size(); ++i) {
      EXPECT_EQ(f.visibility[i] != 0, std::isfinite(gt.depth[i]));
    }
  }
}

TEST(Renderer, Deterministic) {
  const auto gt = scene::render_ground_truth(scene::make_scene(2), Pose::identity(), Intrinsics{});
  const auto cloud = memory::build_cloud(gt, 2);
  const Pose v = geometry::translate(0.1, 0.1, 0.4);
  const AnchorFrame a = render::render_anchor_frame(cloud, v, Intrinsics{}, 1.3);
  const AnchorFrame b = render::render_anchor_frame(cloud, v, Intrinsics{}, 1.3);
  EXPECT_EQ(a.rgb, b.rgb);
  EXPECT_EQ(a.depth, b.depth);
  EXPECT_THROW(render::render_anchor_frame(cloud, v, Intrinsics{}, -1.0), Error);
}
