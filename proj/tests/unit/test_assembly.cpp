#include <algorithm>
#include <random>

#include <gtest/gtest.h>

#include "anchorweave/anchor_assembly.hpp"
#include "anchorweave/error.hpp"
#include "anchorweave/scene.hpp"
#include "anchorweave/weaving_fusion.hpp"
#include "oracles.hpp"

using namespace anchorweave;

namespace {

std::vector<Pose> walk(int n) {
  std::vector<Pose> out;
  for (int i = 0; i < n; ++i) {
    out.push_back(geometry::compose(geometry::translate(0.02 * i, 0, 0.05 * i), geometry::rotate_y(0.01 * i)));
  }
  return out;
}

MemoryBank small_bank(const Intrinsics& k) {
  const SceneSpec s = scene::make_scene(11);
  MemoryBank bank;
  for (int i = 0; i < 5; ++i) {
    const Pose p = geometry::compose(geometry::translate(0.1 * i, 0, 0), geometry::rotate_y(-0.1 * i));
    bank.add(i, memory::build_cloud(scene::render_ground_truth(s, p, k), 2));
  }
  return bank;
}

}  // namespace

TEST(Assembly, ChunkPlanArithmetic) {
  auto sizes = [](int t, int d) {
    std::vector<std::size_t> out;
    for (const auto& c : assembly::plan_chunks(walk(t), d)) out.push_back(c.size());
    return out;
  };
  EXPECT_EQ(sizes(48, 8), std::vector<std::size_t>(6, 8));
  EXPECT_EQ(sizes(49, 8), (std::vector<std::size_t>{8, 8, 8, 8, 8, 8, 1}));
  EXPECT_EQ(sizes(5, 8), std::vector<std::size_t>{5});
  const auto chunks = assembly::plan_chunks(walk(20), 8);
  EXPECT_EQ(chunks[2].frame_begin, 16);
  EXPECT_EQ(chunks[2].frame_end, 20);
  EXPECT_EQ(chunks[1].index, 1);
  EXPECT_EQ(chunks[1].poses[0], walk(20)[8]);
  EXPECT_THROW(assembly::plan_chunks(walk(3), 0), Error);
  EXPECT_THROW(assembly::plan_chunks({}, 8), Error);
}

TEST(Assembly, RelativeTrajectory) {
  const auto traj = walk(10);
  const auto rel = assembly::relative_trajectory(traj);
  EXPECT_EQ(rel[0], Pose::identity());
  for (std::size_t t = 0; t < traj.size(); ++t) {
    EXPECT_LE(awtest::max_abs(rel[t].matrix(), awtest::relative_matrix(traj[t], traj[0])),
              1e-12);
  }
  std::vector<Pose> still(4, geometry::translate(1, 2, 3));
  for (const Pose& p : assembly::relative_trajectory(still)) EXPECT_LE(geometry::max_abs_difference(p, Pose::identity()), 1e-15);
}

TEST(Assembly, FullRetrievalsHaveNoPadding) {
  const Intrinsics k;
  const MemoryBank bank = small_bank(k);
  const auto chunks = assembly::plan_chunks(walk(48), 8);
  std::vector<RetrievalResult> rs(chunks.size());
  for (auto& r : rs) r.selected = {4, 0, 2, 1};
  const AnchorBundle b = assembly::assemble(bank, chunks, rs, 4, k, 1.0);
  ASSERT_EQ(b.videos.size(), 4u);
  EXPECT_EQ(b.length(), 48u);
  for (const auto& v : b.videos) {
    EXPECT_EQ(v.frames.size(), 48u);
    EXPECT_EQ(v.rel_poses.size(), 48u);
    for (const auto& src : v.per_chunk_sources) EXPECT_TRUE(src.has_value());
  }
}

TEST(Assembly, RandomRetrievalsAlignWithSources) {
  const Intrinsics k;
  const MemoryBank bank = small_bank(k);
  std::mt19937_64 rng(3);
  for (int rep = 0; rep < 6; ++rep) {
    const int budget = 1 + rep % 4;
    const auto traj = walk(9 + 7 * rep);
    const auto chunks = assembly::plan_chunks(traj, 8);
    std::vector<RetrievalResult> rs(chunks.size());
    for (auto& r : rs) {
      const std::size_t n = rng() % (budget + 1);
      for (std::size_t j = 0; j < n; ++j) r.selected.push_back(static_cast<std::int64_t>(rng() % bank.size()));
    }
    const AnchorBundle b = assembly::assemble(bank, chunks, rs, budget, k, 1.0);
    ASSERT_EQ(b.videos.size(), static_cast<std::size_t>(budget));
    for (std::size_t j = 0; j < b.videos.size(); ++j) {
      const AnchorVideo& v = b.videos[j];
      ASSERT_EQ(v.frames.size(), traj.size());
      ASSERT_EQ(v.per_chunk_sources.size(), chunks.size());
      for (std::size_t m = 0; m < chunks.size(); ++m) {
        const RetrievalResult& r = rs[m];
        for (auto t = chunks[m].frame_begin; t < chunks[m].frame_end; ++t) {
          const auto tt = static_cast<std::size_t>(t);
          if (j < r.selected.size()) {
            EXPECT_EQ(v.per_chunk_sources[m], r.selected[j]);
            const Pose& cap = bank.at(r.selected[j]).cloud.capture_pose;
            EXPECT_EQ(v.rel_poses[tt], geometry::relative_pose(cap, traj[tt]));
            EXPECT_LE(awtest::max_abs(v.rel_poses[tt].matrix(), awtest::relative_matrix(cap, traj[tt])), 1e-12);
          } else {
            EXPECT_FALSE(v.per_chunk_sources[m].has_value());
            EXPECT_FALSE(v.frames[tt].any_visible());
            EXPECT_EQ(v.frames[tt].depth, DepthMap(k.width, k.height, kNoDepth));
          }
        }
      }
    }
  }
}

TEST(Assembly, PaddingIsInertInFusion) {
  const Intrinsics k;
  const MemoryBank bank = small_bank(k);
  const auto chunks = assembly::plan_chunks(walk(8), 8);
  std::vector<RetrievalResult> rs(1);
  rs[0].selected = {3, 1};
  const AnchorBundle padded = assembly::assemble(bank, chunks, rs, 4, k, 1.0);
  const AnchorBundle tight = assembly::assemble(bank, chunks, rs, 2, k, 1.0);
  const FusionConfig cfg;
  for (std::size_t t = 0; t < 8; ++t) {
    const auto a = fusion::fuse_slots(padded.frames_at(t), padded.rel_poses_at(t), cfg);
    const auto b = fusion::fuse_slots(tight.frames_at(t), tight.rel_poses_at(t), cfg);
    EXPECT_EQ(a.rgb, b.rgb);
    EXPECT_EQ(a.hole_mask, b.hole_mask);
    EXPECT_EQ(a.weights[2], 0.0);
    EXPECT_EQ(a.weights[3], 0.0);
  }
}

TEST(Assembly, Errors) {
  const Intrinsics k;
  const MemoryBank bank = small_bank(k);
  const auto chunks = assembly::plan_chunks(walk(16), 8);
  std::vector<RetrievalResult> rs(1);
  try {
    assembly::assemble(bank, chunks, rs, 4, k, 1.0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::shape);
  }
  rs.resize(2);
  rs[1].selected = {42};
  try {
    assembly::assemble(bank, chunks, rs, 4, k, 1.0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::integrity);
  }
  rs[1].selected = {0, 1, 2};
  EXPECT_THROW(assembly::assemble(bank, chunks, rs, 2, k, 1.0), Error);
}
