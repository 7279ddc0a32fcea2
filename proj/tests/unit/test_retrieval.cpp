#include <cmath>

#include <gtest/gtest.h>

#include "anchorweave/error.hpp"
#include "anchorweave/retrieval.hpp"
#include "anchorweave/scene.hpp"
#include "greedy_oracle.hpp"

using namespace anchorweave;

namespace {

SceneSpec wall_scene() {
  Plane p;
  p.normal_axis = 2;
  p.center = Vec3(0, 0, 5);
  p.half_extents = Eigen::Vector2d(50, 50);
  p.material = {{10, 20, 30}, {40, 50, 60}, 0.3};
  SceneSpec s;
  s.primitives.emplace_back(p);
  return s;
}

LocalPointCloud columns(const Frame& f, int begin, int end) {
  Frame cut = f;
  for (int y = 0; y < f.depth.height(); ++y) {
    for (int x = 0; x < f.depth.width(); ++x) {
      if (x < begin || x >= end) cut.depth(x, y) = kNoDepth;
    }
  }
  return memory::build_cloud(cut, 1);
}

ChunkPlan chunk_of(std::vector<Pose> poses) {
  ChunkPlan c;
  c.frame_end = static_cast<std::int64_t>(poses.size());
  c.poses = std::move(poses);
  return c;
}

}  // namespace

TEST(CoverageMap, BitOperations) {
  CoverageMap a(2, 9, 9);
  CoverageMap b(2, 9, 9);
  EXPECT_EQ(a.words_per_frame(), 2u);
  a.set(0, 8, 8);
  a.set(1, 0, 0);
  b.set(1, 0, 0);
  b.set(1, 3, 4);
  EXPECT_TRUE(a.test(0, 8, 8));
  EXPECT_FALSE(a.test(1, 8, 8));
  EXPECT_EQ(a.count(), 2u);
  EXPECT_EQ(a.count_new(b), 1u);
  a |= b;
  EXPECT_EQ(a.count(), 3u);
  EXPECT_THROW(a.count_new(CoverageMap(1, 9, 9)), Error);
}

TEST(Retrieval, FovCandidateExamples) {
  const Intrinsics k;
  const auto f = scene::render_ground_truth(scene::make_scene(0), geometry::translate(0.3, 0, 0.5), k);
  MemoryBank bank;
  bank.add(0, memory::build_cloud(f, 4));
  LocalPointCloud behind;
  for (int i = 0; i < 50; ++i) behind.push_back(Vec3(0.01 * i, 0, -3.0), {1, 1, 1});
  bank.add(1, behind);
  bank.add(2, {});
  const ChunkPlan chunk = chunk_of({f.pose, geometry::translate(0, 0, 0.2)});
  for (double tau : {0.0, 0.5, 1.0}) {
    EXPECT_EQ(retrieval::fov_candidates(bank, chunk, k, tau), std::vector<std::int64_t>{0}) << tau;
  }
  EXPECT_THROW(retrieval::fov_candidates(bank, chunk, k, 1.5), Error);
}

TEST(Retrieval, FovTauZeroMatchesFullCloudTest) {
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    std::mt19937_64 rng(seed);
    MemoryBank bank;
    const int n = 1 + static_cast<int>(seed % 5);
    for (int m = 0; m < n; ++m) bank.add(m, awtest::random_blob(rng, 50 + rng() % 400, rng() % 3 == 0, Pose::identity()));
    const ChunkPlan chunk = chunk_of({geometry::rotate_y(0.4 * (seed % 3)), geometry::translate(0.5, 0, 0)});
    const Intrinsics k;
    std::vector<std::int64_t> expected;
    for (const auto& e : bank.entries()) {
      if (awtest::in_view(e->cloud, chunk, k, 0.0)) expected.push_back(e->id);
    }
    EXPECT_EQ(retrieval::fov_candidates(bank, chunk, k, 0.0), expected);
  }
}

TEST(Retrieval, SelfCoverageIsDense) {
  const Intrinsics k;
  for (std::uint64_t seed = 0; seed < 4; ++seed) {
    const auto f = scene::render_ground_truth(scene::make_scene(seed), geometry::rotate_y(0.2), k);
    const ChunkPlan chunk = chunk_of({f.pose});
    const CoverageMap map = retrieval::coverage_of(memory::build_cloud(f, 1), chunk, k, 1.0, 4);
    std::size_t surface_cells = 0;
    std::size_t covered = 0;
    for (int cy = 0; cy < 32; ++cy) {
      for (int cx = 0; cx < 32; ++cx) {
        bool any = false;
        for (int y = 4 * cy; y < 4 * cy + 4; ++y) {
          for (int x = 4 * cx; x < 4 * cx + 4; ++x) any = any || std::isfinite(f.depth(x, y));
        }
        surface_cells += any;
        covered += any && map.test(0, cx, cy);
      }
    }
    EXPECT_GE(static_cast<double>(covered) / static_cast<double>(surface_cells), 0.9);
  }
  EXPECT_EQ(retrieval::coverage_of({}, chunk_of({Pose::identity()}), k, 1.0, 4).count(), 0u);
}

TEST(Retrieval, CoverageMatchesOracle) {
  for (std::uint64_t seed = 100; seed < 130; ++seed) {
    const awtest::RandomBankCase c = awtest::random_bank_case(seed);
    for (const auto& e : c.bank.entries()) {
      const CoverageMap map = retrieval::coverage_of(e->cloud, c.chunk, c.k, c.cfg.splat_radius, c.cfg.coverage_scale);
      const auto cells = awtest::coverage(e->cloud, c.chunk, c.k, c.cfg.splat_radius, c.cfg.coverage_scale);
      ASSERT_EQ(map.count(), cells.size());
      for (const auto& [f, x, y] : cells) ASSERT_TRUE(map.test(f, x, y));
    }
  }
}

TEST(Retrieval, SeparatedObjectsHaveDisjointCoverage) {
  SceneSpec s;
  for (double x : {-2.0, 2.0}) {
    Box b;
    b.center = Vec3(x, 0, 6);
    b.half_extents = Vec3(0.5, 0.5, 0.5);
    s.primitives.emplace_back(b);
  }
  const Intrinsics k;
  const auto f = scene::render_ground_truth(s, Pose::identity(), k);
  const ChunkPlan chunk = chunk_of({Pose::identity(), geometry::translate(0, 0, 0.3)});
  const CoverageMap left = retrieval::coverage_of(columns(f, 0, 64), chunk, k, 1.0, 4);
  const CoverageMap right = retrieval::coverage_of(columns(f, 64, 128), chunk, k, 1.0, 4);
  ASSERT_GT(left.count(), 0u);
  ASSERT_GT(right.count(), 0u);
  EXPECT_EQ(left.count_new(right), left.count());
}

TEST(Retrieval, DisjointThirdsExample) {
  const Intrinsics k;
  const auto f = scene::render_ground_truth(wall_scene(), Pose::identity(), k);
  MemoryBank bank;
  bank.add(0, columns(f, 40, 92));   // B, 13 cell columns
  bank.add(1, columns(f, 92, 128));  // C, 9 cell columns
  bank.add(2, columns(f, 0, 40));    // A, latest, 10 cell columns
  const ChunkPlan chunk = chunk_of({Pose::identity(), Pose::identity()});
  RetrievalConfig cfg;
  cfg.budget = 4;
  const RetrievalResult r = retrieval::greedy_retrieve(bank, chunk, k, cfg);
  EXPECT_EQ(r.selected, (std::vector<std::int64_t>{2, 0, 1}));
  EXPECT_EQ(r.gains, (std::vector<std::uint64_t>{2 * 10 * 32, 2 * 13 * 32, 2 * 9 * 32}));
  EXPECT_EQ(r.termination, Termination::full_coverage);
  EXPECT_EQ(r.final_coverage_fraction, 1.0);

  awtest::RandomBankCase c{bank, chunk, k, cfg};
  EXPECT_EQ(awtest::check_greedy(c, r), "");
}

TEST(Retrieval, TerminationReasons) {
  const Intrinsics k;
  const auto f = scene::render_ground_truth(wall_scene(), Pose::identity(), k);
  const ChunkPlan chunk = chunk_of({Pose::identity()});

  MemoryBank one;
  one.add(0, columns(f, 0, 64));
  RetrievalResult r = retrieval::greedy_retrieve(one, chunk, k, {});
  EXPECT_EQ(r.selected, std::vector<std::int64_t>{0});
  EXPECT_EQ(r.termination, Termination::full_coverage);

  MemoryBank blind;
  LocalPointCloud behind;
  behind.push_back(Vec3(0, 0, -1), {1, 1, 1});
  blind.add(0, behind);
  blind.add(1, behind);
  r = retrieval::greedy_retrieve(blind, chunk, k, {});
  EXPECT_EQ(r.selected, std::vector<std::int64_t>{1});
  EXPECT_EQ(r.termination, Termination::pool_exhausted);
  EXPECT_EQ(r.final_coverage_fraction, 0.0);

  MemoryBank many;
  for (int i = 0; i < 8; ++i) many.add(i, columns(f, 16 * i, 16 * i + 16));
  RetrievalConfig cfg;
  cfg.budget = 3;
  r = retrieval::greedy_retrieve(many, chunk, k, cfg);
  EXPECT_EQ(r.selected.size(), 3u);
  EXPECT_EQ(r.termination, Termination::budget_exhausted);
  EXPECT_NEAR(r.final_coverage_fraction, 3.0 / 8.0, 1e-12);

  EXPECT_THROW(retrieval::greedy_retrieve(MemoryBank{}, chunk, k, {}), Error);
  cfg.budget = 0;
  EXPECT_THROW(retrieval::greedy_retrieve(many, chunk, k, cfg), Error);
}

TEST(Retrieval, GreedyMatchesExhaustiveOracle) {
  for (std::uint64_t seed = 0; seed < 60; ++seed) {
    const awtest::RandomBankCase c = awtest::random_bank_case(seed);
    const RetrievalResult r = retrieval::greedy_retrieve(c.bank, c.chunk, c.k, c.cfg);
    EXPECT_EQ(awtest::check_greedy(c, r), "") << "seed " << seed;
  }
}

TEST(Retrieval, LargerBudgetNeverLowersCoverage) {
  for (std::uint64_t seed = 200; seed < 230; ++seed) {
    awtest::RandomBankCase c = awtest::random_bank_case(seed);
    double prev = -1.0;
    for (int budget = 1; budget <= 8; ++budget) {
      c.cfg.budget = budget;
      const RetrievalResult r = retrieval::greedy_retrieve(c.bank, c.chunk, c.k, c.cfg);
      EXPECT_LE(r.selected.size(), static_cast<std::size_t>(budget));
      EXPECT_GE(r.final_coverage_fraction, prev);
      prev = r.final_coverage_fraction;
    }
  }
}

TEST(Retrieval, ChunksAreIndependent) {
  const awtest::RandomBankCase c = awtest::random_bank_case(7);
  std::vector<ChunkPlan> chunks{c.chunk, chunk_of({geometry::rotate_y(0.5)}), c.chunk};
  chunks[1].index = 1;
  const auto all = retrieval::retrieve_all_chunks(c.bank, chunks, c.k, c.cfg);
  ASSERT_EQ(all.size(), 3u);
  const auto alone = retrieval::greedy_retrieve(c.bank, chunks[1], c.k, c.cfg);
  EXPECT_EQ(all[1].selected, alone.selected);
  EXPECT_EQ(all[1].covered, alone.covered);
  EXPECT_EQ(all[0].selected, all[2].selected);
}
