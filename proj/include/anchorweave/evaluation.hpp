#pragma once

#include <cstdint>
#include <vector>

#include "anchorweave/loop_engine.hpp"

namespace anchorweave::eval {

/// 70-pose revisit video: a forward arc with a yaw sweep that returns over
/// already-seen ground. The seed shifts the sweep phase.
std::vector<Pose> revisit_video_trajectory(std::uint64_t seed);

struct RevisitCase {
  SceneSpec scene;
  std::vector<Pose> poses;         // all 70
  std::vector<RgbImage> truth;     // ground truth per pose
  loop::RevisitSplit split;
};

RevisitCase make_revisit_case(std::uint64_t seed, const Intrinsics& k);

enum class MemoryMode { local, global };

/// Generates the 49 target frames of `c` from its 21 context frames in one
/// segment. Global mode fuses every context cloud into one anchor.
std::vector<CompositeFrame> generate_targets(const RevisitCase& c, const LoopConfig& cfg, const NoiseConfig& noise,
                                             MemoryMode mode);

struct RevisitScore {
  double psnr = 0.0;   // mean over scored frames
  double ssim = 0.0;
  std::size_t frames_scored = 0;
  double hole_fraction = 0.0;  // mean over all target frames
};

/// Scores composites against ground truth over pixels that are not holes in
/// `composites` nor in any of `extra_holes` (same frame count).
RevisitScore score(const RevisitCase& c, const std::vector<CompositeFrame>& composites,
                   const std::vector<const std::vector<CompositeFrame>*>& extra_holes = {}, bool with_ssim = true);

struct TrendRow {
  int budget = 0;
  double mean_psnr = 0.0;
  double mean_ssim = 0.0;
  double mean_hole_fraction = 0.0;
  std::vector<double> per_scene_psnr;
};

/// Mean non-hole revisit PSNR per budget over seeds [0, scenes).
std::vector<TrendRow> budget_trend(const std::vector<int>& budgets, int scenes, const LoopConfig& base,
                                   bool with_ssim = false);

struct LocalGlobalRow {
  std::uint64_t seed = 0;
  double local_psnr = 0.0;
  double global_psnr = 0.0;
};

NoiseConfig default_reconstruction_noise(std::uint64_t seed);

/// Local K-anchor conditioning versus one globally fused cloud, each scored on
/// the pixels both modes cover.
std::vector<LocalGlobalRow> local_vs_global(int scenes, const LoopConfig& base);

}  // namespace anchorweave::eval
