#include "anchorweave/evaluation.hpp"

#include <cmath>

#include "anchorweave/error.hpp"
#include "anchorweave/metrics.hpp"

namespace anchorweave::eval {

std::vector<Pose> revisit_video_trajectory(std::uint64_t seed) {
  const double phase = 0.7 * static_cast<double>(seed % 9);
  std::vector<Pose> out;
  out.reserve(70);
  for (int i = 0; i < 70; ++i) {
    const double s = i / 69.0;
    const double yaw = 30.0 * M_PI / 180.0 * std::sin(2.0 * M_PI * s + phase);
    const double x = 0.5 * std::sin(M_PI * s);
    const double z = 0.8 * s;
    out.push_back(geometry::compose(geometry::translate(x, 0.0, z), geometry::rotate_y(yaw)));
  }
  return out;
}

RevisitCase make_revisit_case(std::uint64_t seed, const Intrinsics& k) {
  RevisitCase c;
  c.scene = scene::make_scene(seed);
  c.poses = revisit_video_trajectory(seed);
  for (const Pose& p : c.poses) c.truth.push_back(scene::render_ground_truth(c.scene, p, k).rgb);
  c.split = loop::partial_revisit_split(c.poses.size());
  return c;
}

std::vector<CompositeFrame> generate_targets(const RevisitCase& c, const LoopConfig& cfg, const NoiseConfig& noise,
                                             MemoryMode mode) {
  LoopConfig run = cfg;
  run.segment_length = static_cast<int>(c.split.target.size());
  const GroundTruthEstimator estimator(std::make_shared<const SceneSpec>(c.scene), noise);

  std::vector<VideoFrame> context;
  for (std::size_t idx : c.split.context) {
    context.push_back({static_cast<std::int64_t>(idx), c.truth[idx], c.poses[idx], cfg.intrinsics});
  }
  std::vector<Pose> target;
  for (std::size_t idx : c.split.target) target.push_back(c.poses[idx]);

  const SessionState state = loop::start_session(run, context, estimator);
  if (mode == MemoryMode::local) {
    const SessionState done = loop::run_segment(state, target, estimator);
    std::vector<CompositeFrame> out;
    for (const GeneratedFrame& g : done.generated) out.push_back(g.composite);
    return out;
  }

  LocalPointCloud global;
  for (const MemoryEntryPtr& e : state.bank.entries()) global.append(e->cloud);
  const double weight = 1.0;
  std::vector<CompositeFrame> out;
  for (const Pose& p : target) {
    const AnchorFrame a = render::render_anchor_frame(global, p, cfg.intrinsics, cfg.splat_radius);
    const AnchorFrame* frames[] = {&a};
    out.push_back(fusion::fuse(frames, std::span<const double>(&weight, 1), cfg.fusion.fill));
  }
  return out;
}

RevisitScore score(const RevisitCase& c, const std::vector<CompositeFrame>& composites,
                   const std::vector<const std::vector<CompositeFrame>*>& extra_holes, bool with_ssim) {
  if (composites.size() != c.split.target.size()) throw Error(ErrorCode::shape, "composite count mismatch");
  for (const auto* other : extra_holes) {
    if (other->size() != composites.size()) throw Error(ErrorCode::shape, "composite count mismatch");
  }
  RevisitScore s;
  for (std::size_t t = 0; t < composites.size(); ++t) {
    Mask keep = metrics::invert_mask(composites[t].hole_mask);
    s.hole_fraction += static_cast<double>(count_set(composites[t].hole_mask)) /
                       static_cast<double>(keep.pixels().size());
    for (const auto* other : extra_holes) {
      const Mask& h = (*other)[t].hole_mask;
      for (std::size_t i = 0; i < keep.pixels().size(); ++i) keep[i] = keep[i] && !h[i];
    }
    if (count_set(keep) == 0) continue;
    const RgbImage& truth = c.truth[c.split.target[t]];
    s.psnr += metrics::psnr(composites[t].rgb, truth, keep);
    if (with_ssim) s.ssim += metrics::ssim(composites[t].rgb, truth, keep);
    ++s.frames_scored;
  }
  s.hole_fraction /= static_cast<double>(composites.size());
  if (s.frames_scored > 0) {
    s.psnr /= static_cast<double>(s.frames_scored);
    s.ssim /= static_cast<double>(s.frames_scored);
  }
  return s;
}

std::vector<TrendRow> budget_trend(const std::vector<int>& budgets, int scenes, const LoopConfig& base,
                                   bool with_ssim) {
  std::vector<TrendRow> rows;
  for (int b : budgets) rows.push_back({b, 0.0, 0.0, 0.0, {}});
  for (int seed = 0; seed < scenes; ++seed) {
    const RevisitCase c = make_revisit_case(static_cast<std::uint64_t>(seed), base.intrinsics);
    for (TrendRow& row : rows) {
      LoopConfig cfg = base;
      cfg.budget = row.budget;
      const RevisitScore s = score(c, generate_targets(c, cfg, {}, MemoryMode::local), {}, with_ssim);
      row.per_scene_psnr.push_back(s.psnr);
      row.mean_psnr += s.psnr / scenes;
      row.mean_ssim += s.ssim / scenes;
      row.mean_hole_fraction += s.hole_fraction / scenes;
    }
  }
  return rows;
}

NoiseConfig default_reconstruction_noise(std::uint64_t seed) {
  NoiseConfig n;
  n.depth_sigma = 0.02;
  n.rotation_sigma_deg = 0.5;
  n.translation_sigma = 0.02;
  n.seed = seed;
  return n;
}

std::vector<LocalGlobalRow> local_vs_global(int scenes, const LoopConfig& base) {
  std::vector<LocalGlobalRow> rows;
  for (int seed = 0; seed < scenes; ++seed) {
    const RevisitCase c = make_revisit_case(static_cast<std::uint64_t>(seed), base.intrinsics);
    const NoiseConfig noise = default_reconstruction_noise(static_cast<std::uint64_t>(seed) + 1000);
    const auto local = generate_targets(c, base, noise, MemoryMode::local);
    const auto global = generate_targets(c, base, noise, MemoryMode::global);
    LocalGlobalRow row;
    row.seed = static_cast<std::uint64_t>(seed);
    row.local_psnr = score(c, local, {&global}, false).psnr;
    row.global_psnr = score(c, global, {&local}, false).psnr;
    rows.push_back(row);
  }
  return rows;
}

}  // namespace anchorweave::eval
