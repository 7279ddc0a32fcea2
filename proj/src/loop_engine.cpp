#include "anchorweave/loop_engine.hpp"

#include <cmath>
#include <string>

#include "anchorweave/error.hpp"

namespace anchorweave {

void LoopConfig::validate() const {
  if (chunk_length < 1) throw Error(ErrorCode::validation, "chunk length D must be >= 1");
  if (budget < 1) throw Error(ErrorCode::validation, "retrieval budget K must be >= 1");
  if (segment_length < 1) throw Error(ErrorCode::validation, "segment length must be >= 1");
  if (!(steps.translation > 0.0) || !(steps.rotation_deg > 0.0)) {
    throw Error(ErrorCode::validation, "step sizes must be > 0");
  }
  if (cloud_stride < 1) throw Error(ErrorCode::validation, "cloud stride must be >= 1");
  if (context_frames < 1) throw Error(ErrorCode::validation, "context needs at least one frame");
  retrieval().validate();
  fusion.validate();
  geometry::validate(intrinsics);
}

RetrievalConfig LoopConfig::retrieval() const {
  RetrievalConfig r;
  r.budget = budget;
  r.tau = tau;
  r.coverage_scale = coverage_scale;
  r.splat_radius = splat_radius;
  return r;
}

std::size_t SessionState::chunk_count() const {
  std::size_t n = 0;
  for (const SegmentTrace& s : trace) n += s.chunks.size();
  return n;
}

CompositeFrame CompositeGenerator::generate(const AnchorBundle& bundle, std::size_t t) const {
  const std::vector<const AnchorFrame*> frames = bundle.frames_at(t);
  const std::vector<Pose> rel = bundle.rel_poses_at(t);
  return fusion::fuse_slots(frames, rel, cfg_);
}

namespace loop {

std::vector<Pose> default_context_trajectory(int frames) {
  if (frames < 1) throw Error(ErrorCode::validation, "context needs at least one frame");
  std::vector<Pose> out;
  out.reserve(static_cast<std::size_t>(frames));
  for (int i = 0; i < frames; ++i) {
    const double yaw = -25.0 * M_PI / 180.0 * std::sin(2.0 * M_PI * i / frames);
    out.push_back(geometry::compose(geometry::translate(0.0, 0.0, 0.04 * i), geometry::rotate_y(yaw)));
  }
  return out;
}

std::vector<VideoFrame> render_context(const SceneSpec& scene, std::span<const Pose> poses, const Intrinsics& k) {
  std::vector<VideoFrame> out;
  out.reserve(poses.size());
  for (std::size_t i = 0; i < poses.size(); ++i) {
    GroundTruthFrame f = scene::render_ground_truth(scene, poses[i], k);
    out.push_back({static_cast<std::int64_t>(i), std::move(f.rgb), poses[i], k});
  }
  return out;
}

SessionState start_session(const LoopConfig& cfg, std::span<const VideoFrame> context,
                           const GeometryEstimator& estimator) {
  cfg.validate();
  if (context.empty()) throw Error(ErrorCode::validation, "context needs at least one frame");
  SessionState state;
  state.config = cfg;
  state.bank = MemoryBank(cfg.max_memories);
  for (const VideoFrame& f : context) {
    if (!(f.intrinsics == cfg.intrinsics)) throw Error(ErrorCode::validation, "context intrinsics differ from config");
    geometry::validate(f.pose);
  }
  memory::update_from_segment(state.bank, context, estimator, cfg.cloud_stride, MemorySource::observed);
  state.current_pose = context.back().pose;
  state.context_count = static_cast<std::int64_t>(context.size());
  state.next_frame_index = context.back().index + 1;
  return state;
}

SessionState resume_session(const LoopConfig& cfg, MemoryBank bank) {
  cfg.validate();
  if (bank.empty()) throw Error(ErrorCode::validation, "context bank is empty");
  SessionState state;
  state.config = cfg;
  const MemoryEntry& latest = bank.latest();
  state.current_pose = latest.cloud.capture_pose;
  state.context_count = static_cast<std::int64_t>(bank.size());
  state.next_frame_index = latest.frame_index + 1;
  state.bank = std::move(bank);
  return state;
}

SessionState run_segment(const SessionState& state, std::span<const Pose> target, const GeometryEstimator& estimator,
                         const FrameGenerator* generator) {
  const LoopConfig& cfg = state.config;
  if (state.bank.empty()) throw Error(ErrorCode::validation, "memory bank is empty; seed it with context first");
  if (target.empty()) throw Error(ErrorCode::validation, "segment has no target poses");
  if (target.size() > static_cast<std::size_t>(cfg.segment_length)) {
    throw Error(ErrorCode::validation, "segment longer than segment_length");
  }
  for (const Pose& p : target) geometry::validate(p);

  const std::vector<ChunkPlan> chunks = assembly::plan_chunks(target, cfg.chunk_length);
  std::vector<RetrievalResult> retrievals =
      retrieval::retrieve_all_chunks(state.bank, chunks, cfg.intrinsics, cfg.retrieval());
  const AnchorBundle bundle =
      assembly::assemble(state.bank, chunks, retrievals, cfg.budget, cfg.intrinsics, cfg.splat_radius);

  const CompositeGenerator fallback(cfg.fusion);
  const FrameGenerator& gen = generator != nullptr ? *generator : fallback;

  SessionState next = state;
  std::vector<VideoFrame> frames;
  frames.reserve(target.size());
  std::vector<GeneratedFrame> produced;
  produced.reserve(target.size());
  for (std::size_t t = 0; t < target.size(); ++t) {
    GeneratedFrame g;
    g.index = state.next_frame_index + static_cast<std::int64_t>(t);
    g.pose = target[t];
    g.composite = gen.generate(bundle, t);
    frames.push_back({g.index, g.composite.rgb, g.pose, cfg.intrinsics});
    produced.push_back(std::move(g));
  }
  memory::update_from_segment(next.bank, frames, estimator, cfg.cloud_stride, MemorySource::generated);

  SegmentTrace trace;
  trace.first_frame = state.next_frame_index;
  trace.frame_count = static_cast<std::int64_t>(target.size());
  trace.first_chunk = static_cast<std::int64_t>(state.chunk_count());
  trace.chunks = chunks;
  for (const ChunkPlan& c : chunks) {
    std::vector<std::optional<std::int64_t>> sources;
    for (const AnchorVideo& v : bundle.videos) sources.push_back(v.per_chunk_sources[static_cast<std::size_t>(c.index)]);
    trace.slot_sources.push_back(std::move(sources));
  }
  trace.retrievals = std::move(retrievals);

  for (GeneratedFrame& g : produced) next.generated.push_back(std::move(g));
  next.trace.push_back(std::move(trace));
  next.current_pose = target.back();
  next.next_frame_index = state.next_frame_index + static_cast<std::int64_t>(target.size());
  return next;
}

SessionState run_trajectory(const SessionState& state, std::span<const Pose> trajectory,
                            const GeometryEstimator& estimator, const FrameGenerator* generator) {
  SessionState current = state;
  const std::size_t seg = static_cast<std::size_t>(state.config.segment_length);
  for (std::size_t begin = 0; begin < trajectory.size(); begin += seg) {
    const std::size_t n = std::min(seg, trajectory.size() - begin);
    current = run_segment(current, trajectory.subspan(begin, n), estimator, generator);
  }
  return current;
}

SessionState run_script(const SessionState& state, const ActionScript& script, const GeometryEstimator& estimator) {
  SessionState current = state;
  for (const ActionBatch& batch : script) {
    if (batch.empty()) continue;
    const std::vector<Pose> traj = actions::actions_to_trajectory(current.current_pose, batch, current.config.steps);
    current = run_trajectory(current, traj, estimator);
  }
  return current;
}

SessionState run_loop(std::span<const VideoFrame> context, const ActionScript& script, const LoopConfig& cfg,
                      const GeometryEstimator& estimator) {
  return run_script(start_session(cfg, context, estimator), script, estimator);
}

AnchorFrame render_slot(const SessionState& state, std::int64_t frame_index, int slot) {
  if (slot < 0 || slot >= state.config.budget) {
    throw Error(ErrorCode::not_found, "slot " + std::to_string(slot) + " out of range");
  }
  for (const SegmentTrace& seg : state.trace) {
    if (frame_index < seg.first_frame || frame_index >= seg.first_frame + seg.frame_count) continue;
    const std::int64_t offset = frame_index - seg.first_frame;
    for (std::size_t m = 0; m < seg.chunks.size(); ++m) {
      const ChunkPlan& c = seg.chunks[m];
      if (offset < c.frame_begin || offset >= c.frame_end) continue;
      const Pose& target = c.poses[static_cast<std::size_t>(offset - c.frame_begin)];
      const auto& source = seg.slot_sources[m][static_cast<std::size_t>(slot)];
      if (!source) return AnchorFrame::invisible(state.config.intrinsics.width, state.config.intrinsics.height);
      const MemoryEntry* entry = state.bank.find(*source);
      if (entry == nullptr) throw Error(ErrorCode::not_found, "memory " + std::to_string(*source) + " was evicted");
      return render::render_anchor_frame(entry->cloud, target, state.config.intrinsics, state.config.splat_radius);
    }
  }
  throw Error(ErrorCode::not_found, "no generated frame " + std::to_string(frame_index));
}

RevisitSplit partial_revisit_split(std::size_t video_length) {
  constexpr std::size_t kVideo = 70;
  constexpr std::size_t kTarget = 49;
  if (video_length != kVideo) {
    throw Error(ErrorCode::protocol,
                "partial revisit needs exactly 70 frames, got " + std::to_string(video_length));
  }
  RevisitSplit split;
  std::vector<bool> is_target(kVideo, false);
  for (std::size_t i = 0; i < kTarget; ++i) {
    // round(i * 69 / 48) in integer arithmetic, halves rounded up.
    const std::size_t idx = (2 * i * (kVideo - 1) + (kTarget - 1)) / (2 * (kTarget - 1));
    split.target.push_back(idx);
    is_target[idx] = true;
  }
  for (std::size_t i = 0; i < kVideo; ++i) {
    if (!is_target[i]) split.context.push_back(i);
  }
  return split;
}

}  // namespace loop
}  // namespace anchorweave
