#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "anchorweave/actions.hpp"
#include "anchorweave/anchor_assembly.hpp"
#include "anchorweave/memory_bank.hpp"
#include "anchorweave/retrieval.hpp"
#include "anchorweave/scene.hpp"
#include "anchorweave/weaving_fusion.hpp"

namespace anchorweave {

struct LoopConfig {
  int chunk_length = 8;       // D
  int budget = 4;             // K
  int segment_length = 48;
  StepSizes steps;
  int cloud_stride = 1;       // pixel stride when lifting frames to clouds
  double splat_radius = 1.0;
  double tau = 0.01;
  int coverage_scale = 4;
  FusionConfig fusion;
  Intrinsics intrinsics;
  int context_frames = 16;
  std::size_t max_memories = 0;  // 0 keeps every memory

  void validate() const;
  RetrievalConfig retrieval() const;
};

/// Output of the generator for one trajectory step.
struct GeneratedFrame {
  std::int64_t index = 0;
  Pose pose;
  CompositeFrame composite;
};

struct SegmentTrace {
  std::int64_t first_frame = 0;
  std::int64_t frame_count = 0;
  std::int64_t first_chunk = 0;  // session-wide index of this segment's first chunk
  std::vector<RetrievalResult> retrievals;
  std::vector<ChunkPlan> chunks;
  /// Per chunk, the memory id (or nullopt for PAD) in each slot.
  std::vector<std::vector<std::optional<std::int64_t>>> slot_sources;
};

struct SessionState {
  LoopConfig config;
  MemoryBank bank;
  Pose current_pose;
  std::int64_t context_count = 0;
  std::int64_t next_frame_index = 0;
  std::vector<GeneratedFrame> generated;
  std::vector<SegmentTrace> trace;

  std::size_t chunk_count() const;
};

/// Stand-in for the video backbone: turns an anchor bundle into frames.
class FrameGenerator {
 public:
  virtual ~FrameGenerator() = default;
  virtual CompositeFrame generate(const AnchorBundle& bundle, std::size_t t) const = 0;
};

/// Pose-weighted masked fusion of the bundle's slots.
class CompositeGenerator final : public FrameGenerator {
 public:
  explicit CompositeGenerator(FusionConfig cfg) : cfg_(cfg) {}
  CompositeFrame generate(const AnchorBundle& bundle, std::size_t t) const override;

 private:
  FusionConfig cfg_;
};

namespace loop {

/// Deterministic context trajectory: a yaw sweep starting at the world origin.
std::vector<Pose> default_context_trajectory(int frames);

/// Renders ground-truth context frames (indices 0..n-1) for a scene.
std::vector<VideoFrame> render_context(const SceneSpec& scene, std::span<const Pose> poses, const Intrinsics& k);

/// Builds a session from context frames: one memory per frame, current pose
/// set to the last context pose.
SessionState start_session(const LoopConfig& cfg, std::span<const VideoFrame> context,
                           const GeometryEstimator& estimator);

/// Builds a session around an existing bank; the current pose is the latest
/// memory's capture pose.
SessionState resume_session(const LoopConfig& cfg, MemoryBank bank);

/// One update-retrieve-generate cycle over `target`. The input state is left
/// untouched; the returned state carries the new frames and memories.
SessionState run_segment(const SessionState& state, std::span<const Pose> target, const GeometryEstimator& estimator,
                         const FrameGenerator* generator = nullptr);

/// Splits `trajectory` into segments of at most segment_length and runs them.
SessionState run_trajectory(const SessionState& state, std::span<const Pose> trajectory,
                            const GeometryEstimator& estimator, const FrameGenerator* generator = nullptr);

/// Runs every batch of the script in order from the session's current pose.
SessionState run_script(const SessionState& state, const ActionScript& script, const GeometryEstimator& estimator);

SessionState run_loop(std::span<const VideoFrame> context, const ActionScript& script, const LoopConfig& cfg,
                      const GeometryEstimator& estimator);

/// Re-renders the anchor frames used for a generated frame, slot by slot.
AnchorFrame render_slot(const SessionState& state, std::int64_t frame_index, int slot);

struct RevisitSplit {
  std::vector<std::size_t> target;   // 49 indices
  std::vector<std::size_t> context;  // 21 indices
};

RevisitSplit partial_revisit_split(std::size_t video_length);

}  // namespace loop
}  // namespace anchorweave
