#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "anchorweave/anchor_renderer.hpp"
#include "anchorweave/chunk_plan.hpp"
#include "anchorweave/retrieval.hpp"

namespace anchorweave {

/// One anchor slot concatenated across all chunks of a trajectory.
struct AnchorVideo {
  int slot = 0;
  std::vector<AnchorFrame> frames;
  std::vector<Pose> rel_poses;
  std::vector<std::optional<std::int64_t>> per_chunk_sources;  // nullopt = PAD
};

struct AnchorBundle {
  std::vector<AnchorVideo> videos;  // exactly K
  std::vector<Pose> target_poses;
  std::vector<ChunkPlan> chunk_plans;

  std::size_t length() const noexcept { return target_poses.size(); }
  /// Slot frames for trajectory step t.
  std::vector<const AnchorFrame*> frames_at(std::size_t t) const;
  std::vector<Pose> rel_poses_at(std::size_t t) const;
};

namespace assembly {

std::vector<ChunkPlan> plan_chunks(std::span<const Pose> trajectory, int chunk_length);

/// Slot j of chunk m renders retrievals[m].selected[j]; missing slots are
/// padded with invisible clips.
AnchorBundle assemble(const MemoryBank& bank, std::span<const ChunkPlan> chunks,
                      std::span<const RetrievalResult> retrievals, int budget, const Intrinsics& k,
                      double splat_radius);

/// Each pose expressed relative to the first: invert(traj[0]) o traj[t].
std::vector<Pose> relative_trajectory(std::span<const Pose> trajectory);

}  // namespace assembly
}  // namespace anchorweave
