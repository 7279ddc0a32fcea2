#include "anchorweave/anchor_assembly.hpp"

#include <string>

#include "anchorweave/error.hpp"

namespace anchorweave {

std::vector<const AnchorFrame*> AnchorBundle::frames_at(std::size_t t) const {
  std::vector<const AnchorFrame*> out;
  out.reserve(videos.size());
  for (const AnchorVideo& v : videos) out.push_back(&v.frames.at(t));
  return out;
}

std::vector<Pose> AnchorBundle::rel_poses_at(std::size_t t) const {
  std::vector<Pose> out;
  out.reserve(videos.size());
  for (const AnchorVideo& v : videos) out.push_back(v.rel_poses.at(t));
  return out;
}

namespace assembly {

std::vector<ChunkPlan> plan_chunks(std::span<const Pose> trajectory, int chunk_length) {
  if (chunk_length < 1) throw Error(ErrorCode::validation, "chunk length D must be >= 1");
  if (trajectory.empty()) throw Error(ErrorCode::validation, "cannot chunk an empty trajectory");
  const std::size_t d = static_cast<std::size_t>(chunk_length);
  std::vector<ChunkPlan> chunks;
  chunks.reserve((trajectory.size() + d - 1) / d);
  for (std::size_t begin = 0; begin < trajectory.size(); begin += d) {
    const std::size_t end = std::min(begin + d, trajectory.size());
    ChunkPlan c;
    c.index = static_cast<std::int64_t>(chunks.size());
    c.poses.assign(trajectory.begin() + static_cast<std::ptrdiff_t>(begin),
                   trajectory.begin() + static_cast<std::ptrdiff_t>(end));
    c.frame_begin = static_cast<std::int64_t>(begin);
    c.frame_end = static_cast<std::int64_t>(end);
    chunks.push_back(std::move(c));
  }
  return chunks;
}

AnchorBundle assemble(const MemoryBank& bank, std::span<const ChunkPlan> chunks,
                      std::span<const RetrievalResult> retrievals, int budget, const Intrinsics& k,
                      double splat_radius) {
  if (budget < 1) throw Error(ErrorCode::validation, "retrieval budget K must be >= 1");
  if (chunks.size() != retrievals.size()) {
    throw Error(ErrorCode::shape, "got " + std::to_string(retrievals.size()) + " retrieval results for " +
                                      std::to_string(chunks.size()) + " chunks");
  }
  AnchorBundle bundle;
  bundle.chunk_plans.assign(chunks.begin(), chunks.end());
  bundle.videos.resize(static_cast<std::size_t>(budget));
  for (int j = 0; j < budget; ++j) bundle.videos[static_cast<std::size_t>(j)].slot = j;

  for (std::size_t m = 0; m < chunks.size(); ++m) {
    const ChunkPlan& chunk = chunks[m];
    const RetrievalResult& r = retrievals[m];
    if (r.selected.size() > static_cast<std::size_t>(budget)) {
      throw Error(ErrorCode::shape, "chunk " + std::to_string(m) + " retrieved more than K memories");
    }
    bundle.target_poses.insert(bundle.target_poses.end(), chunk.poses.begin(), chunk.poses.end());
    for (std::size_t j = 0; j < bundle.videos.size(); ++j) {
      AnchorClip clip;
      if (j < r.selected.size()) {
        const MemoryEntry* entry = bank.find(r.selected[j]);
        if (entry == nullptr) {
          throw Error(ErrorCode::integrity,
                      "chunk " + std::to_string(m) + " references unknown memory " + std::to_string(r.selected[j]));
        }
        clip = render::render_anchor_clip(entry->cloud, chunk, k, splat_radius, entry->id);
      } else {
        clip = render::invisible_clip(chunk.size(), k);
      }
      AnchorVideo& video = bundle.videos[j];
      video.per_chunk_sources.push_back(clip.source_memory_id);
      for (auto& f : clip.frames) video.frames.push_back(std::move(f));
      video.rel_poses.insert(video.rel_poses.end(), clip.rel_poses.begin(), clip.rel_poses.end());
    }
  }
  return bundle;
}

std::vector<Pose> relative_trajectory(std::span<const Pose> trajectory) {
  if (trajectory.empty()) throw Error(ErrorCode::validation, "empty trajectory");
  const Pose origin_inv = geometry::invert(trajectory.front());
  std::vector<Pose> out;
  out.reserve(trajectory.size());
  out.push_back(Pose::identity());
  for (std::size_t t = 1; t < trajectory.size(); ++t) out.push_back(geometry::compose(origin_inv, trajectory[t]));
  return out;
}

}  // namespace assembly
}  // namespace anchorweave
