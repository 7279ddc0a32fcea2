#pragma once

#include <cstdint>
#include <vector>

#include "anchorweave/geometry.hpp"

namespace anchorweave {

/// A run of at most D consecutive target poses; retrieval operates per chunk.
/// `frame_begin`/`frame_end` are offsets into the planned trajectory.
struct ChunkPlan {
  std::int64_t index = 0;
  std::vector<Pose> poses;
  std::int64_t frame_begin = 0;
  std::int64_t frame_end = 0;

  std::size_t size() const noexcept { return poses.size(); }
};

}  // namespace anchorweave
