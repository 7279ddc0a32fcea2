#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "anchorweave/geometry.hpp"
#include "anchorweave/raster.hpp"
#include "anchorweave/scene.hpp"

namespace anchorweave {

/// Points of one frame in world coordinates, stored structure-of-arrays.
/// Colours are 8-bit per channel (value / 255 in [0, 1]).
struct LocalPointCloud {
  std::vector<double> x, y, z;
  std::vector<Rgb8> colors;
  Pose capture_pose;
  Intrinsics capture_intrinsics;

  std::size_t size() const noexcept { return x.size(); }
  bool empty() const noexcept { return x.empty(); }
  Vec3 point(std::size_t i) const { return {x[i], y[i], z[i]}; }
  void push_back(const Vec3& p, Rgb8 c);
  void append(const LocalPointCloud& other);
};

enum class MemorySource { observed, generated };

const char* to_string(MemorySource s) noexcept;
MemorySource memory_source_from_string(const std::string& s);

struct MemoryEntry {
  std::int64_t id = 0;
  std::int64_t frame_index = 0;
  LocalPointCloud cloud;
  MemorySource source = MemorySource::observed;
};

using MemoryEntryPtr = std::shared_ptr<const MemoryEntry>;

/// A video frame handed to the memory update: colour plus the commanded pose.
struct VideoFrame {
  std::int64_t index = 0;
  RgbImage rgb;
  Pose pose;
  Intrinsics intrinsics;
};

/// Ordered collection of per-frame local memories. Entries are immutable once
/// inserted and shared between copies of the bank, so copying a bank is cheap.
class MemoryBank {
 public:
  MemoryBank() = default;
  /// `max_entries` of 0 disables eviction; otherwise the oldest entries are
  /// dropped once the cap is exceeded.
  explicit MemoryBank(std::size_t max_entries) : max_entries_(max_entries) {}

  std::int64_t add(std::int64_t frame_index, LocalPointCloud cloud, MemorySource source = MemorySource::observed);
  /// Re-inserts a persisted entry, keeping its id.
  void restore(MemoryEntry entry);

  std::size_t size() const noexcept { return entries_.size(); }
  bool empty() const noexcept { return entries_.empty(); }
  const std::vector<MemoryEntryPtr>& entries() const noexcept { return entries_; }
  const MemoryEntry& latest() const;
  const MemoryEntry* find(std::int64_t id) const;
  const MemoryEntry& at(std::int64_t id) const;
  std::int64_t next_id() const noexcept { return next_id_; }
  std::size_t max_entries() const noexcept { return max_entries_; }

  /// The world frame is the camera of the first inserted frame.
  static Pose world_frame() { return Pose::identity(); }

 private:
  std::vector<MemoryEntryPtr> entries_;
  std::int64_t next_id_ = 0;
  std::size_t max_entries_ = 0;
};

namespace memory {

/// Unprojects every `stride`-th pixel (both axes, starting at 0) with finite
/// depth into world coordinates.
LocalPointCloud build_cloud(const Frame& frame, int stride);

std::int64_t add_memory(MemoryBank& bank, std::int64_t frame_index, LocalPointCloud cloud,
                        MemorySource source = MemorySource::observed);

/// Estimates geometry for each frame and appends one entry per frame.
std::vector<std::int64_t> update_from_segment(MemoryBank& bank, std::span<const VideoFrame> frames,
                                              const GeometryEstimator& estimator, int stride,
                                              MemorySource source = MemorySource::generated);

}  // namespace memory
}  // namespace anchorweave
