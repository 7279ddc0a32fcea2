#include "anchorweave/memory_bank.hpp"

#include <cmath>

#include "anchorweave/error.hpp"

namespace anchorweave {

void LocalPointCloud::push_back(const Vec3& p, Rgb8 c) {
  x.push_back(p.x());
  y.push_back(p.y());
  z.push_back(p.z());
  colors.push_back(c);
}

void LocalPointCloud::append(const LocalPointCloud& other) {
  x.insert(x.end(), other.x.begin(), other.x.end());
  y.insert(y.end(), other.y.begin(), other.y.end());
  z.insert(z.end(), other.z.begin(), other.z.end());
  colors.insert(colors.end(), other.colors.begin(), other.colors.end());
}

const char* to_string(MemorySource s) noexcept {
  return s == MemorySource::observed ? "observed" : "generated";
}

MemorySource memory_source_from_string(const std::string& s) {
  if (s == "observed") return MemorySource::observed;
  if (s == "generated") return MemorySource::generated;
  throw Error(ErrorCode::parse, "unknown memory source '" + s + "'");
}

std::int64_t MemoryBank::add(std::int64_t frame_index, LocalPointCloud cloud, MemorySource source) {
  if (!entries_.empty() && frame_index < entries_.back()->frame_index) {
    throw Error(ErrorCode::ordering, "frame_index " + std::to_string(frame_index) + " precedes last stored " +
                                         std::to_string(entries_.back()->frame_index));
  }
  auto entry = std::make_shared<MemoryEntry>();
  entry->id = next_id_++;
  entry->frame_index = frame_index;
  entry->cloud = std::move(cloud);
  entry->source = source;
  entries_.push_back(std::move(entry));
  if (max_entries_ > 0 && entries_.size() > max_entries_) {
    entries_.erase(entries_.begin(), entries_.begin() + static_cast<std::ptrdiff_t>(entries_.size() - max_entries_));
  }
  return entries_.back()->id;
}

void MemoryBank::restore(MemoryEntry entry) {
  if (!entries_.empty() &&
      (entry.id <= entries_.back()->id || entry.frame_index < entries_.back()->frame_index)) {
    throw Error(ErrorCode::ordering, "restored entries must have increasing id and frame_index");
  }
  next_id_ = entry.id + 1;
  entries_.push_back(std::make_shared<MemoryEntry>(std::move(entry)));
}

const MemoryEntry& MemoryBank::latest() const {
  if (entries_.empty()) throw Error(ErrorCode::not_found, "memory bank is empty");
  return *entries_.back();
}

const MemoryEntry* MemoryBank::find(std::int64_t id) const {
  // Ids increase with position, so binary search applies.
  auto it = std::lower_bound(entries_.begin(), entries_.end(), id,
                             [](const MemoryEntryPtr& e, std::int64_t v) { return e->id < v; });
  return (it != entries_.end() && (*it)->id == id) ? it->get() : nullptr;
}

const MemoryEntry& MemoryBank::at(std::int64_t id) const {
  const MemoryEntry* e = find(id);
  if (!e) throw Error(ErrorCode::integrity, "unknown memory id " + std::to_string(id));
  return *e;
}

namespace memory {

LocalPointCloud build_cloud(const Frame& frame, int stride) {
  if (stride < 1) throw Error(ErrorCode::validation, "stride must be >= 1");
  if (!frame.rgb.same_shape(frame.depth) || !frame.rgb.same_shape(frame.intrinsics.width, frame.intrinsics.height)) {
    throw Error(ErrorCode::format, "rgb, depth and intrinsics dimensions disagree");
  }
  LocalPointCloud cloud;
  cloud.capture_pose = frame.pose;
  cloud.capture_intrinsics = frame.intrinsics;
  const std::size_t lattice = static_cast<std::size_t>((frame.rgb.width() + stride - 1) / stride) *
                              static_cast<std::size_t>((frame.rgb.height() + stride - 1) / stride);
  cloud.x.reserve(lattice);
  cloud.y.reserve(lattice);
  cloud.z.reserve(lattice);
  cloud.colors.reserve(lattice);
  for (int v = 0; v < frame.rgb.height(); v += stride) {
    for (int u = 0; u < frame.rgb.width(); u += stride) {
      const double d = frame.depth(u, v);
      if (!std::isfinite(d) || d <= 0.0) continue;
      cloud.push_back(geometry::unproject({static_cast<double>(u), static_cast<double>(v), d}, frame.pose,
                                          frame.intrinsics),
                      frame.rgb(u, v));
    }
  }
  return cloud;
}

std::int64_t add_memory(MemoryBank& bank, std::int64_t frame_index, LocalPointCloud cloud, MemorySource source) {
  return bank.add(frame_index, std::move(cloud), source);
}

std::vector<std::int64_t> update_from_segment(MemoryBank& bank, std::span<const VideoFrame> frames,
                                              const GeometryEstimator& estimator, int stride,
                                              MemorySource source) {
  // Clouds are built first so a failing frame leaves the bank untouched.
  std::vector<LocalPointCloud> clouds;
  clouds.reserve(frames.size());
  for (const VideoFrame& f : frames) {
    EstimatedGeometry geo;
    try {
      geo = estimator.estimate(f.rgb, f.pose, f.intrinsics, f.index);
    } catch (const Error& e) {
      throw Error(e.code(), "frame " + std::to_string(f.index) + ": " + e.what());
    } catch (const std::exception& e) {
      throw Error(ErrorCode::domain, "frame " + std::to_string(f.index) + ": " + e.what());
    }
    Frame frame{f.rgb, std::move(geo.depth), geo.pose, f.intrinsics};
    clouds.push_back(build_cloud(frame, stride));
  }
  if (!frames.empty() && !bank.empty() && frames.front().index < bank.entries().back()->frame_index) {
    throw Error(ErrorCode::ordering, "segment frames precede stored memories");
  }
  std::vector<std::int64_t> ids;
  ids.reserve(frames.size());
  for (std::size_t i = 0; i < frames.size(); ++i) ids.push_back(bank.add(frames[i].index, std::move(clouds[i]), source));
  return ids;
}

}  // namespace memory
}  // namespace anchorweave
