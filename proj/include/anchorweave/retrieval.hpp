#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "anchorweave/chunk_plan.hpp"
#include "anchorweave/geometry.hpp"
#include "anchorweave/memory_bank.hpp"

namespace anchorweave {

/// Per-frame boolean coverage rasters for one chunk, packed 64 cells per word.
/// Counts are summed over the chunk's frames.
class CoverageMap {
 public:
  CoverageMap() = default;
  CoverageMap(std::size_t frames, int cell_width, int cell_height);

  std::size_t frames() const noexcept { return frames_; }
  int cell_width() const noexcept { return cell_width_; }
  int cell_height() const noexcept { return cell_height_; }
  std::size_t cells_per_frame() const noexcept {
    return static_cast<std::size_t>(cell_width_) * static_cast<std::size_t>(cell_height_);
  }
  std::size_t words_per_frame() const noexcept { return words_per_frame_; }

  bool test(std::size_t frame, int x, int y) const;
  void set(std::size_t frame, int x, int y);

  std::uint64_t count() const;
  /// Cells set here but not in `covered`.
  std::uint64_t count_new(const CoverageMap& covered) const;
  CoverageMap& operator|=(const CoverageMap& other);
  bool operator==(const CoverageMap&) const = default;

  std::span<const std::uint64_t> words() const noexcept { return bits_; }

 private:
  std::size_t bit_index(std::size_t frame, int x, int y) const;

  std::size_t frames_ = 0;
  int cell_width_ = 0;
  int cell_height_ = 0;
  std::size_t words_per_frame_ = 0;
  std::vector<std::uint64_t> bits_;
};

enum class Termination { full_coverage, budget_exhausted, pool_exhausted };

const char* to_string(Termination t) noexcept;

struct RetrievalConfig {
  int budget = 4;              // K: anchors per chunk, seed included
  double tau = 0.01;           // minimum in-frustum fraction for a candidate
  int coverage_scale = 4;      // coverage grid is this many times coarser than the image
  double splat_radius = 1.0;   // pixels at image resolution
  std::size_t fov_sample = 512;

  void validate() const;
};

struct RetrievalResult {
  std::int64_t chunk_index = 0;
  std::vector<std::int64_t> selected;  // selected[0] is the latest-memory seed
  std::vector<std::uint64_t> gains;    // newly covered cells per selection step
  Termination termination = Termination::pool_exhausted;
  double final_coverage_fraction = 0.0;
  std::uint64_t covered_count = 0;
  std::uint64_t universe_count = 0;
  std::vector<std::int64_t> candidates;  // FoV survivors, ascending id
  CoverageMap covered;                   // union coverage of `selected`
};

namespace retrieval {

/// Memories whose subsampled points fall in-frustum for at least one chunk
/// pose with fraction >= tau (and at least one point in-frustum).
std::vector<std::int64_t> fov_candidates(const MemoryBank& bank, const ChunkPlan& chunk, const Intrinsics& k,
                                         double tau, std::size_t sample_size = 512);

CoverageMap coverage_of(const LocalPointCloud& cloud, const ChunkPlan& chunk, const Intrinsics& k,
                        double splat_radius, int coverage_scale = 4);

RetrievalResult greedy_retrieve(const MemoryBank& bank, const ChunkPlan& chunk, const Intrinsics& k,
                                const RetrievalConfig& cfg);

std::vector<RetrievalResult> retrieve_all_chunks(const MemoryBank& bank, std::span<const ChunkPlan> chunks,
                                                 const Intrinsics& k, const RetrievalConfig& cfg);

}  // namespace retrieval
}  // namespace anchorweave
