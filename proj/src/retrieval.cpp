#include "anchorweave/retrieval.hpp"

#include <algorithm>
#include <bit>

#include "anchorweave/anchor_renderer.hpp"
#include "anchorweave/error.hpp"
#include "anchorweave/kernels.hpp"

namespace anchorweave {

CoverageMap::CoverageMap(std::size_t frames, int cell_width, int cell_height)
    : frames_(frames), cell_width_(cell_width), cell_height_(cell_height),
      words_per_frame_((cells_per_frame() + 63) / 64), bits_(frames * words_per_frame_, 0) {}

std::size_t CoverageMap::bit_index(std::size_t frame, int x, int y) const {
  return frame * words_per_frame_ * 64 + static_cast<std::size_t>(y) * static_cast<std::size_t>(cell_width_) +
         static_cast<std::size_t>(x);
}

bool CoverageMap::test(std::size_t frame, int x, int y) const {
  const std::size_t b = bit_index(frame, x, y);
  return (bits_[b / 64] >> (b % 64)) & 1u;
}

void CoverageMap::set(std::size_t frame, int x, int y) {
  const std::size_t b = bit_index(frame, x, y);
  bits_[b / 64] |= std::uint64_t{1} << (b % 64);
}

std::uint64_t CoverageMap::count() const {
  std::uint64_t total = 0;
  for (std::uint64_t w : bits_) total += static_cast<std::uint64_t>(std::popcount(w));
  return total;
}

std::uint64_t CoverageMap::count_new(const CoverageMap& covered) const {
  if (covered.bits_.size() != bits_.size()) throw Error(ErrorCode::shape, "coverage maps differ in shape");
  return kernels::count_andnot_bits(bits_, covered.bits_);
}

CoverageMap& CoverageMap::operator|=(const CoverageMap& other) {
  if (other.bits_.size() != bits_.size()) throw Error(ErrorCode::shape, "coverage maps differ in shape");
  for (std::size_t i = 0; i < bits_.size(); ++i) bits_[i] |= other.bits_[i];
  return *this;
}

const char* to_string(Termination t) noexcept {
  switch (t) {
    case Termination::full_coverage: return "full_coverage";
    case Termination::budget_exhausted: return "budget_exhausted";
    case Termination::pool_exhausted: return "pool_exhausted";
  }
  return "unknown";
}

void RetrievalConfig::validate() const {
  if (budget < 1) throw Error(ErrorCode::validation, "retrieval budget K must be >= 1");
  if (!(tau >= 0.0 && tau <= 1.0)) throw Error(ErrorCode::validation, "tau must lie in [0, 1]");
  if (coverage_scale < 1) throw Error(ErrorCode::validation, "coverage scale must be >= 1");
  if (!(splat_radius >= 0.0)) throw Error(ErrorCode::validation, "splat radius must be >= 0");
  if (fov_sample < 1) throw Error(ErrorCode::validation, "FoV sample size must be >= 1");
}

namespace retrieval {

namespace {

bool in_frustum(double u, double v, double depth, const Intrinsics& k) {
  return depth > 0.0 && u >= -0.5 && u < k.width - 0.5 && v >= -0.5 && v < k.height - 0.5;
}

LocalPointCloud subsample(const LocalPointCloud& cloud, std::size_t sample_size) {
  if (cloud.size() <= sample_size) return cloud;
  LocalPointCloud out;
  out.capture_pose = cloud.capture_pose;
  out.capture_intrinsics = cloud.capture_intrinsics;
  for (std::size_t s = 0; s < sample_size; ++s) {
    const std::size_t i = s * cloud.size() / sample_size;
    out.push_back(cloud.point(i), cloud.colors[i]);
  }
  return out;
}

}  // namespace

std::vector<std::int64_t> fov_candidates(const MemoryBank& bank, const ChunkPlan& chunk, const Intrinsics& k,
                                         double tau, std::size_t sample_size) {
  if (!(tau >= 0.0 && tau <= 1.0)) throw Error(ErrorCode::validation, "tau must lie in [0, 1]");
  std::vector<std::int64_t> kept;
  for (const MemoryEntryPtr& entry : bank.entries()) {
    if (entry->cloud.empty()) continue;
    const LocalPointCloud sample = subsample(entry->cloud, sample_size);
    const double n = static_cast<double>(sample.size());
    for (const Pose& pose : chunk.poses) {
      const render::ProjectedCloud proj = render::project_cloud(sample, pose, k);
      std::size_t inside = 0;
      for (std::size_t i = 0; i < sample.size(); ++i) inside += in_frustum(proj.u[i], proj.v[i], proj.depth[i], k);
      if (inside > 0 && static_cast<double>(inside) / n >= tau) {
        kept.push_back(entry->id);
        break;
      }
    }
  }
  return kept;
}

CoverageMap coverage_of(const LocalPointCloud& cloud, const ChunkPlan& chunk, const Intrinsics& k,
                        double splat_radius, int coverage_scale) {
  const Intrinsics grid = k.downsampled(coverage_scale);
  const double radius = splat_radius / static_cast<double>(std::max(coverage_scale, 1));
  CoverageMap map(chunk.size(), grid.width, grid.height);
  if (cloud.empty()) return map;
  for (std::size_t f = 0; f < chunk.size(); ++f) {
    const render::ProjectedCloud proj = render::project_cloud(cloud, chunk.poses[f], grid);
    for (std::size_t i = 0; i < cloud.size(); ++i) {
      if (!(proj.depth[i] > 0.0)) continue;
      render::for_each_splat_pixel(proj.u[i], proj.v[i], radius, grid.width, grid.height,
                                   [&](int x, int y) { map.set(f, x, y); });
    }
  }
  return map;
}

RetrievalResult greedy_retrieve(const MemoryBank& bank, const ChunkPlan& chunk, const Intrinsics& k,
                                const RetrievalConfig& cfg) {
  cfg.validate();
  if (bank.empty()) throw Error(ErrorCode::validation, "retrieval needs a non-empty memory bank");
  if (chunk.poses.empty()) throw Error(ErrorCode::validation, "chunk has no poses");

  RetrievalResult result;
  result.chunk_index = chunk.index;
  const MemoryEntry& seed = bank.latest();
  result.candidates = fov_candidates(bank, chunk, k, cfg.tau, cfg.fov_sample);

  struct Candidate {
    std::int64_t id;
    CoverageMap coverage;
  };
  std::vector<Candidate> pool;
  pool.reserve(result.candidates.size());
  for (std::int64_t id : result.candidates) {
    if (id == seed.id) continue;
    pool.push_back({id, coverage_of(bank.at(id).cloud, chunk, k, cfg.splat_radius, cfg.coverage_scale)});
  }

  CoverageMap covered = coverage_of(seed.cloud, chunk, k, cfg.splat_radius, cfg.coverage_scale);
  CoverageMap universe = covered;
  for (const Candidate& c : pool) universe |= c.coverage;
  result.universe_count = universe.count();

  result.selected.push_back(seed.id);
  result.gains.push_back(covered.count());
  std::uint64_t covered_count = result.gains.back();

  auto fully_covered = [&] { return result.universe_count > 0 && covered_count == result.universe_count; };

  if (fully_covered()) {
    result.termination = Termination::full_coverage;
  } else {
    for (;;) {
      if (result.selected.size() >= static_cast<std::size_t>(cfg.budget)) {
        result.termination = Termination::budget_exhausted;
        break;
      }
      if (pool.empty()) {
        result.termination = Termination::pool_exhausted;
        break;
      }
      // Pool is in ascending id order, so the first maximum is the oldest memory.
      std::size_t best = 0;
      std::uint64_t best_gain = 0;
      for (std::size_t i = 0; i < pool.size(); ++i) {
        const std::uint64_t gain = pool[i].coverage.count_new(covered);
        if (gain > best_gain) {
          best_gain = gain;
          best = i;
        }
      }
      if (best_gain == 0) {
        result.termination = Termination::pool_exhausted;
        break;
      }
      covered |= pool[best].coverage;
      covered_count += best_gain;
      result.selected.push_back(pool[best].id);
      result.gains.push_back(best_gain);
      pool.erase(pool.begin() + static_cast<std::ptrdiff_t>(best));
      if (fully_covered()) {
        result.termination = Termination::full_coverage;
        break;
      }
    }
  }

  result.covered_count = covered_count;
  result.final_coverage_fraction =
      result.universe_count > 0 ? static_cast<double>(covered_count) / static_cast<double>(result.universe_count)
                                : 0.0;
  result.covered = std::move(covered);
  return result;
}

std::vector<RetrievalResult> retrieve_all_chunks(const MemoryBank& bank, std::span<const ChunkPlan> chunks,
                                                 const Intrinsics& k, const RetrievalConfig& cfg) {
  std::vector<RetrievalResult> out;
  out.reserve(chunks.size());
  for (std::size_t m = 0; m < chunks.size(); ++m) {
    try {
      out.push_back(greedy_retrieve(bank, chunks[m], k, cfg));
    } catch (const Error& e) {
      throw Error(e.code(), "chunk " + std::to_string(m) + ": " + e.what());
    }
  }
  return out;
}

}  // namespace retrieval
}  // namespace anchorweave
