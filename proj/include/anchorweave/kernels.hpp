#pragma once

// Data-parallel inner loops. Every kernel has a scalar reference
// implementation and, where the target supports it, a SIMD variant selected
// at runtime. Variants must produce bit-identical results to the reference.

#include <cstddef>
#include <cstdint>
#include <span>

namespace anchorweave::kernels {

enum class Isa { scalar, avx2 };

const char* to_string(Isa isa) noexcept;

/// Best ISA this process may use. `ANCHORWEAVE_ISA=scalar` in the environment
/// pins the scalar path.
Isa active_isa() noexcept;
bool isa_available(Isa isa) noexcept;
/// Overrides the dispatch target; falls back to scalar if `isa` is unavailable.
void force_isa(Isa isa) noexcept;

/// World-to-camera rigid transform plus pinhole parameters.
struct ProjectionParams {
  double r[9];  // row-major
  double t[3];
  double fx, fy, cx, cy;
};

/// Structure-of-arrays point input and projection output. `depth` is the
/// camera-frame z; callers reject depth <= 0 themselves.
struct PointsSoA {
  std::span<const double> x, y, z;
};
struct ProjectedSoA {
  std::span<double> u, v, depth;
};

void project_points(const ProjectionParams& p, PointsSoA in, ProjectedSoA out);

/// popcount(a & ~b) over equal-length bit arrays.
std::uint64_t count_andnot_bits(std::span<const std::uint64_t> a, std::span<const std::uint64_t> b);

/// Sum over i of gate[i] ? (a[i] - b[i])^2 : 0. An empty gate selects all.
std::uint64_t squared_error_sum(std::span<const std::uint8_t> a, std::span<const std::uint8_t> b,
                                std::span<const std::uint8_t> gate);

/// acc[i] += gate[i] ? weight * values[i] : 0.
void weighted_accumulate(std::span<const std::uint8_t> values, std::span<const std::uint8_t> gate,
                         std::uint32_t weight, std::span<std::uint32_t> acc);

namespace scalar {
void project_points(const ProjectionParams& p, PointsSoA in, ProjectedSoA out);
std::uint64_t count_andnot_bits(std::span<const std::uint64_t> a, std::span<const std::uint64_t> b);
std::uint64_t squared_error_sum(std::span<const std::uint8_t> a, std::span<const std::uint8_t> b,
                                std::span<const std::uint8_t> gate);
void weighted_accumulate(std::span<const std::uint8_t> values, std::span<const std::uint8_t> gate,
                         std::uint32_t weight, std::span<std::uint32_t> acc);
}  // namespace scalar

#if defined(ANCHORWEAVE_HAVE_AVX2)
namespace avx2 {
void project_points(const ProjectionParams& p, PointsSoA in, ProjectedSoA out);
std::uint64_t count_andnot_bits(std::span<const std::uint64_t> a, std::span<const std::uint64_t> b);
std::uint64_t squared_error_sum(std::span<const std::uint8_t> a, std::span<const std::uint8_t> b,
                                std::span<const std::uint8_t> gate);
void weighted_accumulate(std::span<const std::uint8_t> values, std::span<const std::uint8_t> gate,
                         std::uint32_t weight, std::span<std::uint32_t> acc);
}  // namespace avx2
#endif

}  // namespace anchorweave::kernels
