// Runtime selection between kernel variants. No intrinsics in this file.

#include <atomic>
#include <cstdlib>
#include <string_view>

#include "anchorweave/error.hpp"
#include "anchorweave/kernels.hpp"

namespace anchorweave::kernels {

namespace {

bool cpu_has_avx2() noexcept {
#if defined(ANCHORWEAVE_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
  return __builtin_cpu_supports("avx2");
#else
  return false;
#endif
}

Isa detect() noexcept {
  if (const char* env = std::getenv("ANCHORWEAVE_ISA"); env && std::string_view(env) == "scalar") {
    return Isa::scalar;
  }
  return cpu_has_avx2() ? Isa::avx2 : Isa::scalar;
}

std::atomic<Isa>& current() noexcept {
  static std::atomic<Isa> isa{detect()};
  return isa;
}

void check_same_size(std::size_t a, std::size_t b, const char* what) {
  if (a != b) throw Error(ErrorCode::shape, std::string(what) + ": length mismatch");
}

}  // namespace

const char* to_string(Isa isa) noexcept {
  return isa == Isa::avx2 ? "avx2" : "scalar";
}

Isa active_isa() noexcept { return current().load(std::memory_order_relaxed); }

bool isa_available(Isa isa) noexcept { return isa == Isa::scalar || cpu_has_avx2(); }

void force_isa(Isa isa) noexcept {
  current().store(isa_available(isa) ? isa : Isa::scalar, std::memory_order_relaxed);
}

void project_points(const ProjectionParams& p, PointsSoA in, ProjectedSoA out) {
  const std::size_t n = in.x.size();
  check_same_size(n, in.y.size(), "project_points");
  check_same_size(n, in.z.size(), "project_points");
  check_same_size(n, out.u.size(), "project_points");
  check_same_size(n, out.v.size(), "project_points");
  check_same_size(n, out.depth.size(), "project_points");
#if defined(ANCHORWEAVE_HAVE_AVX2)
  if (active_isa() == Isa::avx2) return avx2::project_points(p, in, out);
#endif
  scalar::project_points(p, in, out);
}

std::uint64_t count_andnot_bits(std::span<const std::uint64_t> a, std::span<const std::uint64_t> b) {
  check_same_size(a.size(), b.size(), "count_andnot_bits");
#if defined(ANCHORWEAVE_HAVE_AVX2)
  if (active_isa() == Isa::avx2) return avx2::count_andnot_bits(a, b);
#endif
  return scalar::count_andnot_bits(a, b);
}

std::uint64_t squared_error_sum(std::span<const std::uint8_t> a, std::span<const std::uint8_t> b,
                                std::span<const std::uint8_t> gate) {
  check_same_size(a.size(), b.size(), "squared_error_sum");
  if (!gate.empty()) check_same_size(a.size(), gate.size(), "squared_error_sum");
#if defined(ANCHORWEAVE_HAVE_AVX2)
  if (active_isa() == Isa::avx2) return avx2::squared_error_sum(a, b, gate);
#endif
  return scalar::squared_error_sum(a, b, gate);
}

void weighted_accumulate(std::span<const std::uint8_t> values, std::span<const std::uint8_t> gate,
                         std::uint32_t weight, std::span<std::uint32_t> acc) {
  check_same_size(values.size(), gate.size(), "weighted_accumulate");
  check_same_size(values.size(), acc.size(), "weighted_accumulate");
#if defined(ANCHORWEAVE_HAVE_AVX2)
  if (active_isa() == Isa::avx2) return avx2::weighted_accumulate(values, gate, weight, acc);
#endif
  scalar::weighted_accumulate(values, gate, weight, acc);
}

}  // namespace anchorweave::kernels
