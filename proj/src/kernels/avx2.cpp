// Compiled with -mavx2. Only called after a runtime CPU check.
// Arithmetic follows the scalar reference operation by operation (no FMA) so
// results are bit-identical.

#include <immintrin.h>

#include <array>

#include "anchorweave/kernels.hpp"

namespace anchorweave::kernels::avx2 {

void project_points(const ProjectionParams& p, PointsSoA in, ProjectedSoA out) {
  const std::size_t n = in.x.size();
  const __m256d r0 = _mm256_set1_pd(p.r[0]), r1 = _mm256_set1_pd(p.r[1]), r2 = _mm256_set1_pd(p.r[2]);
  const __m256d r3 = _mm256_set1_pd(p.r[3]), r4 = _mm256_set1_pd(p.r[4]), r5 = _mm256_set1_pd(p.r[5]);
  const __m256d r6 = _mm256_set1_pd(p.r[6]), r7 = _mm256_set1_pd(p.r[7]), r8 = _mm256_set1_pd(p.r[8]);
  const __m256d t0 = _mm256_set1_pd(p.t[0]), t1 = _mm256_set1_pd(p.t[1]), t2 = _mm256_set1_pd(p.t[2]);
  const __m256d fx = _mm256_set1_pd(p.fx), fy = _mm256_set1_pd(p.fy);
  const __m256d ccx = _mm256_set1_pd(p.cx), ccy = _mm256_set1_pd(p.cy);

  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d x = _mm256_loadu_pd(in.x.data() + i);
    const __m256d y = _mm256_loadu_pd(in.y.data() + i);
    const __m256d z = _mm256_loadu_pd(in.z.data() + i);
    const __m256d camx = _mm256_add_pd(
        _mm256_add_pd(_mm256_add_pd(_mm256_mul_pd(r0, x), _mm256_mul_pd(r1, y)), _mm256_mul_pd(r2, z)), t0);
    const __m256d camy = _mm256_add_pd(
        _mm256_add_pd(_mm256_add_pd(_mm256_mul_pd(r3, x), _mm256_mul_pd(r4, y)), _mm256_mul_pd(r5, z)), t1);
    const __m256d camz = _mm256_add_pd(
        _mm256_add_pd(_mm256_add_pd(_mm256_mul_pd(r6, x), _mm256_mul_pd(r7, y)), _mm256_mul_pd(r8, z)), t2);
    _mm256_storeu_pd(out.u.data() + i, _mm256_add_pd(ccx, _mm256_mul_pd(fx, _mm256_div_pd(camx, camz))));
    _mm256_storeu_pd(out.v.data() + i, _mm256_add_pd(ccy, _mm256_mul_pd(fy, _mm256_div_pd(camy, camz))));
    _mm256_storeu_pd(out.depth.data() + i, camz);
  }
  if (i < n) {
    scalar::project_points(p, {in.x.subspan(i), in.y.subspan(i), in.z.subspan(i)},
                           {out.u.subspan(i), out.v.subspan(i), out.depth.subspan(i)});
  }
}

std::uint64_t count_andnot_bits(std::span<const std::uint64_t> a, std::span<const std::uint64_t> b) {
  // Nibble lookup popcount (Mula et al.).
  const __m256i lookup = _mm256_setr_epi8(0, 1, 1, 2, 1, 2, 2, 3, 1, 2, 2, 3, 2, 3, 3, 4,
                                          0, 1, 1, 2, 1, 2, 2, 3, 1, 2, 2, 3, 2, 3, 3, 4);
  const __m256i low_mask = _mm256_set1_epi8(0x0f);
  __m256i acc = _mm256_setzero_si256();
  const std::size_t n = a.size();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256i va = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(a.data() + i));
    const __m256i vb = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(b.data() + i));
    const __m256i v = _mm256_andnot_si256(vb, va);
    const __m256i lo = _mm256_and_si256(v, low_mask);
    const __m256i hi = _mm256_and_si256(_mm256_srli_epi16(v, 4), low_mask);
    const __m256i cnt = _mm256_add_epi8(_mm256_shuffle_epi8(lookup, lo), _mm256_shuffle_epi8(lookup, hi));
    acc = _mm256_add_epi64(acc, _mm256_sad_epu8(cnt, _mm256_setzero_si256()));
  }
  alignas(32) std::array<std::uint64_t, 4> lanes{};
  _mm256_store_si256(reinterpret_cast<__m256i*>(lanes.data()), acc);
  std::uint64_t total = lanes[0] + lanes[1] + lanes[2] + lanes[3];
  if (i < n) total += scalar::count_andnot_bits(a.subspan(i), b.subspan(i));
  return total;
}

namespace {

std::uint64_t horizontal_sum_epi32(__m256i v) {
  alignas(32) std::array<std::int32_t, 8> lanes{};
  _mm256_store_si256(reinterpret_cast<__m256i*>(lanes.data()), v);
  std::uint64_t total = 0;
  for (std::int32_t x : lanes) total += static_cast<std::uint64_t>(x);
  return total;
}

}  // namespace

std::uint64_t squared_error_sum(std::span<const std::uint8_t> a, std::span<const std::uint8_t> b,
                                std::span<const std::uint8_t> gate) {
  // Each 16-byte step adds at most 2 * 255^2 per int32 lane; flushing every
  // 8192 steps keeps lanes below 2^31.
  constexpr std::size_t kFlushEvery = 8192;
  const bool all = gate.empty();
  const __m256i zero = _mm256_setzero_si256();
  const std::size_t n = a.size();
  std::uint64_t total = 0;
  __m256i acc = zero;
  std::size_t steps = 0;
  std::size_t i = 0;
  for (; i + 16 <= n; i += 16) {
    const __m256i va = _mm256_cvtepu8_epi16(_mm_loadu_si128(reinterpret_cast<const __m128i*>(a.data() + i)));
    const __m256i vb = _mm256_cvtepu8_epi16(_mm_loadu_si128(reinterpret_cast<const __m128i*>(b.data() + i)));
    __m256i d = _mm256_sub_epi16(va, vb);
    if (!all) {
      const __m256i g = _mm256_cvtepu8_epi16(_mm_loadu_si128(reinterpret_cast<const __m128i*>(gate.data() + i)));
      d = _mm256_andnot_si256(_mm256_cmpeq_epi16(g, zero), d);
    }
    acc = _mm256_add_epi32(acc, _mm256_madd_epi16(d, d));
    if (++steps == kFlushEvery) {
      total += horizontal_sum_epi32(acc);
      acc = zero;
      steps = 0;
    }
  }
  total += horizontal_sum_epi32(acc);
  if (i < n) total += scalar::squared_error_sum(a.subspan(i), b.subspan(i), all ? gate : gate.subspan(i));
  return total;
}

void weighted_accumulate(std::span<const std::uint8_t> values, std::span<const std::uint8_t> gate,
                         std::uint32_t weight, std::span<std::uint32_t> acc) {
  const __m256i w = _mm256_set1_epi32(static_cast<int>(weight));
  const __m256i zero = _mm256_setzero_si256();
  const std::size_t n = values.size();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    const __m256i v = _mm256_cvtepu8_epi32(_mm_loadl_epi64(reinterpret_cast<const __m128i*>(values.data() + i)));
    const __m256i g = _mm256_cvtepu8_epi32(_mm_loadl_epi64(reinterpret_cast<const __m128i*>(gate.data() + i)));
    const __m256i prod = _mm256_andnot_si256(_mm256_cmpeq_epi32(g, zero), _mm256_mullo_epi32(v, w));
    __m256i* dst = reinterpret_cast<__m256i*>(acc.data() + i);
    _mm256_storeu_si256(dst, _mm256_add_epi32(_mm256_loadu_si256(dst), prod));
  }
  if (i < n) scalar::weighted_accumulate(values.subspan(i), gate.subspan(i), weight, acc.subspan(i));
}

}  // namespace anchorweave::kernels::avx2
