#include <bit>

#include "anchorweave/kernels.hpp"

namespace anchorweave::kernels::scalar {

void project_points(const ProjectionParams& p, PointsSoA in, ProjectedSoA out) {
  const std::size_t n = in.x.size();
  for (std::size_t i = 0; i < n; ++i) {
    const double x = in.x[i], y = in.y[i], z = in.z[i];
    const double cx = p.r[0] * x + p.r[1] * y + p.r[2] * z + p.t[0];
    const double cy = p.r[3] * x + p.r[4] * y + p.r[5] * z + p.t[1];
    const double cz = p.r[6] * x + p.r[7] * y + p.r[8] * z + p.t[2];
    out.u[i] = p.cx + p.fx * (cx / cz);
    out.v[i] = p.cy + p.fy * (cy / cz);
    out.depth[i] = cz;
  }
}

std::uint64_t count_andnot_bits(std::span<const std::uint64_t> a, std::span<const std::uint64_t> b) {
  std::uint64_t total = 0;
  for (std::size_t i = 0; i < a.size(); ++i) total += static_cast<std::uint64_t>(std::popcount(a[i] & ~b[i]));
  return total;
}

std::uint64_t squared_error_sum(std::span<const std::uint8_t> a, std::span<const std::uint8_t> b,
                                std::span<const std::uint8_t> gate) {
  std::uint64_t total = 0;
  const bool all = gate.empty();
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (!all && gate[i] == 0) continue;
    const int d = static_cast<int>(a[i]) - static_cast<int>(b[i]);
    total += static_cast<std::uint64_t>(d * d);
  }
  return total;
}

void weighted_accumulate(std::span<const std::uint8_t> values, std::span<const std::uint8_t> gate,
                         std::uint32_t weight, std::span<std::uint32_t> acc) {
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (gate[i] != 0) acc[i] += weight * values[i];
  }
}

}  // namespace anchorweave::kernels::scalar
