#include "anchorweave/metrics.hpp"

#include <array>
#include <cmath>

#include "anchorweave/error.hpp"
#include "anchorweave/kernels.hpp"

namespace anchorweave::metrics {

namespace {

void check_inputs(const RgbImage& a, const RgbImage& b, const Mask& mask) {
  if (!a.same_shape(b)) throw Error(ErrorCode::shape, "images differ in size");
  const bool all = mask.width() == 0 && mask.height() == 0;
  if (!all && !mask.same_shape(a)) throw Error(ErrorCode::shape, "mask size differs from image size");
}

bool selected(const Mask& mask, std::size_t i) { return mask.pixels().empty() || mask[i] != 0; }

constexpr int kRadius = 5;

std::array<double, 2 * kRadius + 1> gaussian_taps() {
  std::array<double, 2 * kRadius + 1> g{};
  double total = 0.0;
  for (int i = -kRadius; i <= kRadius; ++i) {
    g[static_cast<std::size_t>(i + kRadius)] = std::exp(-(i * i) / (2.0 * 1.5 * 1.5));
    total += g[static_cast<std::size_t>(i + kRadius)];
  }
  for (double& x : g) x /= total;
  return g;
}

}  // namespace

Mask invert_mask(const Mask& holes) {
  Mask out(holes.width(), holes.height(), 0);
  for (std::size_t i = 0; i < holes.pixels().size(); ++i) out[i] = holes[i] ? 0 : 1;
  return out;
}

double psnr(const RgbImage& a, const RgbImage& b, const Mask& mask) {
  check_inputs(a, b, mask);
  const std::size_t n = a.pixels().size();
  std::vector<std::uint8_t> gate;
  std::size_t count = n;
  if (!mask.pixels().empty()) {
    gate.resize(3 * n);
    count = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const std::uint8_t g = mask[i] ? 1 : 0;
      gate[3 * i] = gate[3 * i + 1] = gate[3 * i + 2] = g;
      count += g;
    }
  }
  if (count == 0) throw Error(ErrorCode::domain, "PSNR mask selects no pixels");
  const std::uint64_t sse = kernels::squared_error_sum(channel_bytes(a), channel_bytes(b), gate);
  if (sse == 0) return kPsnrCap;
  const double mse = static_cast<double>(sse) / (3.0 * static_cast<double>(count));
  return std::min(kPsnrCap, 10.0 * std::log10(255.0 * 255.0 / mse));
}

double ssim(const RgbImage& a, const RgbImage& b, const Mask& mask) {
  check_inputs(a, b, mask);
  const int w = a.width();
  const int h = a.height();
  const auto g = gaussian_taps();
  const double c1 = (0.01 * 255.0) * (0.01 * 255.0);
  const double c2 = (0.03 * 255.0) * (0.03 * 255.0);

  double total = 0.0;
  std::size_t terms = 0;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (!selected(mask, a.index(x, y))) continue;
      for (std::size_t c = 0; c < 3; ++c) {
        double sw = 0.0, ma = 0.0, mb = 0.0, aa = 0.0, bb = 0.0, ab = 0.0;
        for (int dy = -kRadius; dy <= kRadius; ++dy) {
          const int yy = y + dy;
          if (yy < 0 || yy >= h) continue;
          for (int dx = -kRadius; dx <= kRadius; ++dx) {
            const int xx = x + dx;
            if (xx < 0 || xx >= w) continue;
            const std::size_t i = a.index(xx, yy);
            if (!selected(mask, i)) continue;
            const double wt = g[static_cast<std::size_t>(dy + kRadius)] * g[static_cast<std::size_t>(dx + kRadius)];
            const double va = a[i][c];
            const double vb = b[i][c];
            sw += wt;
            ma += wt * va;
            mb += wt * vb;
            aa += wt * va * va;
            bb += wt * vb * vb;
            ab += wt * va * vb;
          }
        }
        ma /= sw;
        mb /= sw;
        const double var_a = aa / sw - ma * ma;
        const double var_b = bb / sw - mb * mb;
        const double cov = ab / sw - ma * mb;
        total += ((2.0 * ma * mb + c1) * (2.0 * cov + c2)) / ((ma * ma + mb * mb + c1) * (var_a + var_b + c2));
        ++terms;
      }
    }
  }
  if (terms == 0) throw Error(ErrorCode::domain, "SSIM mask selects no pixels");
  return total / static_cast<double>(terms);
}

}  // namespace anchorweave::metrics
