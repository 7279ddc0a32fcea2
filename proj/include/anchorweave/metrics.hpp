#pragma once

#include "anchorweave/raster.hpp"

namespace anchorweave::metrics {

inline constexpr double kPsnrCap = 100.0;

/// PSNR in dB over the RGB channels of pixels selected by `mask` (an empty
/// 0x0 mask selects every pixel). Peak 255, capped at kPsnrCap.
double psnr(const RgbImage& a, const RgbImage& b, const Mask& mask = {});

/// Mean SSIM over selected pixels and channels; 11x11 Gaussian window
/// (sigma 1.5). Window statistics only use selected pixels.
double ssim(const RgbImage& a, const RgbImage& b, const Mask& mask = {});

/// Mask that is 1 where `holes` is 0.
Mask invert_mask(const Mask& holes);

}  // namespace anchorweave::metrics
