#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "anchorweave/anchor_renderer.hpp"
#include "anchorweave/geometry.hpp"
#include "anchorweave/raster.hpp"

namespace anchorweave {

enum class FillMode { background, nearest };

const char* to_string(FillMode m) noexcept;
FillMode fill_mode_from_string(const std::string& s);

struct FusionConfig {
  double lambda_r = 1.0;
  double lambda_t = 1.0;
  double beta = 2.0;
  FillMode fill = FillMode::nearest;

  void validate() const;
};

struct CompositeFrame {
  RgbImage rgb;
  Mask hole_mask;  // 1 where no anchor is visible
  FillMode fill_mode = FillMode::nearest;
  std::vector<double> weights;  // per-slot frame weights used for this composite
};

namespace fusion {

/// Weight resolution of the per-pixel blend.
inline constexpr std::uint32_t kWeightScale = 1u << 16;

/// exp(-beta * pose_distance) normalised over visible slots; invisible slots
/// get exactly 0. All-invisible input yields all zeros.
std::vector<double> importance_weights(std::span<const Pose> rel_poses, std::span<const std::uint8_t> visible_any,
                                       double lambda_r, double lambda_t, double beta);

/// Fixed-point weights used per pixel: 0 for invisible slots, otherwise at
/// least 1.
std::vector<std::uint32_t> quantize_weights(std::span<const double> weights,
                                            std::span<const std::uint8_t> visible_any);

/// Per-pixel blend of the visible slots, renormalised per pixel; pixels with
/// no visible slot are holes, filled according to `fill`.
CompositeFrame fuse(std::span<const AnchorFrame* const> frames, std::span<const double> weights, FillMode fill);

/// Weights plus blend for one set of slot frames.
CompositeFrame fuse_slots(std::span<const AnchorFrame* const> frames, std::span<const Pose> rel_poses,
                          const FusionConfig& cfg);

/// For each pixel, the index of the nearest pixel with mask set (Euclidean,
/// exact), or -1 if the mask is empty.
std::vector<std::int64_t> nearest_set_pixel(const Mask& mask);

struct PackedTokens {
  Eigen::MatrixXd tokens;          // (K * L_a) x C_a
  std::vector<int> slot_of_token;  // slot index per row
  int tokens_per_slot = 0;
};

PackedTokens pack_tokens(std::span<const Eigen::MatrixXd> sequences);
std::vector<Eigen::MatrixXd> unpack_tokens(const PackedTokens& packed);

}  // namespace fusion
}  // namespace anchorweave
