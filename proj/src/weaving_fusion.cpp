#include "anchorweave/weaving_fusion.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "anchorweave/error.hpp"
#include "anchorweave/kernels.hpp"

namespace anchorweave {

const char* to_string(FillMode m) noexcept { return m == FillMode::background ? "background" : "nearest"; }

FillMode fill_mode_from_string(const std::string& s) {
  if (s == "background") return FillMode::background;
  if (s == "nearest") return FillMode::nearest;
  throw Error(ErrorCode::parse, "unknown fill mode '" + s + "'");
}

void FusionConfig::validate() const {
  if (!(lambda_r >= 0.0) || !(lambda_t >= 0.0)) throw Error(ErrorCode::validation, "pose weights must be >= 0");
  if (!(beta > 0.0) || !std::isfinite(beta)) throw Error(ErrorCode::validation, "beta must be > 0");
}

namespace fusion {

std::vector<double> importance_weights(std::span<const Pose> rel_poses, std::span<const std::uint8_t> visible_any,
                                       double lambda_r, double lambda_t, double beta) {
  if (rel_poses.empty()) throw Error(ErrorCode::shape, "need at least one slot");
  if (rel_poses.size() != visible_any.size()) throw Error(ErrorCode::shape, "pose/visibility count mismatch");
  if (!(beta > 0.0)) throw Error(ErrorCode::validation, "beta must be > 0");

  const std::size_t k = rel_poses.size();
  std::vector<double> dist(k, 0.0);
  double dmin = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < k; ++j) {
    if (!visible_any[j]) continue;
    dist[j] = geometry::pose_distance(rel_poses[j], lambda_r, lambda_t);
    dmin = std::min(dmin, dist[j]);
  }
  std::vector<double> w(k, 0.0);
  if (!std::isfinite(dmin)) return w;
  // Shifted by the minimum so the closest slot contributes exactly 1.
  for (std::size_t j = 0; j < k; ++j) {
    if (visible_any[j]) w[j] = std::exp(-beta * (dist[j] - dmin));
  }
  // Summing in sorted order keeps the result independent of slot order.
  std::vector<double> sorted = w;
  std::sort(sorted.begin(), sorted.end());
  double total = 0.0;
  for (double x : sorted) total += x;
  for (double& x : w) x /= total;
  return w;
}

std::vector<std::uint32_t> quantize_weights(std::span<const double> weights,
                                            std::span<const std::uint8_t> visible_any) {
  if (weights.size() != visible_any.size()) throw Error(ErrorCode::shape, "weight/visibility count mismatch");
  std::vector<std::uint32_t> q(weights.size(), 0);
  for (std::size_t j = 0; j < weights.size(); ++j) {
    if (!visible_any[j]) continue;
    const double w = std::clamp(weights[j], 0.0, 1.0);
    q[j] = std::max<std::uint32_t>(1, static_cast<std::uint32_t>(std::lround(w * kWeightScale)));
  }
  return q;
}

std::vector<std::int64_t> nearest_set_pixel(const Mask& mask) {
  const int w = mask.width();
  const int h = mask.height();
  const std::int64_t inf = std::numeric_limits<std::int64_t>::max() / 4;
  std::vector<std::int64_t> out(static_cast<std::size_t>(w) * static_cast<std::size_t>(h), -1);

  // Column pass: nearest set row in each column.
  std::vector<std::int64_t> col_dist(out.size(), inf);
  std::vector<int> col_row(out.size(), -1);
  for (int x = 0; x < w; ++x) {
    int last = -1;
    for (int y = 0; y < h; ++y) {
      if (mask(x, y)) last = y;
      if (last >= 0) {
        col_dist[mask.index(x, y)] = y - last;
        col_row[mask.index(x, y)] = last;
      }
    }
    last = -1;
    for (int y = h - 1; y >= 0; --y) {
      if (mask(x, y)) last = y;
      if (last >= 0 && last - y < col_dist[mask.index(x, y)]) {
        col_dist[mask.index(x, y)] = last - y;
        col_row[mask.index(x, y)] = last;
      }
    }
  }

  // Row pass: lower envelope of parabolas (x - q)^2 + g(q)^2.
  std::vector<int> v(static_cast<std::size_t>(w));
  std::vector<double> z(static_cast<std::size_t>(w) + 1);
  for (int y = 0; y < h; ++y) {
    auto g2 = [&](int q) {
      const std::int64_t d = col_dist[mask.index(q, y)];
      return d >= inf ? std::numeric_limits<double>::infinity() : static_cast<double>(d * d);
    };
    int k = -1;
    for (int q = 0; q < w; ++q) {
      if (!std::isfinite(g2(q))) continue;
      if (k < 0) {
        k = 0;
        v[0] = q;
        z[0] = -std::numeric_limits<double>::infinity();
        z[1] = std::numeric_limits<double>::infinity();
        continue;
      }
      double s = 0.0;
      for (;;) {
        const int p = v[static_cast<std::size_t>(k)];
        s = ((g2(q) + static_cast<double>(q) * q) - (g2(p) + static_cast<double>(p) * p)) / (2.0 * (q - p));
        if (s <= z[static_cast<std::size_t>(k)] && k > 0) {
          --k;
        } else {
          break;
        }
      }
      ++k;
      v[static_cast<std::size_t>(k)] = q;
      z[static_cast<std::size_t>(k)] = s;
      z[static_cast<std::size_t>(k) + 1] = std::numeric_limits<double>::infinity();
    }
    if (k < 0) continue;
    int j = 0;
    for (int x = 0; x < w; ++x) {
      while (z[static_cast<std::size_t>(j) + 1] < x) ++j;
      const int q = v[static_cast<std::size_t>(j)];
      out[mask.index(x, y)] = static_cast<std::int64_t>(mask.index(q, col_row[mask.index(q, y)]));
    }
  }
  return out;
}

CompositeFrame fuse(std::span<const AnchorFrame* const> frames, std::span<const double> weights, FillMode fill) {
  if (frames.empty()) throw Error(ErrorCode::shape, "fusion needs at least one slot");
  if (frames.size() != weights.size()) {
    throw Error(ErrorCode::shape, "got " + std::to_string(weights.size()) + " weights for " +
                                      std::to_string(frames.size()) + " slots");
  }
  const int w = frames[0]->rgb.width();
  const int h = frames[0]->rgb.height();
  for (const AnchorFrame* f : frames) {
    if (f->rgb.width() != w || f->rgb.height() != h || !f->visibility.same_shape(f->rgb)) {
      throw Error(ErrorCode::shape, "anchor frames differ in size");
    }
  }

  std::vector<std::uint8_t> any(frames.size());
  for (std::size_t j = 0; j < frames.size(); ++j) any[j] = frames[j]->any_visible() ? 1 : 0;
  const std::vector<std::uint32_t> q = quantize_weights(weights, any);

  const std::size_t n = static_cast<std::size_t>(w) * static_cast<std::size_t>(h);
  std::vector<std::uint32_t> num(n * 3, 0);
  std::vector<std::uint32_t> den(n, 0);
  std::vector<std::uint8_t> gate3(n * 3);
  for (std::size_t j = 0; j < frames.size(); ++j) {
    if (q[j] == 0) continue;
    const auto vis = frames[j]->visibility.pixels();
    for (std::size_t i = 0; i < n; ++i) gate3[3 * i] = gate3[3 * i + 1] = gate3[3 * i + 2] = vis[i];
    kernels::weighted_accumulate(channel_bytes(frames[j]->rgb), gate3, q[j], num);
    kernels::weighted_accumulate(vis, vis, q[j], den);
  }

  CompositeFrame out;
  out.rgb = RgbImage(w, h, kBackgroundGray);
  out.hole_mask = Mask(w, h, 0);
  out.fill_mode = fill;
  out.weights.assign(weights.begin(), weights.end());
  Mask filled(w, h, 0);
  for (std::size_t i = 0; i < n; ++i) {
    if (den[i] == 0) {
      out.hole_mask[i] = 1;
      continue;
    }
    filled[i] = 1;
    for (int c = 0; c < 3; ++c) {
      out.rgb[i][static_cast<std::size_t>(c)] = static_cast<std::uint8_t>((num[3 * i + c] + den[i] / 2) / den[i]);
    }
  }
  if (fill == FillMode::nearest) {
    const std::vector<std::int64_t> nearest = nearest_set_pixel(filled);
    for (std::size_t i = 0; i < n; ++i) {
      if (out.hole_mask[i] && nearest[i] >= 0) out.rgb[i] = out.rgb[static_cast<std::size_t>(nearest[i])];
    }
  }
  return out;
}

CompositeFrame fuse_slots(std::span<const AnchorFrame* const> frames, std::span<const Pose> rel_poses,
                          const FusionConfig& cfg) {
  if (frames.size() != rel_poses.size()) throw Error(ErrorCode::shape, "frame/pose count mismatch");
  std::vector<std::uint8_t> any(frames.size());
  for (std::size_t j = 0; j < frames.size(); ++j) any[j] = frames[j]->any_visible() ? 1 : 0;
  const std::vector<double> w = importance_weights(rel_poses, any, cfg.lambda_r, cfg.lambda_t, cfg.beta);
  return fuse(frames, w, cfg.fill);
}

PackedTokens pack_tokens(std::span<const Eigen::MatrixXd> sequences) {
  if (sequences.empty()) throw Error(ErrorCode::shape, "no token sequences to pack");
  const Eigen::Index rows = sequences[0].rows();
  const Eigen::Index cols = sequences[0].cols();
  for (std::size_t j = 1; j < sequences.size(); ++j) {
    if (sequences[j].rows() != rows || sequences[j].cols() != cols) {
      throw Error(ErrorCode::shape, "token sequence " + std::to_string(j) + " is " +
                                        std::to_string(sequences[j].rows()) + "x" +
                                        std::to_string(sequences[j].cols()) + ", expected " + std::to_string(rows) +
                                        "x" + std::to_string(cols));
    }
  }
  PackedTokens out;
  out.tokens_per_slot = static_cast<int>(rows);
  out.tokens.resize(rows * static_cast<Eigen::Index>(sequences.size()), cols);
  out.slot_of_token.reserve(static_cast<std::size_t>(out.tokens.rows()));
  for (std::size_t j = 0; j < sequences.size(); ++j) {
    out.tokens.middleRows(static_cast<Eigen::Index>(j) * rows, rows) = sequences[j];
    out.slot_of_token.insert(out.slot_of_token.end(), static_cast<std::size_t>(rows), static_cast<int>(j));
  }
  return out;
}

std::vector<Eigen::MatrixXd> unpack_tokens(const PackedTokens& packed) {
  const Eigen::Index rows = packed.tokens_per_slot;
  if (rows <= 0 || packed.tokens.rows() % rows != 0 ||
      packed.slot_of_token.size() != static_cast<std::size_t>(packed.tokens.rows())) {
    throw Error(ErrorCode::shape, "packed token bookkeeping is inconsistent");
  }
  std::vector<Eigen::MatrixXd> out;
  for (Eigen::Index j = 0; j < packed.tokens.rows() / rows; ++j) {
    out.emplace_back(packed.tokens.middleRows(j * rows, rows));
  }
  return out;
}

}  // namespace fusion
}  // namespace anchorweave
