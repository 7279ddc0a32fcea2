#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

namespace anchorweave {

using Rgb8 = std::array<std::uint8_t, 3>;
static_assert(sizeof(Rgb8) == 3, "Rgb8 must be tightly packed");

inline constexpr Rgb8 kBackgroundGray{128, 128, 128};
inline constexpr double kNoDepth = std::numeric_limits<double>::infinity();

template <typename T>
class Raster {
 public:
  Raster() = default;
  Raster(int width, int height, T fill = T{})
      : width_(width), height_(height),
        data_(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), fill) {}

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool same_shape(int w, int h) const noexcept { return w == width_ && h == height_; }
  template <typename U>
  bool same_shape(const Raster<U>& other) const noexcept {
    return same_shape(other.width(), other.height());
  }

  T& operator()(int x, int y) { return data_[index(x, y)]; }
  const T& operator()(int x, int y) const { return data_[index(x, y)]; }
  T& operator[](std::size_t i) { return data_[i]; }
  const T& operator[](std::size_t i) const { return data_[i]; }

  std::span<T> pixels() noexcept { return data_; }
  std::span<const T> pixels() const noexcept { return data_; }
  T* data() noexcept { return data_.data(); }
  const T* data() const noexcept { return data_.data(); }

  std::size_t index(int x, int y) const noexcept {
    return static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) + static_cast<std::size_t>(x);
  }

  bool operator==(const Raster&) const = default;

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<T> data_;
};

using RgbImage = Raster<Rgb8>;
using Mask = Raster<std::uint8_t>;
using DepthMap = Raster<double>;

inline std::span<const std::uint8_t> channel_bytes(const RgbImage& img) {
  return {reinterpret_cast<const std::uint8_t*>(img.data()), img.size() * 3};
}

std::size_t count_set(const Mask& mask);

std::vector<std::uint8_t> encode_png(const RgbImage& img);
/// Encodes a boolean mask as a 1-bit grayscale PNG.
std::vector<std::uint8_t> encode_mask_png(const Mask& mask);
RgbImage decode_png(std::span<const std::uint8_t> bytes);

void write_file(const std::string& path, std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> read_file(const std::string& path);
void write_pfm(const std::string& path, const DepthMap& depth);

}  // namespace anchorweave
