#include "anchorweave/raster.hpp"

#include <algorithm>
#include <cstring>
#include <fstream>
#include <iterator>

#include <png.h>

#include "anchorweave/error.hpp"

namespace anchorweave {

std::size_t count_set(const Mask& mask) {
  return static_cast<std::size_t>(
      std::count_if(mask.pixels().begin(), mask.pixels().end(), [](std::uint8_t m) { return m != 0; }));
}

namespace {

void append_bytes(png_structp png, png_bytep data, png_size_t length) {
  auto* out = static_cast<std::vector<std::uint8_t>*>(png_get_io_ptr(png));
  out->insert(out->end(), data, data + length);
}

void flush_noop(png_structp) {}

// libpng reports errors through longjmp, so these helpers keep only trivially
// destructible locals between setjmp and the libpng calls.
bool write_rows(std::vector<std::uint8_t>* out, int width, int height, int bit_depth, int color_type,
                png_bytep const* rows) {
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) return false;
  png_infop info = png_create_info_struct(png);
  if (!info || setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    return false;
  }
  png_set_write_fn(png, out, append_bytes, flush_noop);
  png_set_IHDR(png, info, static_cast<png_uint_32>(width), static_cast<png_uint_32>(height), bit_depth,
               color_type, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  for (int y = 0; y < height; ++y) png_write_row(png, rows[y]);
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  return true;
}

struct ReadCursor {
  const std::uint8_t* bytes;
  std::size_t size;
  std::size_t offset;
};

void read_bytes(png_structp png, png_bytep out, png_size_t length) {
  auto* cur = static_cast<ReadCursor*>(png_get_io_ptr(png));
  if (cur->offset + length > cur->size) png_error(png, "truncated stream");
  std::memcpy(out, cur->bytes + cur->offset, length);
  cur->offset += length;
}

bool read_rgb(ReadCursor* cursor, RgbImage* img) {
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) return false;
  png_infop info = png_create_info_struct(png);
  if (!info || setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    return false;
  }
  png_set_read_fn(png, cursor, read_bytes);
  png_read_info(png, info);
  png_set_expand(png);
  png_set_strip_16(png);
  png_set_strip_alpha(png);
  png_set_gray_to_rgb(png);
  png_read_update_info(png, info);
  const int w = static_cast<int>(png_get_image_width(png, info));
  const int h = static_cast<int>(png_get_image_height(png, info));
  *img = RgbImage(w, h);
  for (int y = 0; y < h; ++y) png_read_row(png, reinterpret_cast<png_bytep>(&(*img)(0, y)), nullptr);
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);
  return true;
}

}  // namespace

std::vector<std::uint8_t> encode_png(const RgbImage& img) {
  std::vector<png_bytep> rows(static_cast<std::size_t>(img.height()));
  for (int y = 0; y < img.height(); ++y) {
    rows[static_cast<std::size_t>(y)] = const_cast<png_bytep>(reinterpret_cast<const png_byte*>(&img(0, y)));
  }
  std::vector<std::uint8_t> out;
  if (!write_rows(&out, img.width(), img.height(), 8, PNG_COLOR_TYPE_RGB, rows.data())) {
    throw Error(ErrorCode::io, "png: encoding failed");
  }
  return out;
}

std::vector<std::uint8_t> encode_mask_png(const Mask& mask) {
  const std::size_t row_bytes = (static_cast<std::size_t>(mask.width()) + 7) / 8;
  std::vector<std::uint8_t> packed(row_bytes * static_cast<std::size_t>(mask.height()), 0);
  std::vector<png_bytep> rows(static_cast<std::size_t>(mask.height()));
  for (int y = 0; y < mask.height(); ++y) {
    png_bytep row = packed.data() + row_bytes * static_cast<std::size_t>(y);
    rows[static_cast<std::size_t>(y)] = row;
    for (int x = 0; x < mask.width(); ++x) {
      if (mask(x, y)) row[x / 8] |= static_cast<std::uint8_t>(0x80u >> (x % 8));
    }
  }
  std::vector<std::uint8_t> out;
  if (!write_rows(&out, mask.width(), mask.height(), 1, PNG_COLOR_TYPE_GRAY, rows.data())) {
    throw Error(ErrorCode::io, "png: encoding failed");
  }
  return out;
}

RgbImage decode_png(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 8 || png_sig_cmp(bytes.data(), 0, 8) != 0) {
    throw Error(ErrorCode::format, "png: bad signature");
  }
  ReadCursor cursor{bytes.data(), bytes.size(), 0};
  RgbImage img;
  if (!read_rgb(&cursor, &img)) throw Error(ErrorCode::format, "png: corrupt stream");
  return img;
}

void write_file(const std::string& path, std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::io, "cannot open " + path + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorCode::io, "short write to " + path);
}

std::vector<std::uint8_t> read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::io, "cannot open " + path);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_pfm(const std::string& path, const DepthMap& depth) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::io, "cannot open " + path + " for writing");
  // Negative scale marks little-endian; PFM rows run bottom to top.
  out << "Pf\n" << depth.width() << " " << depth.height() << "\n-1.0\n";
  for (int y = depth.height() - 1; y >= 0; --y) {
    for (int x = 0; x < depth.width(); ++x) {
      const float v = static_cast<float>(depth(x, y));
      out.write(reinterpret_cast<const char*>(&v), sizeof(v));
    }
  }
}

}  // namespace anchorweave
