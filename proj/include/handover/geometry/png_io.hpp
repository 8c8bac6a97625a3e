#pragma once

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "handover/geometry/types.hpp"

namespace handover::geometry {

/// Raw single-file PNG image, 8 or 16 bits per channel.
struct PngImage {
  int width{0};
  int height{0};
  int channels{0};
  int bit_depth{0};
  std::vector<std::uint16_t> samples;  // row-major, interleaved channels
};

namespace detail {

struct FileCloser {
  void operator()(std::FILE* f) const noexcept {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

[[noreturn]] inline void png_error_handler(png_structp png, png_const_charp msg) {
  auto* buf = static_cast<std::string*>(png_get_error_ptr(png));
  if (buf) *buf = msg;
  png_longjmp(png, 1);
}
inline void png_warning_handler(png_structp, png_const_charp) {}

}  // namespace detail

/// Reads a PNG without any color or gamma conversion. Palette images are
/// expanded; alpha is dropped.
inline PngImage read_png(const std::filesystem::path& path) {
  detail::FilePtr file(std::fopen(path.string().c_str(), "rb"));
  if (!file) throw LoadError("cannot open " + path.string());
  unsigned char sig[8];
  if (std::fread(sig, 1, 8, file.get()) != 8 || png_sig_cmp(sig, 0, 8) != 0) {
    throw LoadError("not a PNG file: " + path.string());
  }

  std::string err;
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, &err,
                                           detail::png_error_handler, detail::png_warning_handler);
  if (!png) throw LoadError("libpng init failed");
  png_infop info = png_create_info_struct(png);
  PngImage img;
  // Buffers live on the heap so their state survives the longjmp path.
  auto buf = std::make_unique<std::pair<std::vector<unsigned char>, std::vector<png_bytep>>>();
  auto& raw = buf->first;
  auto& rows = buf->second;

  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw LoadError("PNG decode error in " + path.string() + ": " + err);
  }
  png_init_io(png, file.get());
  png_set_sig_bytes(png, 8);
  png_read_info(png, info);

  const int color = png_get_color_type(png, info);
  int depth = png_get_bit_depth(png, info);
  if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (color == PNG_COLOR_TYPE_GRAY && depth < 8) png_set_expand_gray_1_2_4_to_8(png);
  if (color & PNG_COLOR_MASK_ALPHA) png_set_strip_alpha(png);
  if (depth == 16) png_set_swap(png);
  png_read_update_info(png, info);

  img.width = static_cast<int>(png_get_image_width(png, info));
  img.height = static_cast<int>(png_get_image_height(png, info));
  img.channels = png_get_channels(png, info);
  depth = png_get_bit_depth(png, info);
  img.bit_depth = depth;
  const std::size_t rowbytes = png_get_rowbytes(png, info);
  raw.resize(rowbytes * static_cast<std::size_t>(img.height));
  rows.resize(static_cast<std::size_t>(img.height));
  for (int y = 0; y < img.height; ++y) rows[y] = raw.data() + rowbytes * y;
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);

  const std::size_t n = static_cast<std::size_t>(img.width) * img.height * img.channels;
  img.samples.resize(n);
  if (depth == 16) {
    for (std::size_t i = 0; i < n; ++i) {
      std::uint16_t s;
      std::memcpy(&s, raw.data() + 2 * i, 2);
      img.samples[i] = s;
    }
  } else {
    for (std::size_t i = 0; i < n; ++i) img.samples[i] = raw[i];
  }
  return img;
}

/// Writes 8- or 16-bit gray/RGB PNG.
inline void write_png(const std::filesystem::path& path, const PngImage& img) {
  if (img.channels != 1 && img.channels != 3) throw InputError("write_png: 1 or 3 channels");
  if (img.bit_depth != 8 && img.bit_depth != 16) throw InputError("write_png: 8 or 16 bits");
  detail::FilePtr file(std::fopen(path.string().c_str(), "wb"));
  if (!file) throw InputError("cannot write " + path.string());

  std::string err;
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, &err,
                                            detail::png_error_handler, detail::png_warning_handler);
  if (!png) throw InputError("libpng init failed");
  png_infop info = png_create_info_struct(png);
  const std::size_t bytes = img.bit_depth / 8;
  const std::size_t rowbytes = static_cast<std::size_t>(img.width) * img.channels * bytes;
  auto buf = std::make_unique<std::pair<std::vector<unsigned char>, std::vector<png_bytep>>>();
  auto& raw = buf->first;
  raw.resize(rowbytes * static_cast<std::size_t>(img.height));
  for (std::size_t i = 0; i < img.samples.size(); ++i) {
    if (bytes == 2) {
      std::memcpy(raw.data() + 2 * i, &img.samples[i], 2);
    } else {
      raw[i] = static_cast<unsigned char>(img.samples[i]);
    }
  }
  auto& rows = buf->second;
  rows.resize(static_cast<std::size_t>(img.height));
  for (int y = 0; y < img.height; ++y) rows[y] = raw.data() + rowbytes * y;

  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw InputError("PNG encode error in " + path.string() + ": " + err);
  }
  png_init_io(png, file.get());
  png_set_IHDR(png, info, static_cast<png_uint_32>(img.width), static_cast<png_uint_32>(img.height),
               img.bit_depth, img.channels == 1 ? PNG_COLOR_TYPE_GRAY : PNG_COLOR_TYPE_RGB,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  if (bytes == 2) png_set_swap(png);
  png_write_image(png, rows.data());
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

struct PngHeader {
  int width{0};
  int height{0};
  int bit_depth{0};
  int color_type{0};
};

/// Dimensions and sample format from the IHDR chunk only.
inline PngHeader png_header(const std::filesystem::path& path) {
  detail::FilePtr file(std::fopen(path.string().c_str(), "rb"));
  if (!file) throw LoadError("cannot open " + path.string());
  unsigned char head[26];
  if (std::fread(head, 1, 26, file.get()) != 26 || png_sig_cmp(head, 0, 8) != 0) {
    throw LoadError("not a PNG file: " + path.string());
  }
  auto be32 = [](const unsigned char* p) {
    return (static_cast<int>(p[0]) << 24) | (p[1] << 16) | (p[2] << 8) | p[3];
  };
  return {be32(head + 16), be32(head + 20), head[24], head[25]};
}

/// 16-bit single-channel depth in millimeters → meters.
inline DepthImage read_depth_png(const std::filesystem::path& path) {
  auto img = read_png(path);
  if (img.channels != 1 || img.bit_depth != 16) {
    throw LoadError("depth image must be 16-bit single-channel: " + path.string());
  }
  DepthImage d{img.width, img.height, {}};
  d.meters.resize(img.samples.size());
  for (std::size_t i = 0; i < img.samples.size(); ++i) {
    d.meters[i] = static_cast<float>(img.samples[i]) / 1000.0f;
  }
  return d;
}

inline void write_depth_png(const std::filesystem::path& path, const DepthImage& depth) {
  PngImage img{depth.width, depth.height, 1, 16, {}};
  img.samples.resize(depth.meters.size());
  for (std::size_t i = 0; i < depth.meters.size(); ++i) {
    const double mm = std::round(static_cast<double>(depth.meters[i]) * 1000.0);
    img.samples[i] = static_cast<std::uint16_t>(std::clamp(mm, 0.0, 65535.0));
  }
  write_png(path, img);
}

/// 8-bit single-channel mask, nonzero = member.
inline Mask2D read_mask_png(const std::filesystem::path& path) {
  auto img = read_png(path);
  if (img.channels != 1) throw LoadError("mask must be single-channel: " + path.string());
  std::vector<std::uint8_t> bits(img.samples.size());
  for (std::size_t i = 0; i < bits.size(); ++i) bits[i] = img.samples[i] != 0;
  return Mask2D(img.width, img.height, std::move(bits));
}

inline void write_mask_png(const std::filesystem::path& path, const Mask2D& mask) {
  PngImage img{mask.width(), mask.height(), 1, 8, {}};
  img.samples.resize(mask.area());
  for (std::size_t i = 0; i < mask.area(); ++i) img.samples[i] = mask.test(i) ? 255 : 0;
  write_png(path, img);
}

}  // namespace handover::geometry
