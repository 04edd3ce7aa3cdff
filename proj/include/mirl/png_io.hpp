// SPDX-License-Identifier: Apache-2.0
//
// Thin libpng wrapper for 8-bit RGB images. Anything that is not exactly
// 8-bit RGB is rejected; tensors map to [0,1] by dividing by 255.
#pragma once

#include <png.h>

#include <cstdio>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "mirl/tensor.hpp"

namespace mirl {

struct PngImage {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> rgb;  // 3 bytes per pixel, row-major
};

namespace detail {

struct PngReader {
  png_structp png = nullptr;
  png_infop info = nullptr;
  std::FILE* fp = nullptr;
  ~PngReader() {
    if (png) png_destroy_read_struct(&png, info ? &info : nullptr, nullptr);
    if (fp) std::fclose(fp);
  }
};

struct PngWriter {
  png_structp png = nullptr;
  png_infop info = nullptr;
  std::FILE* fp = nullptr;
  ~PngWriter() {
    if (png) png_destroy_write_struct(&png, info ? &info : nullptr);
    if (fp) std::fclose(fp);
  }
};

}  // namespace detail

inline PngImage read_png_rgb8(const std::filesystem::path& path) {
  detail::PngReader r;
  r.fp = std::fopen(path.string().c_str(), "rb");
  if (!r.fp) throw std::runtime_error("cannot open " + path.string());
  r.png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!r.png) throw std::runtime_error("libpng init failed");
  r.info = png_create_info_struct(r.png);
  if (!r.info) throw std::runtime_error("libpng info init failed");
  if (setjmp(png_jmpbuf(r.png))) throw std::runtime_error("failed to decode " + path.string());

  png_init_io(r.png, r.fp);
  png_read_info(r.png, r.info);
  const png_uint_32 w = png_get_image_width(r.png, r.info);
  const png_uint_32 h = png_get_image_height(r.png, r.info);
  const int depth = png_get_bit_depth(r.png, r.info);
  const int color = png_get_color_type(r.png, r.info);
  if (depth != 8 || color != PNG_COLOR_TYPE_RGB)
    throw std::runtime_error(path.string() + " is not an 8-bit RGB PNG");

  PngImage img;
  img.width = static_cast<int>(w);
  img.height = static_cast<int>(h);
  img.rgb.resize(static_cast<std::size_t>(w) * h * 3);
  std::vector<png_bytep> rows(h);
  for (png_uint_32 y = 0; y < h; ++y) rows[y] = img.rgb.data() + static_cast<std::size_t>(y) * w * 3;
  png_read_image(r.png, rows.data());
  return img;
}

inline void write_png_rgb8(const std::filesystem::path& path, const PngImage& img) {
  require(static_cast<std::size_t>(img.width) * img.height * 3 == img.rgb.size(), "png buffer size mismatch");
  detail::PngWriter w;
  w.fp = std::fopen(path.string().c_str(), "wb");
  if (!w.fp) throw std::runtime_error("cannot write " + path.string());
  w.png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!w.png) throw std::runtime_error("libpng init failed");
  w.info = png_create_info_struct(w.png);
  if (!w.info) throw std::runtime_error("libpng info init failed");
  if (setjmp(png_jmpbuf(w.png))) throw std::runtime_error("failed to encode " + path.string());

  png_init_io(w.png, w.fp);
  png_set_IHDR(w.png, w.info, static_cast<png_uint_32>(img.width), static_cast<png_uint_32>(img.height), 8,
               PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(w.png, w.info);
  std::vector<png_bytep> rows(static_cast<std::size_t>(img.height));
  for (int y = 0; y < img.height; ++y)
    rows[static_cast<std::size_t>(y)] = const_cast<png_bytep>(img.rgb.data() + static_cast<std::size_t>(y) * img.width * 3);
  png_write_image(w.png, rows.data());
  png_write_end(w.png, nullptr);
}

inline Tensor<float> png_to_tensor(const PngImage& img) {
  Tensor<float> t({img.height, img.width, 3});
  for (std::size_t i = 0; i < img.rgb.size(); ++i) t.values[i] = static_cast<float>(img.rgb[i]) / 255.0f;
  return t;
}

inline PngImage tensor_to_png(const Tensor<float>& t) {
  require(t.rank() == 3 && t.dim(2) == 3, "tensor_to_png: need an [H,W,3] tensor");
  PngImage img;
  img.height = t.dim(0);
  img.width = t.dim(1);
  img.rgb.resize(t.size());
  for (std::size_t i = 0; i < t.size(); ++i) {
    const float v = t.values[i] < 0.0f ? 0.0f : (t.values[i] > 1.0f ? 1.0f : t.values[i]);
    img.rgb[i] = static_cast<std::uint8_t>(std::lround(v * 255.0f));
  }
  return img;
}

inline void save_image_png(const std::filesystem::path& path, const Tensor<float>& t) {
  write_png_rgb8(path, tensor_to_png(t));
}

inline Tensor<float> load_image_png(const std::filesystem::path& path) { return png_to_tensor(read_png_rgb8(path)); }

}  // namespace mirl
