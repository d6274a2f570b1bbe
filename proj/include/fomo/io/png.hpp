// Copyright 2026 The fomo Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <png.h>

#include <cmath>
#include <filesystem>
#include <string>
#include <vector>

#include "fomo/error.hpp"
#include "fomo/image.hpp"

namespace fomo::io {

/// [0,1] float to 8-bit, rounding half up and clamping.
inline unsigned char quantize(double v) {
  const double q = std::floor(v * 255.0 + 0.5);
  if (!(q > 0.0)) return 0;
  if (q > 255.0) return 255;
  return static_cast<unsigned char>(q);
}

namespace detail {

struct PngImage {
  png_image image{};
  PngImage() { image.version = PNG_IMAGE_VERSION; }
  ~PngImage() { png_image_free(&image); }
  PngImage(const PngImage&) = delete;
  PngImage& operator=(const PngImage&) = delete;
};

inline int channel_count(png_uint_32 format) {
  return ((format & PNG_FORMAT_FLAG_COLOR) ? 3 : 1) + ((format & PNG_FORMAT_FLAG_ALPHA) ? 1 : 0);
}

}  // namespace detail

/// Decodes a PNG into 1-4 channels in [0,1]: gray, gray+alpha, RGB or RGBA,
/// following the file's own color type. Palette images become RGB(A).
inline Image read_png(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) {
    throw Error(Errc::FileNotFound, "no such file: " + path.string());
  }
  detail::PngImage png;
  if (!png_image_begin_read_from_file(&png.image, path.string().c_str())) {
    throw Error(Errc::IoFailure, path.string() + ": " + png.image.message);
  }
  png_uint_32 format = png.image.format & (PNG_FORMAT_FLAG_COLOR | PNG_FORMAT_FLAG_ALPHA);
  png.image.format = format;
  const int channels = detail::channel_count(format);
  const int w = static_cast<int>(png.image.width);
  const int h = static_cast<int>(png.image.height);
  std::vector<unsigned char> buf(PNG_IMAGE_SIZE(png.image));
  if (!png_image_finish_read(&png.image, nullptr, buf.data(), 0, nullptr)) {
    throw Error(Errc::IoFailure, path.string() + ": " + png.image.message);
  }
  Image img(w, h, channels);
  for (std::size_t n = 0; n < buf.size(); ++n) img.data()[n] = buf[n] / 255.0;
  return img;
}

/// Encodes 1-4 channels as gray, gray+alpha, RGB or RGBA.
inline void write_png(const std::filesystem::path& path, const Image& img) {
  static constexpr png_uint_32 kFormats[] = {PNG_FORMAT_GRAY, PNG_FORMAT_GA, PNG_FORMAT_RGB,
                                             PNG_FORMAT_RGBA};
  if (img.channels() < 1 || img.channels() > 4) {
    throw Error(Errc::IoFailure, "PNG supports 1 to 4 channels");
  }
  std::vector<unsigned char> buf(img.data().size());
  for (std::size_t n = 0; n < buf.size(); ++n) buf[n] = quantize(img.data()[n]);
  detail::PngImage png;
  png.image.width = static_cast<png_uint_32>(img.width());
  png.image.height = static_cast<png_uint_32>(img.height());
  png.image.format = kFormats[img.channels() - 1];
  if (!png_image_write_to_file(&png.image, path.string().c_str(), 0, buf.data(), 0, nullptr)) {
    throw Error(Errc::IoFailure, path.string() + ": " + png.image.message);
  }
}

}  // namespace fomo::io
