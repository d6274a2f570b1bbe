// Copyright 2026 The fomo Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "fomo/error.hpp"
#include "fomo/geometry.hpp"

namespace fomo {

/// Dense row-major W x H grid of values.
template <class T>
class Grid {
 public:
  Grid() = default;
  Grid(int width, int height, T fill = T{})
      : width_(width), height_(height),
        data_(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), fill) {
    if (width <= 0 || height <= 0) {
      throw Error(Errc::DimensionMismatch, "grid dimensions must be positive");
    }
  }

  int width() const { return width_; }
  int height() const { return height_; }
  std::size_t size() const { return data_.size(); }

  T& operator()(int i, int j) { return data_[index(i, j)]; }
  const T& operator()(int i, int j) const { return data_[index(i, j)]; }

  std::span<T> data() { return data_; }
  std::span<const T> data() const { return data_; }

  bool same_shape(int width, int height) const {
    return width_ == width && height_ == height;
  }
  friend bool operator==(const Grid&, const Grid&) = default;

 private:
  std::size_t index(int i, int j) const {
    return static_cast<std::size_t>(j) * static_cast<std::size_t>(width_) +
           static_cast<std::size_t>(i);
  }

  int width_ = 0;
  int height_ = 0;
  std::vector<T> data_;
};

/// Multi-channel float image, pixel-interleaved. Decoded images hold values in
/// [0,1]; feature maps may hold any finite value.
class Image {
 public:
  Image() = default;
  Image(int width, int height, int channels, double fill = 0.0)
      : width_(width), height_(height), channels_(channels),
        data_(static_cast<std::size_t>(width) * static_cast<std::size_t>(height) *
                  static_cast<std::size_t>(channels),
              fill) {
    if (width <= 0 || height <= 0 || channels <= 0) {
      throw Error(Errc::DimensionMismatch, "image dimensions must be positive");
    }
  }

  int width() const { return width_; }
  int height() const { return height_; }
  int channels() const { return channels_; }

  double& at(int i, int j, int c) { return data_[index(i, j, c)]; }
  double at(int i, int j, int c) const { return data_[index(i, j, c)]; }

  std::span<double> data() { return data_; }
  std::span<const double> data() const { return data_; }

  bool same_shape(const Image& o) const {
    return width_ == o.width_ && height_ == o.height_ && channels_ == o.channels_;
  }
  friend bool operator==(const Image&, const Image&) = default;

 private:
  std::size_t index(int i, int j, int c) const {
    return (static_cast<std::size_t>(j) * static_cast<std::size_t>(width_) +
            static_cast<std::size_t>(i)) *
               static_cast<std::size_t>(channels_) +
           static_cast<std::size_t>(c);
  }

  int width_ = 0;
  int height_ = 0;
  int channels_ = 0;
  std::vector<double> data_;
};

using RasterImage = Image;
using FeatureMap = Image;
using DenseFlow = Grid<Point2>;
using OcclusionMap = Grid<double>;

/// Flow that maps every pixel center to itself.
inline DenseFlow identity_flow(int width, int height) {
  DenseFlow flow(width, height);
  for (int j = 0; j < height; ++j) {
    for (int i = 0; i < width; ++i) flow(i, j) = pixel_center(i, j, width, height);
  }
  return flow;
}

inline std::string shape_string(int w, int h, int c = 1) {
  return std::to_string(w) + "x" + std::to_string(h) + "x" + std::to_string(c);
}

}  // namespace fomo
