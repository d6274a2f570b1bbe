// Copyright 2026 The fomo Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "fomo/error.hpp"
#include "fomo/geometry.hpp"
#include "fomo/image.hpp"

namespace fomo {

// Sample positions within this many pixels of a pixel center snap onto it, so
// warps by exact-on-paper identity or integer shifts reproduce pixels bit-exactly.
inline constexpr double kPixelSnap = 1e-9;

namespace detail {

struct AxisWeights {
  int lo;
  double frac;
};

inline AxisWeights axis_weights(double coord, int extent) {
  const double u = to_pixel(coord, extent);
  double lo = std::floor(u);
  double frac = u - lo;
  if (frac < kPixelSnap) {
    frac = 0.0;
  } else if (frac > 1.0 - kPixelSnap) {
    lo += 1.0;
    frac = 0.0;
  }
  // Far off-canvas samples are all padding; keep the index representable.
  if (lo < -2.0) lo = -2.0;
  if (lo > extent + 1.0) lo = extent + 1.0;
  return {static_cast<int>(lo), frac};
}

}  // namespace detail

/// Bilinear sample with zero padding: neighbors outside the canvas contribute
/// zero. Writes one value per channel into `out`. The result is bounded by the
/// four neighbor values (padding counts as 0) and reproduces a pixel exactly
/// at its center.
inline void bilinear_sample(const Image& features, Point2 at, std::span<double> out) {
  const int w = features.width();
  const int h = features.height();
  const auto ax = detail::axis_weights(at.x, w);
  const auto ay = detail::axis_weights(at.y, h);
  const auto value = [&](int i, int j, int c) {
    return (i >= 0 && i < w && j >= 0 && j < h) ? features.at(i, j, c) : 0.0;
  };
  for (int c = 0; c < features.channels(); ++c) {
    const double top = std::lerp(value(ax.lo, ay.lo, c), value(ax.lo + 1, ay.lo, c), ax.frac);
    if (ay.frac == 0.0) {
      out[static_cast<std::size_t>(c)] = top;
      continue;
    }
    const double bottom =
        std::lerp(value(ax.lo, ay.lo + 1, c), value(ax.lo + 1, ay.lo + 1, c), ax.frac);
    out[static_cast<std::size_t>(c)] = std::lerp(top, bottom, ay.frac);
  }
}

inline std::vector<double> bilinear_sample(const Image& features, Point2 at) {
  std::vector<double> out(static_cast<std::size_t>(features.channels()));
  bilinear_sample(features, at, out);
  return out;
}

/// Back-warping: out(z) = occlusion(z) * features(flow(z)).
inline FeatureMap backwarp(const FeatureMap& features, const DenseFlow& flow,
                           const OcclusionMap& occlusion) {
  const int w = features.width();
  const int h = features.height();
  if (!flow.same_shape(w, h) || !occlusion.same_shape(w, h)) {
    throw Error(Errc::DimensionMismatch,
                "features " + shape_string(w, h) + ", flow " +
                    shape_string(flow.width(), flow.height()) + ", occlusion " +
                    shape_string(occlusion.width(), occlusion.height()));
  }
  const int channels = features.channels();
  FeatureMap out(w, h, channels);
  std::vector<double> sample(static_cast<std::size_t>(channels));
  for (int j = 0; j < h; ++j) {
    for (int i = 0; i < w; ++i) {
      bilinear_sample(features, flow(i, j), sample);
      const double o = occlusion(i, j);
      for (int c = 0; c < channels; ++c) out.at(i, j, c) = o * sample[static_cast<std::size_t>(c)];
    }
  }
  return out;
}

inline FeatureMap backwarp(const FeatureMap& features, const DenseFlow& flow) {
  return backwarp(features, flow, OcclusionMap(features.width(), features.height(), 1.0));
}

/// Resamples a flow field to a new resolution. Interpolation is linear between
/// pixel centers and extrapolates linearly past the outermost centers, so affine
/// flows survive resampling exactly up to rounding.
inline DenseFlow resample_flow(const DenseFlow& flow, int width, int height) {
  if (flow.same_shape(width, height)) return flow;
  const auto axis = [](double coord, int extent) -> detail::AxisWeights {
    if (extent == 1) return {0, 0.0};
    const double u = to_pixel(coord, extent);
    double lo = std::floor(u);
    if (lo < 0.0) lo = 0.0;
    if (lo > extent - 2.0) lo = extent - 2.0;
    return {static_cast<int>(lo), u - lo};
  };
  DenseFlow out(width, height);
  for (int j = 0; j < height; ++j) {
    const auto ay = axis(pixel_center(j, height), flow.height());
    const int j1 = flow.height() == 1 ? ay.lo : ay.lo + 1;
    for (int i = 0; i < width; ++i) {
      const auto ax = axis(pixel_center(i, width), flow.width());
      const int i1 = flow.width() == 1 ? ax.lo : ax.lo + 1;
      const Point2 top = flow(ax.lo, ay.lo) + ax.frac * (flow(i1, ay.lo) - flow(ax.lo, ay.lo));
      const Point2 bottom = flow(ax.lo, j1) + ax.frac * (flow(i1, j1) - flow(ax.lo, j1));
      out(i, j) = top + ay.frac * (bottom - top);
    }
  }
  return out;
}

/// Resamples a scalar map bilinearly, clamping to the edge values.
inline Grid<double> resample_map(const Grid<double>& map, int width, int height) {
  if (map.same_shape(width, height)) return map;
  const auto axis = [](double coord, int extent) -> detail::AxisWeights {
    double u = to_pixel(coord, extent);
    if (u < 0.0) u = 0.0;
    if (u > extent - 1.0) u = extent - 1.0;
    double lo = std::floor(u);
    if (lo > extent - 2.0) lo = std::max(0.0, extent - 2.0);
    return {static_cast<int>(lo), u - lo};
  };
  Grid<double> out(width, height);
  for (int j = 0; j < height; ++j) {
    const auto ay = axis(pixel_center(j, height), map.height());
    const int j1 = std::min(ay.lo + 1, map.height() - 1);
    for (int i = 0; i < width; ++i) {
      const auto ax = axis(pixel_center(i, width), map.width());
      const int i1 = std::min(ax.lo + 1, map.width() - 1);
      const double top = std::lerp(map(ax.lo, ay.lo), map(i1, ay.lo), ax.frac);
      const double bottom = std::lerp(map(ax.lo, j1), map(i1, j1), ax.frac);
      out(i, j) = std::lerp(top, bottom, ay.frac);
    }
  }
  return out;
}

struct Size {
  int width = 0;
  int height = 0;
  friend bool operator==(Size, Size) = default;
};

/// 256, 128, 64 and 32 pixels square.
inline std::vector<Size> default_pyramid_levels() {
  return {{256, 256}, {128, 128}, {64, 64}, {32, 32}};
}

/// 2x2 box-filter halving.
inline Image downsample2(const Image& image) {
  const int w = image.width() / 2;
  const int h = image.height() / 2;
  Image out(w, h, image.channels());
  for (int j = 0; j < h; ++j) {
    for (int i = 0; i < w; ++i) {
      for (int c = 0; c < image.channels(); ++c) {
        out.at(i, j, c) = 0.25 * (image.at(2 * i, 2 * j, c) + image.at(2 * i + 1, 2 * j, c) +
                                  image.at(2 * i, 2 * j + 1, c) +
                                  image.at(2 * i + 1, 2 * j + 1, c));
      }
    }
  }
  return out;
}

/// Builds the pyramid `levels` describes. The first level must match the image
/// and every following level must halve both sides of the previous one.
inline std::vector<Image> pyramid(const Image& image, std::span<const Size> levels) {
  if (levels.empty()) throw Error(Errc::InvalidPyramidSpec, "no pyramid levels");
  if (levels.front() != Size{image.width(), image.height()}) {
    throw Error(Errc::InvalidPyramidSpec,
                "first level " + shape_string(levels.front().width, levels.front().height) +
                    " does not match image " + shape_string(image.width(), image.height()));
  }
  std::vector<Image> out;
  out.reserve(levels.size());
  out.push_back(image);
  for (std::size_t l = 1; l < levels.size(); ++l) {
    const Size prev = levels[l - 1];
    const Size cur = levels[l];
    if (prev.width % 2 != 0 || prev.height % 2 != 0 || cur.width * 2 != prev.width ||
        cur.height * 2 != prev.height) {
      throw Error(Errc::InvalidPyramidSpec,
                  "level " + std::to_string(l) + " must halve the previous level");
    }
    out.push_back(downsample2(out.back()));
  }
  return out;
}

inline double mean_abs_difference(const Image& a, const Image& b) {
  if (!a.same_shape(b)) throw Error(Errc::DimensionMismatch, "images differ in shape");
  double sum = 0.0;
  const auto da = a.data();
  const auto db = b.data();
  for (std::size_t n = 0; n < da.size(); ++n) sum += std::abs(da[n] - db[n]);
  return sum / static_cast<double>(da.size());
}

struct PyramidDistance {
  std::vector<double> levels;
  double total = 0.0;
};

/// Multi-resolution L1 distance: mean |a - b| at every pyramid level, summed.
inline PyramidDistance pyramid_l1(const Image& a, const Image& b, std::span<const Size> levels) {
  if (!a.same_shape(b)) {
    throw Error(Errc::DimensionMismatch,
                shape_string(a.width(), a.height(), a.channels()) + " vs " +
                    shape_string(b.width(), b.height(), b.channels()));
  }
  const auto pa = pyramid(a, levels);
  const auto pb = pyramid(b, levels);
  PyramidDistance d;
  for (std::size_t l = 0; l < pa.size(); ++l) {
    d.levels.push_back(mean_abs_difference(pa[l], pb[l]));
    d.total += d.levels.back();
  }
  return d;
}

}  // namespace fomo
