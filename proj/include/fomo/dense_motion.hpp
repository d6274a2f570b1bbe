// Copyright 2026 The fomo Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "fomo/error.hpp"
#include "fomo/geometry.hpp"
#include "fomo/image.hpp"
#include "fomo/io/grid_files.hpp"
#include "fomo/local_motion.hpp"
#include "fomo/warping.hpp"

namespace fomo {

/// K channels, one per keypoint.
using HeatmapStack = std::vector<Grid<double>>;
/// K+1 channels; channel 0 is the static background.
using MaskStack = std::vector<Grid<double>>;

inline constexpr double kDefaultHeatmapSigma = 0.01;
inline constexpr int kDefaultFlowResolution = 64;

/// Parameters of the proximity softmax that stands in for a learned mask
/// predictor.
struct MaskPolicyConfig {
  double temperature = 0.01;
  double background_radius = 0.25;
};

/// Difference of Gaussians centered at the driving and source keypoints:
/// H_k(z) = exp(-|drv_k - z|^2 / sigma) - exp(-|src_k - z|^2 / sigma).
inline HeatmapStack heatmaps(const PairwiseLocalMotion& motion, int width, int height,
                             double sigma = kDefaultHeatmapSigma) {
  if (!(sigma > 0.0) || !std::isfinite(sigma)) {
    throw Error(Errc::InvalidSigma, "sigma must be a positive finite number");
  }
  HeatmapStack out;
  out.reserve(motion.size());
  for (std::size_t k = 0; k < motion.size(); ++k) {
    Grid<double> h(width, height);
    const Point2 drv = motion.drv_anchor(k);
    const Point2 src = motion.src_anchor(k);
    for (int j = 0; j < height; ++j) {
      for (int i = 0; i < width; ++i) {
        const Point2 z = pixel_center(i, j, width, height);
        h(i, j) = std::exp(-squared_norm(drv - z) / sigma) -
                  std::exp(-squared_norm(src - z) / sigma);
      }
    }
    out.push_back(std::move(h));
  }
  return out;
}

/// Softmax over K+1 scores per pixel: -|z - drv_k|^2 / tau for each keypoint
/// and the constant -rho^2 / tau for the background. A pixel belongs mostly to
/// the nearest keypoint when it lies within rho of it, to the background
/// otherwise.
inline MaskStack soft_masks(const PairwiseLocalMotion& motion, int width, int height,
                            const MaskPolicyConfig& cfg = {}) {
  if (!(cfg.temperature > 0.0) || !(cfg.background_radius > 0.0)) {
    throw Error(Errc::InvalidConfig, "mask temperature and background radius must be > 0");
  }
  const std::size_t kk = motion.size();
  MaskStack masks(kk + 1, Grid<double>(width, height));
  std::vector<double> scores(kk + 1);
  const double background =
      -cfg.background_radius * cfg.background_radius / cfg.temperature;
  for (int j = 0; j < height; ++j) {
    for (int i = 0; i < width; ++i) {
      const Point2 z = pixel_center(i, j, width, height);
      scores[0] = background;
      for (std::size_t k = 0; k < kk; ++k) {
        scores[k + 1] = -squared_norm(z - motion.drv_anchor(k)) / cfg.temperature;
      }
      const double top = *std::max_element(scores.begin(), scores.end());
      double sum = 0.0;
      for (double& s : scores) {
        s = std::exp(s - top);
        sum += s;
      }
      for (std::size_t k = 0; k <= kk; ++k) masks[k](i, j) = scores[k] / sum;
    }
  }
  return masks;
}

/// Blends the local approximations:
/// flow(z) = M_0(z) z + sum_k M_k(z) (src_k + J_k (z - drv_k)).
inline DenseFlow dense_flow(const PairwiseLocalMotion& motion, const MaskStack& masks,
                            int width, int height) {
  if (masks.size() != motion.size() + 1) {
    throw Error(Errc::DimensionMismatch, "expected " + std::to_string(motion.size() + 1) +
                                             " masks, got " + std::to_string(masks.size()));
  }
  for (const auto& m : masks) {
    if (!m.same_shape(width, height)) {
      throw Error(Errc::DimensionMismatch,
                  "mask is " + shape_string(m.width(), m.height()) + ", flow is " +
                      shape_string(width, height));
    }
  }
  DenseFlow flow(width, height);
  for (int j = 0; j < height; ++j) {
    for (int i = 0; i < width; ++i) {
      const Point2 z = pixel_center(i, j, width, height);
      Point2 acc = masks[0](i, j) * z;
      for (std::size_t k = 0; k < motion.size(); ++k) {
        acc += masks[k + 1](i, j) * motion.parts[k](z);
      }
      flow(i, j) = acc;
    }
  }
  return flow;
}

inline DenseFlow dense_flow(const PairwiseLocalMotion& motion, int width, int height,
                            const MaskPolicyConfig& cfg = {}) {
  return dense_flow(motion, soft_masks(motion, width, height, cfg), width, height);
}

/// S^k: the source back-warped by the k-th local affine alone. k = 0 is the
/// untouched source (background); k = 1..K select keypoints 0..K-1.
inline Image warp_source_by_keypoint(const Image& image, const PairwiseLocalMotion& motion,
                                     std::size_t k) {
  if (k > motion.size()) {
    throw Error(Errc::IndexOutOfRange, "warp index " + std::to_string(k) +
                                           " > K=" + std::to_string(motion.size()));
  }
  if (k == 0) return image;
  const LocalAffine& part = motion.parts[k - 1];
  const int w = image.width();
  const int h = image.height();
  DenseFlow flow(w, h);
  for (int j = 0; j < h; ++j) {
    for (int i = 0; i < w; ++i) flow(i, j) = part(pixel_center(i, j, w, h));
  }
  return backwarp(image, flow);
}

/// Loads an occlusion map (.pfm or .csv, one channel) or returns all ones.
inline OcclusionMap occlusion_from_file_or_default(
    const std::optional<std::filesystem::path>& path, int width, int height) {
  if (!path) return OcclusionMap(width, height, 1.0);
  const io::ChannelGrid g = io::read_grid(*path, Errc::MalformedOcclusionFile);
  if (g.channels != 1 || g.width != width || g.height != height) {
    throw Error(Errc::MalformedOcclusionFile,
                path->string() + " is " + shape_string(g.width, g.height, g.channels) +
                    ", expected " + shape_string(width, height, 1));
  }
  OcclusionMap map(width, height);
  for (int j = 0; j < height; ++j) {
    for (int i = 0; i < width; ++i) {
      const double v = g.at(i, j, 0);
      if (!(v >= 0.0 && v <= 1.0)) {
        throw Error(Errc::OutOfRangeValue, "occlusion value " + std::to_string(v) + " at (" +
                                               std::to_string(i) + "," + std::to_string(j) +
                                               ") outside [0,1]");
      }
      map(i, j) = v;
    }
  }
  return map;
}

/// Loads an externally computed (K+1)-channel mask stack. Each value must lie
/// in [0,1] and every pixel must sum to 1 within 1e-6 (files store float32).
inline MaskStack masks_from_file(const std::filesystem::path& path, std::size_t keypoints,
                                 int width, int height) {
  const io::ChannelGrid g = io::read_grid(path, Errc::MalformedOcclusionFile);
  if (g.channels != static_cast<int>(keypoints) + 1 || g.width != width || g.height != height) {
    throw Error(Errc::MalformedOcclusionFile,
                path.string() + " is " + shape_string(g.width, g.height, g.channels) +
                    ", expected " + shape_string(width, height, static_cast<int>(keypoints) + 1));
  }
  MaskStack masks = io::to_channel_stack(g);
  for (int j = 0; j < height; ++j) {
    for (int i = 0; i < width; ++i) {
      double sum = 0.0;
      for (const auto& m : masks) {
        const double v = m(i, j);
        if (!(v >= 0.0 && v <= 1.0)) {
          throw Error(Errc::OutOfRangeValue, "mask value outside [0,1] in " + path.string());
        }
        sum += v;
      }
      if (std::abs(sum - 1.0) > 1e-6) {
        throw Error(Errc::OutOfRangeValue, "masks do not sum to 1 at (" + std::to_string(i) +
                                               "," + std::to_string(j) + ")");
      }
    }
  }
  return masks;
}

}  // namespace fomo
