// Copyright 2026 The fomo Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <optional>
#include <utility>
#include <vector>

#include "fomo/error.hpp"
#include "fomo/geometry.hpp"
#include "fomo/image.hpp"
#include "fomo/local_motion.hpp"
#include "fomo/tps.hpp"

namespace fomo {

enum class SceneTransformKind { identity, affine, rotation, tps };
enum class ScenePattern { checkerboard, gaussian_blobs, ramp };

/// A synthetic scene with a known global transform T = T_{D<-S}. The source
/// frame doubles as the reference frame, so the true backward flow is T^-1.
struct SceneSpec {
  SceneTransformKind kind = SceneTransformKind::identity;
  Mat2 linear = Mat2::identity();  // affine
  Point2 offset;                   // affine
  double theta = 0.0;              // rotation, radians
  Point2 center;                   // rotation
  TpsSampleConfig tps;             // tps
  std::vector<Point2> keypoints{{0.0, 0.0}};
  ScenePattern pattern = ScenePattern::checkerboard;
  int width = 64;
  int height = 64;
  int checker_cells = 8;
  double blob_sigma = 0.1;
};

/// Keypoints on a cols x rows lattice inset from the canvas border by half a cell.
inline std::vector<Point2> grid_layout(int cols, int rows) {
  std::vector<Point2> pts;
  for (int j = 0; j < rows; ++j) {
    for (int i = 0; i < cols; ++i) pts.push_back(pixel_center(i, j, cols, rows));
  }
  return pts;
}

inline void validate(const SceneSpec& spec) {
  if (spec.keypoints.empty()) throw Error(Errc::MalformedScene, "scene needs at least one keypoint");
  for (const Point2& p : spec.keypoints) {
    if (!is_finite(p) || std::abs(p.x) > 1.0 || std::abs(p.y) > 1.0) {
      throw Error(Errc::MalformedScene, "keypoints must lie in [-1,1]^2");
    }
  }
  if (spec.width < 8 || spec.height < 8) {
    throw Error(Errc::MalformedScene, "scene resolution must be at least 8x8");
  }
  if (spec.kind == SceneTransformKind::affine && !(std::abs(spec.linear.det()) > kSingularDet)) {
    throw Error(Errc::MalformedScene, "affine scene transform is singular");
  }
}

/// The scene transform as a spline; affine kinds have no kernel terms.
inline TpsTransform scene_transform(const SceneSpec& spec) {
  switch (spec.kind) {
    case SceneTransformKind::identity:
      return TpsTransform::identity();
    case SceneTransformKind::affine:
      return TpsTransform::from_affine(spec.linear, spec.offset);
    case SceneTransformKind::rotation: {
      const Mat2 r = Mat2::rotation(spec.theta);
      return TpsTransform::from_affine(r, spec.center - r * spec.center);
    }
    case SceneTransformKind::tps:
      return tps_sample(spec.tps);
  }
  return TpsTransform::identity();
}

/// Preimage of z under a scene transform. Affine maps invert in closed form.
/// Sampled splines often fold, so there is no global inverse; the preimage is
/// taken on the branch through (seed, t(seed)) by walking from t(seed) to z in
/// small steps, each solved by Newton from the previous answer. Returns nullopt
/// when the walk reaches a fold (Jacobian sign change or singularity) or fails
/// to converge.
inline std::optional<Point2> invert_point(const TpsTransform& t, Point2 z, Point2 seed = {}) {
  if (t.control_points.empty()) return invert(t.linear()) * (z - t.offset());
  constexpr int kSteps = 16;
  const Point2 start = tps_eval(t, seed);
  const double sign = tps_jacobian(t, seed).det();
  if (!(std::abs(sign) > kSingularDet)) return std::nullopt;
  Point2 p = seed;
  for (int s = 1; s <= kSteps; ++s) {
    const Point2 target = start + (static_cast<double>(s) / kSteps) * (z - start);
    bool converged = false;
    for (int it = 0; it < 50; ++it) {
      const Mat2 jac = tps_jacobian(t, p);
      const double det = jac.det();
      if (!(std::abs(det) > kSingularDet) || (det > 0.0) != (sign > 0.0)) return std::nullopt;
      const Point2 step = invert(jac) * (tps_eval(t, p) - target);
      p = p - step;
      if (norm(step) < 1e-15 || norm(tps_eval(t, p) - target) < 1e-15) {
        converged = true;
        break;
      }
    }
    if (!converged && norm(tps_eval(t, p) - target) > 1e-12) return std::nullopt;
  }
  if ((tps_jacobian(t, p).det() > 0.0) != (sign > 0.0)) return std::nullopt;
  return p;
}

/// Analytic descriptors: source (p_k, 1), driving (T(p_k), dT(p_k)).
inline std::pair<FrameDescriptor, FrameDescriptor> ideal_descriptors(const SceneSpec& spec) {
  validate(spec);
  const TpsTransform t = scene_transform(spec);
  FrameDescriptor source;
  FrameDescriptor driving;
  for (const Point2& p : spec.keypoints) {
    source.keypoints.push_back({p, Mat2::identity()});
    driving.keypoints.push_back({tps_eval(t, p), tps_jacobian(t, p)});
  }
  return {std::move(source), std::move(driving)};
}

struct ProfileRow {
  double radius = 0.0;
  double mean_error = 0.0;
  double max_error = 0.0;
  std::size_t samples = 0;
  // Ring points dropped because the true inverse ran into a fold.
  std::size_t unresolved = 0;
};

inline constexpr int kProfileRingSamples = 360;

/// Error of the local approximation against the true backward flow on rings
/// of `kProfileRingSamples` points around each driving keypoint. A ring point
/// counts only for the keypoint nearest to it and is evaluated with that
/// keypoint's local affine. The true backward flow is the inverse branch
/// through the keypoint's source position; points past a fold of that branch
/// are counted as unresolved. Rows without samples report NaN.
inline std::vector<ProfileRow> flow_error_profile(const SceneSpec& spec, MotionOrder order,
                                                  const std::vector<double>& radii) {
  const auto [source, driving] = ideal_descriptors(spec);
  const TpsTransform t = scene_transform(spec);
  const PairwiseLocalMotion motion = pairwise_motion(source, driving, order);
  std::vector<ProfileRow> rows;
  for (double r : radii) {
    ProfileRow row{r, 0.0, 0.0, 0, 0};
    double sum = 0.0;
    for (std::size_t k = 0; k < motion.size(); ++k) {
      const Point2 anchor = motion.drv_anchor(k);
      for (int a = 0; a < kProfileRingSamples; ++a) {
        const double phi = 2.0 * std::numbers::pi * a / kProfileRingSamples;
        const Point2 z = anchor + r * Point2{std::cos(phi), std::sin(phi)};
        const double own = norm(z - anchor);
        bool nearest = true;
        for (std::size_t m = 0; m < motion.size() && nearest; ++m) {
          if (m != k && norm(z - motion.drv_anchor(m)) < own - 1e-12) nearest = false;
        }
        if (!nearest) continue;
        const auto truth = invert_point(t, z, source[k].position);
        if (!truth) {
          ++row.unresolved;
          continue;
        }
        const double err = norm(motion.parts[k](z) - *truth);
        sum += err;
        row.max_error = std::max(row.max_error, err);
        ++row.samples;
      }
    }
    if (row.samples == 0) {
      row.mean_error = row.max_error = std::numeric_limits<double>::quiet_NaN();
    } else {
      row.mean_error = sum / static_cast<double>(row.samples);
    }
    rows.push_back(row);
  }
  return rows;
}

/// Deterministic single-channel test image.
inline Image render_pattern(const SceneSpec& spec) {
  validate(spec);
  const int w = spec.width;
  const int h = spec.height;
  Image img(w, h, 1);
  for (int j = 0; j < h; ++j) {
    for (int i = 0; i < w; ++i) {
      double v = 0.0;
      switch (spec.pattern) {
        case ScenePattern::checkerboard:
          v = ((i * spec.checker_cells / w) + (j * spec.checker_cells / h)) % 2;
          break;
        case ScenePattern::ramp:
          v = static_cast<double>(i) / static_cast<double>(w - 1);
          break;
        case ScenePattern::gaussian_blobs: {
          const Point2 z = pixel_center(i, j, w, h);
          const double s2 = 2.0 * spec.blob_sigma * spec.blob_sigma;
          for (const Point2& p : spec.keypoints) v = std::max(v, std::exp(-squared_norm(z - p) / s2));
          break;
        }
      }
      img.at(i, j, 0) = v;
    }
  }
  return img;
}

}  // namespace fomo
