// Copyright 2026 The fomo Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "fomo/error.hpp"
#include "fomo/geometry.hpp"
#include "fomo/image.hpp"
#include "fomo/random.hpp"
#include "fomo/warping.hpp"

namespace fomo {

/// Thin plate spline on the normalized canvas:
///   T(p) = A [p; 1] + sum_i w_i U(|p - c_i|),  U(r) = r^2 log(r^2), U(0) = 0.
///
/// This kernel is twice the textbook r^2 log r; the factor lives in the weights.
struct TpsTransform {
  // Rows map to output x and y: out.x = affine[0][0] x + affine[0][1] y + affine[0][2].
  std::array<std::array<double, 3>, 2> affine{{{1.0, 0.0, 0.0}, {0.0, 1.0, 0.0}}};
  std::vector<Point2> control_points;
  std::vector<Point2> weights;

  Mat2 linear() const { return {affine[0][0], affine[0][1], affine[1][0], affine[1][1]}; }
  Point2 offset() const { return {affine[0][2], affine[1][2]}; }

  static TpsTransform identity() { return {}; }
  static TpsTransform from_affine(const Mat2& a, Point2 b) {
    TpsTransform t;
    t.affine = {{{a.a11, a.a12, b.x}, {a.a21, a.a22, b.y}}};
    return t;
  }
};

/// Throws MalformedTransform when the parts disagree or are not finite.
inline void validate(const TpsTransform& t) {
  if (t.control_points.size() != t.weights.size()) {
    throw Error(Errc::MalformedTransform, "control point and weight counts differ");
  }
  for (const auto& row : t.affine) {
    for (double v : row) {
      if (!std::isfinite(v)) throw Error(Errc::MalformedTransform, "non-finite affine entry");
    }
  }
  for (std::size_t i = 0; i < t.control_points.size(); ++i) {
    if (!is_finite(t.control_points[i]) || !is_finite(t.weights[i])) {
      throw Error(Errc::MalformedTransform, "non-finite control point or weight");
    }
    for (std::size_t j = 0; j < i; ++j) {
      if (t.control_points[i] == t.control_points[j]) {
        throw Error(Errc::MalformedTransform,
                    "duplicate control point " + std::to_string(i));
      }
    }
  }
}

/// Sampling recipe for random deformations. Variances are variances, not
/// standard deviations.
struct TpsSampleConfig {
  double deform_variance = 0.005;
  double affine_variance = 0.05;
  int grid = 5;
  std::uint64_t seed = 0;
};

/// n x n control points spaced uniformly over [-1,1]^2, row by row.
inline std::vector<Point2> uniform_control_grid(int n) {
  std::vector<Point2> pts;
  if (n == 1) return {Point2{0.0, 0.0}};
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      pts.push_back({-1.0 + 2.0 * i / (n - 1), -1.0 + 2.0 * j / (n - 1)});
    }
  }
  return pts;
}

/// Random spline. Draw order from a NormalStream seeded with cfg.seed: the six
/// affine perturbations row-major, then (wx, wy) per control point.
inline TpsTransform tps_sample(const TpsSampleConfig& cfg) {
  if (!(cfg.deform_variance >= 0.0) || !(cfg.affine_variance >= 0.0) || cfg.grid < 1) {
    throw Error(Errc::InvalidConfig, "TPS variances must be >= 0 and grid >= 1");
  }
  NormalStream rng(cfg.seed);
  const double affine_std = std::sqrt(cfg.affine_variance);
  const double deform_std = std::sqrt(cfg.deform_variance);
  TpsTransform t;
  for (auto& row : t.affine) {
    for (double& v : row) v += affine_std * rng.next();
  }
  t.control_points = uniform_control_grid(cfg.grid);
  t.weights.reserve(t.control_points.size());
  for (std::size_t i = 0; i < t.control_points.size(); ++i) {
    const double wx = deform_std * rng.next();
    const double wy = deform_std * rng.next();
    t.weights.push_back({wx, wy});
  }
  return t;
}

/// U as a function of the squared radius.
inline double tps_kernel(double r2) { return r2 > 0.0 ? r2 * std::log(r2) : 0.0; }

inline Point2 tps_eval(const TpsTransform& t, Point2 p) {
  Point2 out = t.linear() * p + t.offset();
  for (std::size_t i = 0; i < t.control_points.size(); ++i) {
    out += tps_kernel(squared_norm(p - t.control_points[i])) * t.weights[i];
  }
  return out;
}

/// Analytic Jacobian. dU/dp = 2 (log r^2 + 1)(p - c), taken as 0 at p = c.
inline Mat2 tps_jacobian(const TpsTransform& t, Point2 p) {
  Mat2 jac = t.linear();
  for (std::size_t i = 0; i < t.control_points.size(); ++i) {
    const Point2 d = p - t.control_points[i];
    const double r2 = squared_norm(d);
    if (r2 == 0.0) continue;
    const double g = 2.0 * (std::log(r2) + 1.0);
    const Point2 w = t.weights[i];
    jac = jac + Mat2{w.x * g * d.x, w.x * g * d.y, w.y * g * d.x, w.y * g * d.y};
  }
  return jac;
}

/// Backward warp: out(z) = image(T(z)). With T = T_{X<-Y} and X the input,
/// the output is the deformed image Y.
inline Image tps_warp_image(const Image& image, const TpsTransform& t) {
  const int w = image.width();
  const int h = image.height();
  DenseFlow flow(w, h);
  for (int j = 0; j < h; ++j) {
    for (int i = 0; i < w; ++i) flow(i, j) = tps_eval(t, pixel_center(i, j, w, h));
  }
  return backwarp(image, flow);
}

}  // namespace fomo
