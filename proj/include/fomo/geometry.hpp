// Copyright 2026 The fomo Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "fomo/error.hpp"

namespace fomo {

// Determinant magnitude at or below which a Jacobian is treated as singular.
inline constexpr double kSingularDet = 1e-12;

/// A location on the normalized canvas [-1,1]^2. x grows to the right
/// (columns), y grows downward (rows).
struct Point2 {
  double x = 0.0;
  double y = 0.0;

  friend constexpr Point2 operator+(Point2 a, Point2 b) { return {a.x + b.x, a.y + b.y}; }
  friend constexpr Point2 operator-(Point2 a, Point2 b) { return {a.x - b.x, a.y - b.y}; }
  friend constexpr Point2 operator*(double s, Point2 p) { return {s * p.x, s * p.y}; }
  friend constexpr bool operator==(Point2 a, Point2 b) = default;

  Point2& operator+=(Point2 o) {
    x += o.x;
    y += o.y;
    return *this;
  }
};

inline double dot(Point2 a, Point2 b) { return a.x * b.x + a.y * b.y; }
inline double squared_norm(Point2 p) { return dot(p, p); }
inline double norm(Point2 p) { return std::sqrt(squared_norm(p)); }
inline double l1_norm(Point2 p) { return std::abs(p.x) + std::abs(p.y); }
inline bool is_finite(Point2 p) { return std::isfinite(p.x) && std::isfinite(p.y); }

/// Row-major 2x2 matrix [[a11, a12], [a21, a22]].
struct Mat2 {
  double a11 = 1.0;
  double a12 = 0.0;
  double a21 = 0.0;
  double a22 = 1.0;

  static constexpr Mat2 identity() { return {1.0, 0.0, 0.0, 1.0}; }
  static constexpr Mat2 zero() { return {0.0, 0.0, 0.0, 0.0}; }
  static Mat2 rotation(double theta) {
    const double c = std::cos(theta);
    const double s = std::sin(theta);
    return {c, -s, s, c};
  }

  constexpr double det() const { return a11 * a22 - a12 * a21; }

  friend constexpr Mat2 operator*(const Mat2& a, const Mat2& b) {
    return {a.a11 * b.a11 + a.a12 * b.a21, a.a11 * b.a12 + a.a12 * b.a22,
            a.a21 * b.a11 + a.a22 * b.a21, a.a21 * b.a12 + a.a22 * b.a22};
  }
  friend constexpr Point2 operator*(const Mat2& m, Point2 p) {
    return {m.a11 * p.x + m.a12 * p.y, m.a21 * p.x + m.a22 * p.y};
  }
  friend constexpr Mat2 operator*(double s, const Mat2& m) {
    return {s * m.a11, s * m.a12, s * m.a21, s * m.a22};
  }
  friend constexpr Mat2 operator+(const Mat2& a, const Mat2& b) {
    return {a.a11 + b.a11, a.a12 + b.a12, a.a21 + b.a21, a.a22 + b.a22};
  }
  friend constexpr Mat2 operator-(const Mat2& a, const Mat2& b) {
    return {a.a11 - b.a11, a.a12 - b.a12, a.a21 - b.a21, a.a22 - b.a22};
  }
  friend constexpr bool operator==(const Mat2&, const Mat2&) = default;
};

inline double max_abs(const Mat2& m) {
  return std::max(std::max(std::abs(m.a11), std::abs(m.a12)),
                  std::max(std::abs(m.a21), std::abs(m.a22)));
}
inline double l1_norm(const Mat2& m) {
  return std::abs(m.a11) + std::abs(m.a12) + std::abs(m.a21) + std::abs(m.a22);
}
inline bool is_finite(const Mat2& m) {
  return std::isfinite(m.a11) && std::isfinite(m.a12) && std::isfinite(m.a21) &&
         std::isfinite(m.a22);
}

/// Cofactor inverse. Throws SingularMatrix when |det| <= 1e-12.
inline Mat2 invert(const Mat2& m) {
  const double d = m.det();
  if (!(std::abs(d) > kSingularDet)) {
    throw Error(Errc::SingularMatrix, "2x2 matrix has |det| <= 1e-12");
  }
  const double inv = 1.0 / d;
  return {m.a22 * inv, -m.a12 * inv, -m.a21 * inv, m.a11 * inv};
}

/// First-order Taylor model of a map around `anchor_in`:
/// z -> anchor_out + jac * (z - anchor_in).
struct LocalAffine {
  Point2 anchor_in;
  Point2 anchor_out;
  Mat2 jac;

  Point2 operator()(Point2 z) const { return anchor_out + jac * (z - anchor_in); }

  static LocalAffine identity() { return {{}, {}, Mat2::identity()}; }
  static LocalAffine translation(Point2 by) { return {{}, by, Mat2::identity()}; }
};

/// outer o inner. Both are affine, so the result is exact everywhere; it is
/// expanded around inner.anchor_in.
inline LocalAffine compose(const LocalAffine& outer, const LocalAffine& inner) {
  return {inner.anchor_in, outer(inner.anchor_out), outer.jac * inner.jac};
}

/// Exact inverse of an affine map with invertible Jacobian.
inline LocalAffine inverse(const LocalAffine& t) {
  return {t.anchor_out, t.anchor_in, invert(t.jac)};
}

/// Value and Jacobian of T_{X<-R} at one reference keypoint.
struct KeypointDescriptor {
  Point2 position;
  Mat2 jacobian = Mat2::identity();
};

/// All keypoints of one frame, in a fixed order shared across a track.
struct FrameDescriptor {
  std::vector<KeypointDescriptor> keypoints;

  std::size_t size() const { return keypoints.size(); }
  const KeypointDescriptor& operator[](std::size_t k) const { return keypoints[k]; }
  KeypointDescriptor& operator[](std::size_t k) { return keypoints[k]; }
};

inline constexpr std::size_t kDefaultKeypointCount = 10;

inline void require_same_count(const FrameDescriptor& a, const FrameDescriptor& b,
                               const char* what) {
  if (a.size() != b.size()) {
    throw Error(Errc::KeypointCountMismatch,
                std::string(what) + ": " + std::to_string(a.size()) + " vs " +
                    std::to_string(b.size()) + " keypoints");
  }
}

// Pixel-center convention: column i of a W-wide grid sits at -1 + (2i+1)/W.
inline double pixel_center(int i, int extent) {
  return -1.0 + static_cast<double>(2 * i + 1) / static_cast<double>(extent);
}
inline Point2 pixel_center(int i, int j, int width, int height) {
  return {pixel_center(i, width), pixel_center(j, height)};
}
// Inverse of pixel_center: continuous pixel index of normalized coordinate v.
inline double to_pixel(double v, int extent) {
  return ((v + 1.0) * static_cast<double>(extent) - 1.0) * 0.5;
}

}  // namespace fomo
