// Copyright 2026 The fomo Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "fomo/error.hpp"
#include "fomo/geometry.hpp"

namespace fomo {

/// Zeroth order forces every J_k to identity (pure keypoint displacement);
/// first order uses the full Jacobian product.
enum class MotionOrder { zeroth, first };

/// Per-keypoint local affine approximations of the backward flow T_{S<-D}.
///
/// Each part is expanded around the driving keypoint (`anchor_in`) and maps it
/// to the source keypoint (`anchor_out`), so `parts[k](z)` is the k-th local
/// estimate of where driving pixel z comes from in the source.
struct PairwiseLocalMotion {
  std::vector<LocalAffine> parts;

  std::size_t size() const { return parts.size(); }
  Point2 src_anchor(std::size_t k) const { return parts.at(k).anchor_out; }
  Point2 drv_anchor(std::size_t k) const { return parts.at(k).anchor_in; }
  const Mat2& jac(std::size_t k) const { return parts.at(k).jac; }

  static PairwiseLocalMotion identity(std::size_t k) {
    PairwiseLocalMotion m;
    m.parts.assign(k, LocalAffine::identity());
    return m;
  }
};

namespace detail {

inline Mat2 invert_keypoint_jacobian(const Mat2& m, std::size_t k, const char* frame) {
  if (!(std::abs(m.det()) > kSingularDet)) {
    throw Error(Errc::SingularMatrix,
                std::string(frame) + " jacobian of keypoint " + std::to_string(k) +
                    " is singular",
                k);
  }
  return invert(m);
}

// numer * inverse(denom), exactly identity when the two factors are equal.
inline Mat2 jacobian_ratio(const Mat2& numer, const Mat2& denom, std::size_t k,
                           const char* frame) {
  const Mat2 inv = invert_keypoint_jacobian(denom, k, frame);
  return numer == denom ? Mat2::identity() : numer * inv;
}

}  // namespace detail

/// Combines source and driving descriptors through the reference frame:
/// J_k = J_S,k * inverse(J_D,k) in first order, identity in zeroth order.
inline PairwiseLocalMotion pairwise_motion(const FrameDescriptor& source,
                                           const FrameDescriptor& driving,
                                           MotionOrder order = MotionOrder::first) {
  require_same_count(source, driving, "source vs driving");
  PairwiseLocalMotion motion;
  motion.parts.reserve(source.size());
  for (std::size_t k = 0; k < source.size(); ++k) {
    Mat2 jac = Mat2::identity();
    if (order == MotionOrder::first) {
      jac = detail::jacobian_ratio(source[k].jacobian, driving[k].jacobian, k, "driving");
    }
    motion.parts.push_back({driving[k].position, source[k].position, jac});
  }
  return motion;
}

inline Point2 approx_flow_at(const PairwiseLocalMotion& motion, std::size_t k, Point2 z) {
  if (k >= motion.size()) {
    throw Error(Errc::IndexOutOfRange, "keypoint index " + std::to_string(k) +
                                           " >= K=" + std::to_string(motion.size()));
  }
  return motion.parts[k](z);
}

/// Relative motion transfer: replays the motion between the first and the
/// current driving frame around the keypoints of the first source frame.
///
/// Per keypoint the driving anchor becomes S1 + (Dt - D1) and the Jacobian
/// J_D1 * inverse(J_Dt). Source Jacobians do not enter the result.
inline PairwiseLocalMotion relative_transfer(const FrameDescriptor& source_first,
                                             const FrameDescriptor& driving_first,
                                             const FrameDescriptor& driving_t,
                                             MotionOrder order = MotionOrder::first) {
  require_same_count(source_first, driving_first, "source vs first driving frame");
  require_same_count(driving_first, driving_t, "first vs current driving frame");
  PairwiseLocalMotion motion;
  motion.parts.reserve(source_first.size());
  for (std::size_t k = 0; k < source_first.size(); ++k) {
    const Point2 src = source_first[k].position;
    const Point2 shift = driving_t[k].position - driving_first[k].position;
    Mat2 jac = Mat2::identity();
    if (order == MotionOrder::first) {
      jac = detail::jacobian_ratio(driving_first[k].jacobian, driving_t[k].jacobian, k,
                                   "current driving");
    }
    motion.parts.push_back({src + shift, src, jac});
  }
  return motion;
}

}  // namespace fomo
