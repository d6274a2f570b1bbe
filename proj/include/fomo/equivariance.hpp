// Copyright 2026 The fomo Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <numeric>
#include <string>
#include <vector>

#include "fomo/error.hpp"
#include "fomo/geometry.hpp"
#include "fomo/tps.hpp"

namespace fomo {

// Relative weights of the reconstruction and the two equivariance terms. They
// are reported alongside the residuals; nothing here trains on them.
struct EquivarianceWeights {
  double reconstruction = 1.0;
  double position = 1.0;
  double jacobian = 1.0;
};

struct EquivarianceReport {
  std::vector<double> position_residuals;
  std::vector<double> jacobian_residuals;
  double position_mean = 0.0;
  double jacobian_mean = 0.0;
  EquivarianceWeights weights;
};

namespace detail {

inline double mean(const std::vector<double>& v) {
  return v.empty() ? 0.0 : std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

}  // namespace detail

/// |x_k - T(y_k)|_1 per keypoint, where T = T_{X<-Y}.
inline std::vector<double> equivariance_position(const FrameDescriptor& x,
                                                 const FrameDescriptor& y,
                                                 const TpsTransform& t) {
  require_same_count(x, y, "X vs Y descriptors");
  std::vector<double> out;
  out.reserve(x.size());
  for (std::size_t k = 0; k < x.size(); ++k) {
    out.push_back(l1_norm(x[k].position - tps_eval(t, y[k].position)));
  }
  return out;
}

/// Entrywise L1 of  1 - inverse(J_X,k) * dT(y_k) * J_Y,k  per keypoint. The
/// identity-referenced form keeps the loss from rewarding small Jacobians.
inline std::vector<double> equivariance_jacobian(const FrameDescriptor& x,
                                                 const FrameDescriptor& y,
                                                 const TpsTransform& t) {
  require_same_count(x, y, "X vs Y descriptors");
  std::vector<double> out;
  out.reserve(x.size());
  for (std::size_t k = 0; k < x.size(); ++k) {
    if (!(std::abs(x[k].jacobian.det()) > kSingularDet)) {
      throw Error(Errc::SingularMatrix,
                  "X jacobian of keypoint " + std::to_string(k) + " is singular", k);
    }
    const Mat2 product =
        invert(x[k].jacobian) * tps_jacobian(t, y[k].position) * y[k].jacobian;
    out.push_back(l1_norm(Mat2::identity() - product));
  }
  return out;
}

inline EquivarianceReport equivariance_report(const FrameDescriptor& x, const FrameDescriptor& y,
                                              const TpsTransform& t) {
  EquivarianceReport r;
  r.position_residuals = equivariance_position(x, y, t);
  r.jacobian_residuals = equivariance_jacobian(x, y, t);
  r.position_mean = detail::mean(r.position_residuals);
  r.jacobian_mean = detail::mean(r.jacobian_residuals);
  return r;
}

/// The descriptor an ideal detector reports on X given its output on Y:
/// positions T(y_k), Jacobians dT(y_k) * J_Y,k.
inline FrameDescriptor equivariant_descriptor(const FrameDescriptor& y, const TpsTransform& t) {
  FrameDescriptor x;
  x.keypoints.reserve(y.size());
  for (const auto& kp : y.keypoints) {
    x.keypoints.push_back({tps_eval(t, kp.position), tps_jacobian(t, kp.position) * kp.jacobian});
  }
  return x;
}

}  // namespace fomo
