// Copyright 2026 The fomo Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

namespace fomo {

/// Seedable normal generator with a fully specified stream.
///
/// The engine is std::mt19937_64, whose output sequence is fixed by the C++
/// standard. std::normal_distribution is not, so normals come from Box-Muller
/// written out here: every normal consumes exactly two engine outputs,
///   u1 = ((e1 >> 11) + 0.5) / 2^53,  u2 = (e2 >> 11) / 2^53,
///   n  = sqrt(-2 ln u1) * cos(2 pi u2),
/// and the sine branch is discarded.
class NormalStream {
 public:
  explicit NormalStream(std::uint64_t seed) : engine_(seed) {}

  double next_uniform_open() {
    return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
  }
  double next_uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Standard normal draw.
  double next() {
    const double u1 = next_uniform_open();
    const double u2 = next_uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

  double next(double mean, double stddev) { return mean + stddev * next(); }

 private:
  std::mt19937_64 engine_;
};

}  // namespace fomo
