// Copyright 2026 The fomo Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>

namespace fomo {

enum class Errc {
  SingularMatrix,
  KeypointCountMismatch,
  IndexOutOfRange,
  InvalidSigma,
  InvalidConfig,
  DimensionMismatch,
  MalformedOcclusionFile,
  OutOfRangeValue,
  InvalidPyramidSpec,
  FileNotFound,
  MalformedTrack,
  MalformedDescriptor,
  MalformedScene,
  MalformedTransform,
  IoFailure,
};

inline const char* errc_name(Errc code) {
  switch (code) {
    case Errc::SingularMatrix: return "SingularMatrix";
    case Errc::KeypointCountMismatch: return "KeypointCountMismatch";
    case Errc::IndexOutOfRange: return "IndexOutOfRange";
    case Errc::InvalidSigma: return "InvalidSigma";
    case Errc::InvalidConfig: return "InvalidConfig";
    case Errc::DimensionMismatch: return "DimensionMismatch";
    case Errc::MalformedOcclusionFile: return "MalformedOcclusionFile";
    case Errc::OutOfRangeValue: return "OutOfRangeValue";
    case Errc::InvalidPyramidSpec: return "InvalidPyramidSpec";
    case Errc::FileNotFound: return "FileNotFound";
    case Errc::MalformedTrack: return "MalformedTrack";
    case Errc::MalformedDescriptor: return "MalformedDescriptor";
    case Errc::MalformedScene: return "MalformedScene";
    case Errc::MalformedTransform: return "MalformedTransform";
    case Errc::IoFailure: return "IoFailure";
  }
  return "Unknown";
}

/// Every failure in the library is reported as an `Error`. Errors tied to a
/// single keypoint (a singular Jacobian, say) carry its index.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what,
        std::optional<std::size_t> keypoint = std::nullopt)
      : std::runtime_error(std::string(errc_name(code)) + ": " + what),
        code_(code),
        keypoint_(keypoint) {}

  Errc code() const noexcept { return code_; }
  std::optional<std::size_t> keypoint() const noexcept { return keypoint_; }

 private:
  Errc code_;
  std::optional<std::size_t> keypoint_;
};

}  // namespace fomo
