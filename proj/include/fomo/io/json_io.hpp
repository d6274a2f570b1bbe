// Copyright 2026 The fomo Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "fomo/equivariance.hpp"
#include "fomo/error.hpp"
#include "fomo/geometry.hpp"
#include "fomo/io/grid_files.hpp"
#include "fomo/scenes.hpp"
#include "fomo/tps.hpp"

namespace fomo::io {

using nlohmann::json;

inline constexpr const char* kTrackVersion = "fomo-track/1";

/// Ordered keypoint descriptors over time, as read from a track file:
/// {"version": "fomo-track/1", "k": K,
///  "frames": [{"keypoints": [{"p": [x, y], "jac": [[a, b], [c, d]]}, ...]}, ...]}
struct DescriptorTrack {
  std::string version = kTrackVersion;
  std::size_t k = 0;
  std::vector<FrameDescriptor> frames;
};

inline json load_json(const std::filesystem::path& path, Errc malformed) {
  if (!std::filesystem::exists(path)) {
    throw Error(Errc::FileNotFound, "no such file: " + path.string());
  }
  std::ifstream in(path);
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw Error(malformed, path.string() + ": " + e.what());
  }
}

inline void save_json(const std::filesystem::path& path, const json& j) {
  detail::write_file(path, j.dump(2) + "\n");
}

namespace detail {

inline double finite_number(const json& j, Errc err, const char* what) {
  if (!j.is_number()) throw Error(err, std::string(what) + " must be a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) throw Error(err, std::string(what) + " must be finite");
  return v;
}

inline Point2 parse_point(const json& j, Errc err, const char* what) {
  if (!j.is_array() || j.size() != 2) throw Error(err, std::string(what) + " must be [x, y]");
  return {finite_number(j[0], err, what), finite_number(j[1], err, what)};
}

inline Mat2 parse_mat2(const json& j, Errc err, const char* what) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_array() || j[0].size() != 2 ||
      !j[1].is_array() || j[1].size() != 2) {
    throw Error(err, std::string(what) + " must be [[a, b], [c, d]]");
  }
  return {finite_number(j[0][0], err, what), finite_number(j[0][1], err, what),
          finite_number(j[1][0], err, what), finite_number(j[1][1], err, what)};
}

}  // namespace detail

inline json to_json(Point2 p) { return json::array({p.x, p.y}); }
inline json to_json(const Mat2& m) {
  return json::array({json::array({m.a11, m.a12}), json::array({m.a21, m.a22})});
}

inline json to_json(const FrameDescriptor& frame) {
  json kps = json::array();
  for (const auto& kp : frame.keypoints) {
    kps.push_back({{"p", to_json(kp.position)}, {"jac", to_json(kp.jacobian)}});
  }
  return {{"keypoints", kps}};
}

inline FrameDescriptor parse_frame(const json& j, Errc err = Errc::MalformedDescriptor) {
  if (!j.is_object() || !j.contains("keypoints") || !j["keypoints"].is_array()) {
    throw Error(err, "frame needs a \"keypoints\" array");
  }
  FrameDescriptor frame;
  for (const auto& kp : j["keypoints"]) {
    if (!kp.is_object() || !kp.contains("p")) throw Error(err, "keypoint needs \"p\"");
    KeypointDescriptor d;
    d.position = detail::parse_point(kp["p"], err, "keypoint position");
    if (kp.contains("jac")) d.jacobian = detail::parse_mat2(kp["jac"], err, "keypoint jacobian");
    frame.keypoints.push_back(d);
  }
  if (frame.keypoints.empty()) throw Error(err, "frame has no keypoints");
  return frame;
}

/// A frame file holds either a bare frame object or a track with one frame.
inline FrameDescriptor load_frame(const std::filesystem::path& path) {
  const json j = load_json(path, Errc::MalformedDescriptor);
  if (j.is_object() && j.contains("frames")) {
    if (!j["frames"].is_array() || j["frames"].size() != 1) {
      throw Error(Errc::MalformedDescriptor, path.string() + ": expected exactly one frame");
    }
    return parse_frame(j["frames"][0]);
  }
  return parse_frame(j);
}

inline void save_frame(const std::filesystem::path& path, const FrameDescriptor& frame) {
  save_json(path, to_json(frame));
}

inline json to_json(const DescriptorTrack& track) {
  json frames = json::array();
  for (const auto& f : track.frames) frames.push_back(to_json(f));
  return {{"version", track.version}, {"k", track.k}, {"frames", frames}};
}

inline DescriptorTrack parse_track(const json& j) {
  constexpr Errc err = Errc::MalformedTrack;
  if (!j.is_object()) throw Error(err, "track must be a JSON object");
  if (!j.contains("version") || j["version"] != kTrackVersion) {
    throw Error(err, std::string("track version must be \"") + kTrackVersion + "\"");
  }
  if (!j.contains("k") || !j["k"].is_number_integer() || j["k"].get<long long>() < 1) {
    throw Error(err, "track needs an integer \"k\" >= 1");
  }
  if (!j.contains("frames") || !j["frames"].is_array() || j["frames"].empty()) {
    throw Error(err, "track needs a non-empty \"frames\" array");
  }
  DescriptorTrack track;
  track.k = j["k"].get<std::size_t>();
  for (std::size_t t = 0; t < j["frames"].size(); ++t) {
    FrameDescriptor f = parse_frame(j["frames"][t], err);
    if (f.size() != track.k) {
      throw Error(Errc::KeypointCountMismatch, "frame " + std::to_string(t) + " has " +
                                                   std::to_string(f.size()) + " keypoints, k=" +
                                                   std::to_string(track.k));
    }
    for (const auto& kp : f.keypoints) {
      if (std::abs(kp.position.x) > 2.0 || std::abs(kp.position.y) > 2.0) {
        throw Error(err, "frame " + std::to_string(t) + " has a keypoint outside [-2,2]^2");
      }
    }
    track.frames.push_back(std::move(f));
  }
  return track;
}

inline DescriptorTrack load_track(const std::filesystem::path& path) {
  return parse_track(load_json(path, Errc::MalformedTrack));
}

inline void save_track(const std::filesystem::path& path, const DescriptorTrack& track) {
  save_json(path, to_json(track));
}

inline json to_json(const TpsTransform& t) {
  json cps = json::array();
  json ws = json::array();
  for (std::size_t i = 0; i < t.control_points.size(); ++i) {
    cps.push_back(to_json(t.control_points[i]));
    ws.push_back(to_json(t.weights[i]));
  }
  return {{"affine", {json::array({t.affine[0][0], t.affine[0][1], t.affine[0][2]}),
                      json::array({t.affine[1][0], t.affine[1][1], t.affine[1][2]})}},
          {"control_points", cps},
          {"weights", ws}};
}

inline TpsTransform parse_tps(const json& j) {
  constexpr Errc err = Errc::MalformedTransform;
  if (!j.is_object() || !j.contains("affine")) throw Error(err, "transform needs \"affine\"");
  const json& a = j["affine"];
  if (!a.is_array() || a.size() != 2 || !a[0].is_array() || a[0].size() != 3 ||
      !a[1].is_array() || a[1].size() != 3) {
    throw Error(err, "affine must be a 2x3 array");
  }
  TpsTransform t;
  for (int r = 0; r < 2; ++r) {
    for (int c = 0; c < 3; ++c) t.affine[r][c] = detail::finite_number(a[r][c], err, "affine");
  }
  const json empty = json::array();
  const json& cps = j.contains("control_points") ? j["control_points"] : empty;
  const json& ws = j.contains("weights") ? j["weights"] : empty;
  if (!cps.is_array() || !ws.is_array()) throw Error(err, "control_points/weights must be arrays");
  for (const auto& c : cps) t.control_points.push_back(detail::parse_point(c, err, "control point"));
  for (const auto& w : ws) t.weights.push_back(detail::parse_point(w, err, "weight"));
  validate(t);
  return t;
}

inline TpsTransform load_tps(const std::filesystem::path& path) {
  return parse_tps(load_json(path, Errc::MalformedTransform));
}

inline json to_json(const EquivarianceReport& r) {
  return {{"position_residuals", r.position_residuals},
          {"jacobian_residuals", r.jacobian_residuals},
          {"position_mean", r.position_mean},
          {"jacobian_mean", r.jacobian_mean},
          {"loss_weights",
           {{"reconstruction", r.weights.reconstruction},
            {"position", r.weights.position},
            {"jacobian", r.weights.jacobian}}}};
}

/// Scene files:
/// {"transform": {"kind": "identity"}
///             | {"kind": "affine", "linear": [[a, b], [c, d]], "offset": [tx, ty]}
///             | {"kind": "rotation", "theta": radians, "center": [x, y]}
///             | {"kind": "tps", "seed": n, "deform_variance": v, "affine_variance": v, "grid": 5},
///  "keypoints": [[x, y], ...] | {"grid": [cols, rows]},
///  "pattern": "checkerboard" | "gaussian-blobs" | "ramp",
///  "resolution": [width, height]}
/// Every field except "transform" is optional.
inline SceneSpec parse_scene(const json& j) {
  constexpr Errc err = Errc::MalformedScene;
  if (!j.is_object() || !j.contains("transform") || !j["transform"].is_object()) {
    throw Error(err, "scene needs a \"transform\" object");
  }
  SceneSpec spec;
  const json& t = j["transform"];
  const std::string kind = t.value("kind", "");
  if (kind == "identity") {
    spec.kind = SceneTransformKind::identity;
  } else if (kind == "affine") {
    spec.kind = SceneTransformKind::affine;
    if (!t.contains("linear")) throw Error(err, "affine transform needs \"linear\"");
    spec.linear = detail::parse_mat2(t["linear"], err, "linear");
    if (t.contains("offset")) spec.offset = detail::parse_point(t["offset"], err, "offset");
  } else if (kind == "rotation") {
    spec.kind = SceneTransformKind::rotation;
    if (!t.contains("theta")) throw Error(err, "rotation needs \"theta\"");
    spec.theta = detail::finite_number(t["theta"], err, "theta");
    if (t.contains("center")) spec.center = detail::parse_point(t["center"], err, "center");
  } else if (kind == "tps") {
    spec.kind = SceneTransformKind::tps;
    if (t.contains("seed")) {
      if (!t["seed"].is_number_unsigned()) throw Error(err, "seed must be a non-negative integer");
      spec.tps.seed = t["seed"].get<std::uint64_t>();
    }
    if (t.contains("deform_variance")) {
      spec.tps.deform_variance = detail::finite_number(t["deform_variance"], err, "deform_variance");
    }
    if (t.contains("affine_variance")) {
      spec.tps.affine_variance = detail::finite_number(t["affine_variance"], err, "affine_variance");
    }
    if (t.contains("grid")) {
      if (!t["grid"].is_number_integer() || t["grid"].get<int>() < 1) {
        throw Error(err, "grid must be a positive integer");
      }
      spec.tps.grid = t["grid"].get<int>();
    }
    if (spec.tps.deform_variance < 0.0 || spec.tps.affine_variance < 0.0) {
      throw Error(err, "variances must be >= 0");
    }
  } else {
    throw Error(err, "unknown transform kind \"" + kind + "\"");
  }

  if (j.contains("keypoints")) {
    const json& kp = j["keypoints"];
    spec.keypoints.clear();
    if (kp.is_object() && kp.contains("grid")) {
      const json& g = kp["grid"];
      if (!g.is_array() || g.size() != 2 || !g[0].is_number_integer() ||
          !g[1].is_number_integer() || g[0].get<int>() < 1 || g[1].get<int>() < 1) {
        throw Error(err, "keypoint grid must be [cols, rows]");
      }
      spec.keypoints = grid_layout(g[0].get<int>(), g[1].get<int>());
    } else if (kp.is_array()) {
      for (const auto& p : kp) spec.keypoints.push_back(detail::parse_point(p, err, "keypoint"));
    } else {
      throw Error(err, "keypoints must be a list or {\"grid\": [cols, rows]}");
    }
  }
  if (j.contains("pattern")) {
    const std::string p = j["pattern"].is_string() ? j["pattern"].get<std::string>() : "";
    if (p == "checkerboard") {
      spec.pattern = ScenePattern::checkerboard;
    } else if (p == "gaussian-blobs") {
      spec.pattern = ScenePattern::gaussian_blobs;
    } else if (p == "ramp") {
      spec.pattern = ScenePattern::ramp;
    } else {
      throw Error(err, "unknown pattern \"" + p + "\"");
    }
  }
  if (j.contains("resolution")) {
    const json& r = j["resolution"];
    if (!r.is_array() || r.size() != 2 || !r[0].is_number_integer() || !r[1].is_number_integer()) {
      throw Error(err, "resolution must be [width, height]");
    }
    spec.width = r[0].get<int>();
    spec.height = r[1].get<int>();
  }
  validate(spec);
  return spec;
}

inline SceneSpec load_scene(const std::filesystem::path& path) {
  return parse_scene(load_json(path, Errc::MalformedScene));
}

}  // namespace fomo::io
