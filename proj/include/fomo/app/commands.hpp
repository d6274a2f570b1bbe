// Copyright 2026 The fomo Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <limits>
#include <mutex>
#include <numbers>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "fomo/dense_motion.hpp"
#include "fomo/equivariance.hpp"
#include "fomo/error.hpp"
#include "fomo/image.hpp"
#include "fomo/io/grid_files.hpp"
#include "fomo/io/json_io.hpp"
#include "fomo/io/png.hpp"
#include "fomo/local_motion.hpp"
#include "fomo/scenes.hpp"
#include "fomo/tps.hpp"
#include "fomo/warping.hpp"

namespace fomo::app {

namespace fs = std::filesystem;

enum ExitCode : int { kExitOk = 0, kExitToleranceFail = 1, kExitInputError = 2 };

enum class TransferMode { absolute, relative };

struct RunConfig {
  int resolution = kDefaultFlowResolution;
  double sigma = kDefaultHeatmapSigma;
  MaskPolicyConfig masks;
  TransferMode mode = TransferMode::absolute;
  MotionOrder order = MotionOrder::first;
  std::uint64_t seed = 0;
  double tol = 1e-6;
  unsigned threads = 0;  // 0: FOMO_THREADS or hardware concurrency
};

inline void validate(const RunConfig& cfg) {
  const int r = cfg.resolution;
  if (r < 16 || r > 512 || (r & (r - 1)) != 0) {
    throw Error(Errc::InvalidConfig, "resolution must be a power of two in [16, 512]");
  }
  if (!(cfg.sigma > 0.0)) throw Error(Errc::InvalidSigma, "sigma must be > 0");
  if (!(cfg.masks.temperature > 0.0) || !(cfg.masks.background_radius > 0.0)) {
    throw Error(Errc::InvalidConfig, "tau and bg-radius must be > 0");
  }
  if (!(cfg.tol >= 0.0)) throw Error(Errc::InvalidConfig, "tol must be >= 0");
}

inline MotionOrder parse_order(const std::string& s) {
  if (s == "zeroth") return MotionOrder::zeroth;
  if (s == "first") return MotionOrder::first;
  throw Error(Errc::InvalidConfig, "order must be zeroth or first");
}

inline TransferMode parse_mode(const std::string& s) {
  if (s == "absolute") return TransferMode::absolute;
  if (s == "relative") return TransferMode::relative;
  throw Error(Errc::InvalidConfig, "mode must be absolute or relative");
}

/// Applies a JSON config object; unknown keys are rejected.
inline void apply_config(RunConfig& cfg, const io::json& j) {
  if (!j.is_object()) throw Error(Errc::InvalidConfig, "config must be a JSON object");
  try {
    for (const auto& [key, v] : j.items()) {
      if (key == "resolution") {
        cfg.resolution = v.get<int>();
      } else if (key == "sigma") {
        cfg.sigma = v.get<double>();
      } else if (key == "tau") {
        cfg.masks.temperature = v.get<double>();
      } else if (key == "bg_radius") {
        cfg.masks.background_radius = v.get<double>();
      } else if (key == "order") {
        cfg.order = parse_order(v.get<std::string>());
      } else if (key == "mode") {
        cfg.mode = parse_mode(v.get<std::string>());
      } else if (key == "seed") {
        cfg.seed = v.get<std::uint64_t>();
      } else if (key == "tol") {
        cfg.tol = v.get<double>();
      } else {
        throw Error(Errc::InvalidConfig, "unknown config key \"" + key + "\"");
      }
    }
  } catch (const io::json::exception& e) {
    throw Error(Errc::InvalidConfig, e.what());
  }
}

inline unsigned worker_count(const RunConfig& cfg) {
  unsigned n = cfg.threads;
  if (n == 0) {
    if (const char* env = std::getenv("FOMO_THREADS")) {
      try {
        n = static_cast<unsigned>(std::max(1, std::stoi(env)));
      } catch (const std::logic_error&) {
        n = 1;
      }
    }
  }
  if (n == 0) n = std::max(1u, std::thread::hardware_concurrency());
  return n;
}

/// Runs body(0..count-1) on up to `workers` threads. Iterations must be
/// independent; the first exception thrown is rethrown on the caller.
template <class Body>
void parallel_for(std::size_t count, unsigned workers, Body&& body) {
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, count));
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) {
        try {
          body(i);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

/// Optical-flow color coding of the displacement flow(z) - z: hue from its
/// angle, full saturation, value from its magnitude clipped at 1.
inline Image flow_visualization(const DenseFlow& flow) {
  const int w = flow.width();
  const int h = flow.height();
  Image img(w, h, 3);
  for (int j = 0; j < h; ++j) {
    for (int i = 0; i < w; ++i) {
      const Point2 d = flow(i, j) - pixel_center(i, j, w, h);
      const double value = std::min(1.0, norm(d));
      double hue = std::atan2(d.y, d.x) / (2.0 * std::numbers::pi);
      if (hue < 0.0) hue += 1.0;
      const double sector = hue * 6.0;
      const int s = static_cast<int>(std::floor(sector)) % 6;
      const double f = sector - std::floor(sector);
      const double p = 0.0;
      const double q = value * (1.0 - f);
      const double t = value * f;
      double rgb[3];
      switch (s) {
        case 0: rgb[0] = value; rgb[1] = t; rgb[2] = p; break;
        case 1: rgb[0] = q; rgb[1] = value; rgb[2] = p; break;
        case 2: rgb[0] = p; rgb[1] = value; rgb[2] = t; break;
        case 3: rgb[0] = p; rgb[1] = q; rgb[2] = value; break;
        case 4: rgb[0] = t; rgb[1] = p; rgb[2] = value; break;
        default: rgb[0] = value; rgb[1] = p; rgb[2] = q; break;
      }
      for (int c = 0; c < 3; ++c) img.at(i, j, c) = rgb[c];
    }
  }
  return img;
}

/// Motion for one driving frame under the configured transfer mode.
inline PairwiseLocalMotion frame_motion(const FrameDescriptor& source,
                                        const FrameDescriptor& driving_first,
                                        const FrameDescriptor& driving_t, const RunConfig& cfg) {
  return cfg.mode == TransferMode::absolute
             ? pairwise_motion(source, driving_t, cfg.order)
             : relative_transfer(source, driving_first, driving_t, cfg.order);
}

/// Dense flow at the configured resolution, from the mask policy or from
/// externally supplied masks.
inline DenseFlow synthesize_flow(const PairwiseLocalMotion& motion, const RunConfig& cfg,
                                 const MaskStack* masks = nullptr) {
  const int r = cfg.resolution;
  return masks ? dense_flow(motion, *masks, r, r)
               : dense_flow(motion, soft_masks(motion, r, r, cfg.masks), r, r);
}

/// Flow resampled to the image, then occlusion-weighted back-warping.
inline Image animate_frame(const Image& source, const PairwiseLocalMotion& motion,
                           const RunConfig& cfg, const OcclusionMap& occlusion,
                           const MaskStack* masks = nullptr) {
  const int w = source.width();
  const int h = source.height();
  const DenseFlow flow = resample_flow(synthesize_flow(motion, cfg, masks), w, h);
  return backwarp(source, flow, resample_map(occlusion, w, h));
}

inline std::string frame_name(std::size_t t) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "frame_%04zu.png", t);
  return buf;
}

struct AnimateOptions {
  fs::path source_image;
  fs::path track;
  std::optional<fs::path> source_descriptor;  // defaults to the first track frame
  std::optional<fs::path> occlusion;
  std::optional<fs::path> masks;
  fs::path out_dir = ".";
};

/// Renders one PNG per track frame into out_dir; returns the written paths.
inline std::vector<fs::path> cmd_animate(const AnimateOptions& opts, const RunConfig& cfg) {
  validate(cfg);
  const Image source = io::read_png(opts.source_image);
  const io::DescriptorTrack track = io::load_track(opts.track);
  const FrameDescriptor source_desc =
      opts.source_descriptor ? io::load_frame(*opts.source_descriptor) : track.frames.front();
  require_same_count(source_desc, track.frames.front(), "source descriptor vs track");

  // Occlusion files may be given at flow or at image resolution.
  OcclusionMap occlusion(source.width(), source.height(), 1.0);
  if (opts.occlusion) {
    const io::ChannelGrid g = io::read_grid(*opts.occlusion, Errc::MalformedOcclusionFile);
    const bool at_image = g.width == source.width() && g.height == source.height();
    const int w = at_image ? source.width() : cfg.resolution;
    const int h = at_image ? source.height() : cfg.resolution;
    occlusion = occlusion_from_file_or_default(opts.occlusion, w, h);
  }
  std::optional<MaskStack> masks;
  if (opts.masks) {
    masks = masks_from_file(*opts.masks, track.k, cfg.resolution, cfg.resolution);
  }

  fs::create_directories(opts.out_dir);
  std::vector<fs::path> written(track.frames.size());
  parallel_for(track.frames.size(), worker_count(cfg), [&](std::size_t t) {
    const PairwiseLocalMotion motion =
        frame_motion(source_desc, track.frames.front(), track.frames[t], cfg);
    const Image frame =
        animate_frame(source, motion, cfg, occlusion, masks ? &*masks : nullptr);
    written[t] = opts.out_dir / frame_name(t);
    io::write_png(written[t], frame);
  });
  return written;
}

struct FlowOptions {
  fs::path source_frame;
  fs::path driving_frame;
  fs::path out_dir = ".";
  std::string flow_name = "flow.pfm";
  bool visualize = true;
  bool write_heatmaps = false;
  bool write_masks = false;
  std::optional<fs::path> masks;
};

/// Writes flow.pfm (two channels: source x, y per driving pixel), flow.png and
/// optionally heatmaps.pfm / masks.pfm at the configured resolution.
inline DenseFlow cmd_flow(const FlowOptions& opts, const RunConfig& cfg) {
  validate(cfg);
  const FrameDescriptor src = io::load_frame(opts.source_frame);
  const FrameDescriptor drv = io::load_frame(opts.driving_frame);
  const PairwiseLocalMotion motion = pairwise_motion(src, drv, cfg.order);
  const int r = cfg.resolution;
  const MaskStack masks = opts.masks ? masks_from_file(*opts.masks, motion.size(), r, r)
                                     : soft_masks(motion, r, r, cfg.masks);
  const DenseFlow flow = dense_flow(motion, masks, r, r);

  fs::create_directories(opts.out_dir);
  io::write_grid(opts.out_dir / opts.flow_name, io::to_channel_grid(flow));
  if (opts.visualize) io::write_png(opts.out_dir / "flow.png", flow_visualization(flow));
  if (opts.write_heatmaps) {
    io::write_grid(opts.out_dir / "heatmaps.pfm", io::to_channel_grid(heatmaps(motion, r, r, cfg.sigma)));
  }
  if (opts.write_masks) io::write_grid(opts.out_dir / "masks.pfm", io::to_channel_grid(masks));
  return flow;
}

struct EquivOptions {
  fs::path x_frame;
  fs::path y_frame;
  fs::path transform;
  std::optional<fs::path> report;  // stdout when absent
};

/// Exit code 0 when both residual means are below cfg.tol, 1 otherwise.
inline int cmd_equiv(const EquivOptions& opts, const RunConfig& cfg, std::ostream& out) {
  const FrameDescriptor x = io::load_frame(opts.x_frame);
  const FrameDescriptor y = io::load_frame(opts.y_frame);
  const TpsTransform t = io::load_tps(opts.transform);
  const EquivarianceReport report = equivariance_report(x, y, t);
  io::json j = io::to_json(report);
  j["tol"] = cfg.tol;
  const bool pass = report.position_mean < cfg.tol && report.jacobian_mean < cfg.tol;
  j["pass"] = pass;
  if (opts.report) {
    io::save_json(*opts.report, j);
  } else {
    out << j.dump(2) << '\n';
  }
  return pass ? kExitOk : kExitToleranceFail;
}

struct BenchOptions {
  fs::path scene;
  std::vector<double> radii{0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8};
  std::optional<fs::path> out_dir;
};

struct BenchResult {
  std::vector<ProfileRow> zeroth;
  std::vector<ProfileRow> first;
};

inline std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  std::ostringstream ss;
  ss.precision(17);
  ss << v;
  return ss.str();
}

inline std::string profile_csv(const std::vector<ProfileRow>& rows) {
  std::string s = "radius,mean_error,max_error,samples,unresolved\n";
  for (const auto& r : rows) {
    s += format_double(r.radius) + "," + format_double(r.mean_error) + "," +
         format_double(r.max_error) + "," + std::to_string(r.samples) + "," +
         std::to_string(r.unresolved) + "\n";
  }
  return s;
}

/// Summary table on `out`: per radius, both orders and first/zeroth mean ratio
/// (nan when the zeroth-order error is 0).
inline BenchResult cmd_bench(const BenchOptions& opts, std::ostream& out) {
  const SceneSpec scene = io::load_scene(opts.scene);
  BenchResult res{flow_error_profile(scene, MotionOrder::zeroth, opts.radii),
                  flow_error_profile(scene, MotionOrder::first, opts.radii)};
  out << "radius,zeroth_mean,zeroth_max,first_mean,first_max,first_over_zeroth\n";
  for (std::size_t n = 0; n < opts.radii.size(); ++n) {
    const auto& z = res.zeroth[n];
    const auto& f = res.first[n];
    const double ratio = z.mean_error > 0.0 ? f.mean_error / z.mean_error
                                            : std::numeric_limits<double>::quiet_NaN();
    out << format_double(z.radius) << ',' << format_double(z.mean_error) << ','
        << format_double(z.max_error) << ',' << format_double(f.mean_error) << ','
        << format_double(f.max_error) << ',' << format_double(ratio) << '\n';
  }
  if (opts.out_dir) {
    fs::create_directories(*opts.out_dir);
    io::detail::write_file(*opts.out_dir / "profile_zeroth.csv", profile_csv(res.zeroth));
    io::detail::write_file(*opts.out_dir / "profile_first.csv", profile_csv(res.first));
  }
  return res;
}

struct TpsOptions {
  fs::path image;
  fs::path out_dir = ".";
  TpsSampleConfig sample;
  std::size_t keypoints = kDefaultKeypointCount;
};

/// Keypoints of the Y descriptor: evenly spaced on a circle of radius 0.5.
inline FrameDescriptor ring_descriptor(std::size_t k) {
  FrameDescriptor f;
  for (std::size_t n = 0; n < k; ++n) {
    const double phi = 2.0 * std::numbers::pi * static_cast<double>(n) / static_cast<double>(k);
    f.keypoints.push_back({{0.5 * std::cos(phi), 0.5 * std::sin(phi)}, Mat2::identity()});
  }
  return f;
}

/// Samples T_{X<-Y}, writes the deformed image Y (deformed.png), the transform
/// (transform.json) and the ideal descriptors of both images (x.json, y.json).
inline TpsTransform cmd_tps(const TpsOptions& opts) {
  if (opts.keypoints == 0) throw Error(Errc::InvalidConfig, "need at least one keypoint");
  const Image x_image = io::read_png(opts.image);
  const TpsTransform t = tps_sample(opts.sample);
  const FrameDescriptor y = ring_descriptor(opts.keypoints);
  const FrameDescriptor x = equivariant_descriptor(y, t);
  fs::create_directories(opts.out_dir);
  io::write_png(opts.out_dir / "deformed.png", tps_warp_image(x_image, t));
  io::save_json(opts.out_dir / "transform.json", io::to_json(t));
  io::save_frame(opts.out_dir / "x.json", x);
  io::save_frame(opts.out_dir / "y.json", y);
  return t;
}

}  // namespace fomo::app
