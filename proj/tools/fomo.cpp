// Copyright 2026 The fomo Authors
// SPDX-License-Identifier: Apache-2.0

// fomo: command-line front end for the motion kernels.
//
//   fomo animate SOURCE.png TRACK.json [--source-kp F.json] [--occlusion F] [--masks F]
//   fomo flow SRC.json DRV.json
//   fomo equiv X.json Y.json TPS.json [--report R.json]
//   fomo bench SCENE.json [--radii 0,0.1,...]
//   fomo tps IMAGE.png [--keypoints K] [--deform-var V] [--affine-var V]
//
// Shared flags: --resolution --sigma --tau --bg-radius --order --mode --seed
// --tol --out-dir --config. Flags override values from --config (JSON).
// Exit codes: 0 success, 1 tolerance failure, 2 input or math error.

#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "fomo/app/commands.hpp"

namespace {

using fomo::app::RunConfig;

struct SharedFlags {
  std::optional<std::string> config;
  std::optional<int> resolution;
  std::optional<double> sigma;
  std::optional<double> tau;
  std::optional<double> bg_radius;
  std::optional<std::string> order;
  std::optional<std::string> mode;
  std::optional<std::uint64_t> seed;
  std::optional<double> tol;
  std::string out_dir = ".";

  void attach(CLI::App* cmd) {
    cmd->add_option("--config", config, "JSON config file");
    cmd->add_option("--resolution", resolution, "flow resolution (power of two, 16-512)");
    cmd->add_option("--sigma", sigma, "heatmap variance");
    cmd->add_option("--tau", tau, "mask softmax temperature");
    cmd->add_option("--bg-radius", bg_radius, "background radius of the mask policy");
    cmd->add_option("--order", order, "zeroth or first")
        ->check(CLI::IsMember({"zeroth", "first"}));
    cmd->add_option("--mode", mode, "absolute or relative")
        ->check(CLI::IsMember({"absolute", "relative"}));
    cmd->add_option("--seed", seed, "random seed");
    cmd->add_option("--tol", tol, "pass threshold for residual means");
    cmd->add_option("--out-dir", out_dir, "output directory");
  }

  RunConfig resolve() const {
    RunConfig cfg;
    if (config) fomo::app::apply_config(cfg, fomo::io::load_json(*config, fomo::Errc::InvalidConfig));
    if (resolution) cfg.resolution = *resolution;
    if (sigma) cfg.sigma = *sigma;
    if (tau) cfg.masks.temperature = *tau;
    if (bg_radius) cfg.masks.background_radius = *bg_radius;
    if (order) cfg.order = fomo::app::parse_order(*order);
    if (mode) cfg.mode = fomo::app::parse_mode(*mode);
    if (seed) cfg.seed = *seed;
    if (tol) cfg.tol = *tol;
    return cfg;
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"First-order motion kernels: animate, flow, equiv, bench, tps"};
  app.require_subcommand(1);

  SharedFlags flags;

  fomo::app::AnimateOptions animate;
  std::optional<std::string> source_kp, occlusion, masks;
  auto* animate_cmd = app.add_subcommand("animate", "warp a source image along a descriptor track");
  animate_cmd->add_option("source", animate.source_image, "source PNG")->required();
  animate_cmd->add_option("track", animate.track, "descriptor track JSON")->required();
  animate_cmd->add_option("--source-kp", source_kp, "source descriptor JSON (default: track frame 0)");
  animate_cmd->add_option("--occlusion", occlusion, "occlusion map (.pfm or .csv)");
  animate_cmd->add_option("--masks", masks, "(K+1)-channel mask file (.pfm or .csv)");
  flags.attach(animate_cmd);

  fomo::app::FlowOptions flow;
  std::optional<std::string> flow_masks;
  auto* flow_cmd = app.add_subcommand("flow", "dense backward flow between two descriptor frames");
  flow_cmd->add_option("source", flow.source_frame, "source frame JSON")->required();
  flow_cmd->add_option("driving", flow.driving_frame, "driving frame JSON")->required();
  flow_cmd->add_flag("--heatmaps", flow.write_heatmaps, "also write heatmaps.pfm");
  flow_cmd->add_flag("--write-masks", flow.write_masks, "also write masks.pfm");
  flow_cmd->add_option("--masks", flow_masks, "(K+1)-channel mask file (.pfm or .csv)");
  flags.attach(flow_cmd);

  fomo::app::EquivOptions equiv;
  std::optional<std::string> report;
  auto* equiv_cmd = app.add_subcommand("equiv", "equivariance residuals under a known deformation");
  equiv_cmd->add_option("x", equiv.x_frame, "descriptor of the deformed-from image X")->required();
  equiv_cmd->add_option("y", equiv.y_frame, "descriptor of image Y")->required();
  equiv_cmd->add_option("transform", equiv.transform, "T_{X<-Y} as TPS JSON")->required();
  equiv_cmd->add_option("--report", report, "write the report here instead of stdout");
  flags.attach(equiv_cmd);

  fomo::app::BenchOptions bench;
  auto* bench_cmd = app.add_subcommand("bench", "zeroth vs first order flow error on a scene");
  bench_cmd->add_option("scene", bench.scene, "scene JSON")->required();
  bench_cmd->add_option("--radii", bench.radii, "ring radii")->delimiter(',');
  flags.attach(bench_cmd);

  fomo::app::TpsOptions tps;
  auto* tps_cmd = app.add_subcommand("tps", "random TPS deformation with ideal descriptors");
  tps_cmd->add_option("image", tps.image, "input PNG (image X)")->required();
  tps_cmd->add_option("--keypoints", tps.keypoints, "number of keypoints");
  tps_cmd->add_option("--deform-var", tps.sample.deform_variance, "variance of kernel weights");
  tps_cmd->add_option("--affine-var", tps.sample.affine_variance, "variance of affine entries");
  tps_cmd->add_option("--grid", tps.sample.grid, "control grid side");
  flags.attach(tps_cmd);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : fomo::app::kExitInputError;
  }

  try {
    const RunConfig cfg = flags.resolve();
    if (*animate_cmd) {
      if (source_kp) animate.source_descriptor = *source_kp;
      if (occlusion) animate.occlusion = *occlusion;
      if (masks) animate.masks = *masks;
      animate.out_dir = flags.out_dir;
      const auto frames = fomo::app::cmd_animate(animate, cfg);
      std::cout << "wrote " << frames.size() << " frames to " << flags.out_dir << '\n';
      return fomo::app::kExitOk;
    }
    if (*flow_cmd) {
      if (flow_masks) flow.masks = *flow_masks;
      flow.out_dir = flags.out_dir;
      fomo::app::cmd_flow(flow, cfg);
      return fomo::app::kExitOk;
    }
    if (*equiv_cmd) {
      if (report) equiv.report = *report;
      return fomo::app::cmd_equiv(equiv, cfg, std::cout);
    }
    if (*bench_cmd) {
      if (flags.out_dir != ".") bench.out_dir = flags.out_dir;
      fomo::app::cmd_bench(bench, std::cout);
      return fomo::app::kExitOk;
    }
    if (*tps_cmd) {
      tps.sample.seed = cfg.seed;
      tps.out_dir = flags.out_dir;
      fomo::app::cmd_tps(tps);
      return fomo::app::kExitOk;
    }
  } catch (const fomo::Error& e) {
    std::cerr << "fomo: " << e.what() << '\n';
    return fomo::app::kExitInputError;
  } catch (const std::exception& e) {
    std::cerr << "fomo: " << e.what() << '\n';
    return fomo::app::kExitInputError;
  }
  return fomo::app::kExitInputError;
}
