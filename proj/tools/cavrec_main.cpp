#include <CLI11.hpp>
#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include "cavrec/pipeline.hpp"

namespace {

// Exit codes: 0 success, 1 usage error, 2 data error, 3 numerical failure.
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitNumerical = 3;

std::string g_config_doc;  // sink for the documented --config option

void add_config_doc(CLI::App* cmd) {
  cmd->add_option("--config", g_config_doc,
                  "Key=value file with defaults; explicit flags win");
}

void add_fusion_options(CLI::App* cmd, cavrec::ReconstructConfig* cfg,
                        double* tau_min, double* tau_max,
                        std::string* weight_law, std::string* scale_mode) {
  cmd->add_option("--voxel-size", cfg->fusion.voxel_size,
                  "Voxel edge length in world units")
      ->capture_default_str();
  cmd->add_option("--sigma-multiplier", cfg->fusion.sigma_multiplier,
                  "Truncation = multiplier * depth stddev, clamped")
      ->capture_default_str();
  cmd->add_option("--tau-min", *tau_min,
                  "Truncation lower clamp (default 2 * voxel size)");
  cmd->add_option("--tau-max", *tau_max,
                  "Truncation upper clamp (default 10 * voxel size)");
  cmd->add_option("--weight-cap", cfg->fusion.weight_cap,
                  "Per-voxel accumulated weight cap")
      ->capture_default_str();
  cmd->add_option("--sigma-floor", cfg->fusion.sigma_floor,
                  "Lower bound on stddev in the 1/sigma weight law")
      ->capture_default_str();
  cmd->add_option("--weight-law", *weight_law,
                  "Sample weight law: inverse_sigma or uniform")
      ->check(CLI::IsMember({"inverse_sigma", "uniform"}))
      ->capture_default_str();
  cmd->add_option("--scale-mode", *scale_mode,
                  "Depth rescaling: per_frame, global or none")
      ->check(CLI::IsMember({"per_frame", "global", "none"}))
      ->capture_default_str();
  cmd->add_option("--min-weight", cfg->min_weight,
                  "Minimum voxel weight for surface extraction")
      ->capture_default_str();
  cmd->add_option("--threads", cfg->threads,
                  "Worker threads (0 = hardware)")
      ->capture_default_str();
}

void resolve_fusion_options(cavrec::ReconstructConfig* cfg, double tau_min,
                            double tau_max, const std::string& weight_law,
                            const std::string& scale_mode) {
  cfg->fusion.tau_min =
      tau_min > 0.0 ? tau_min : 2.0 * cfg->fusion.voxel_size;
  cfg->fusion.tau_max =
      tau_max > 0.0 ? tau_max : 10.0 * cfg->fusion.voxel_size;
  cfg->fusion.weight_law = weight_law == "uniform"
                               ? cavrec::FusionConfig::WeightLaw::kUniform
                               : cavrec::FusionConfig::WeightLaw::kInverseSigma;
  cfg->fusion.scale_mode =
      scale_mode == "global" ? cavrec::FusionConfig::ScaleMode::kGlobal
      : scale_mode == "none" ? cavrec::FusionConfig::ScaleMode::kNone
                             : cavrec::FusionConfig::ScaleMode::kPerFrame;
}

// Expands `--config FILE` (a plain key=value file, keys are the long
// option names) into option tokens spliced in right after the subcommand,
// so explicit flags anywhere on the command line override the file.
std::vector<std::string> expand_config(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  std::size_t subcommand = 0;
  for (std::size_t i = 1; i < args.size() && subcommand == 0; ++i)
    if (!args[i].starts_with("-")) subcommand = i;
  if (subcommand == 0) return args;

  std::string config_file;
  for (std::size_t i = subcommand + 1; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) {
      config_file = args[i + 1];
      args.erase(args.begin() + i, args.begin() + i + 2);
      break;
    }
    if (args[i].starts_with("--config=")) {
      config_file = args[i].substr(9);
      args.erase(args.begin() + i);
      break;
    }
  }
  if (config_file.empty()) return args;

  const auto given_on_cli = [&](const std::string& key) {
    const std::string flag = "--" + key;
    for (std::size_t i = subcommand + 1; i < args.size(); ++i)
      if (args[i] == flag || args[i].starts_with(flag + "=")) return true;
    return false;
  };

  std::ifstream in(config_file);
  if (!in) throw cavrec::IoError("cannot open config file " + config_file);
  std::vector<std::string> expanded;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw cavrec::IoError("config line without '=': " + line);
    const std::string key = line.substr(0, eq);
    if (given_on_cli(key)) continue;  // explicit flags win
    expanded.push_back("--" + key + "=" + line.substr(eq + 1));
  }
  args.insert(args.begin() + subcommand + 1, expanded.begin(),
              expanded.end());
  return args;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "cavrec: volumetric depth fusion, surface extraction and evaluation "
      "for cavity reconstructions"};
  app.require_subcommand(1);

  // --- synth -------------------------------------------------------------
  cavrec::SynthConfig synth_cfg;
  std::string synth_out;
  auto* synth = app.add_subcommand(
      "synth", "Generate a synthetic phantom dataset (frames, trajectory, "
               "landmarks, ground-truth mesh)");
  add_config_doc(synth);
  synth->add_option("--out", synth_out, "Output dataset directory")
      ->required();
  synth->add_option("--frames", synth_cfg.n_frames, "Number of frames")
      ->capture_default_str();
  synth->add_option("--seed", synth_cfg.seed, "Root seed")
      ->capture_default_str();
  synth->add_option("--noise", synth_cfg.noise_sigma_rel,
                    "Depth noise stddev as a fraction of depth")
      ->capture_default_str();
  synth->add_option("--sigma-floor", synth_cfg.sigma_floor,
                    "Lower bound of the reported depth stddev")
      ->capture_default_str();
  synth->add_option("--sparse-points", synth_cfg.n_sparse_points,
                    "Number of sparse landmarks")
      ->capture_default_str();
  synth->add_option("--depth-scale", synth_cfg.depth_scale,
                    "Mis-scale applied to written depths (tests scale "
                    "recovery)")
      ->capture_default_str();
  synth->add_option("--threads", synth_cfg.threads,
                    "Worker threads (0 = hardware)")
      ->capture_default_str();
  synth->add_option("--phantom-length", synth_cfg.phantom.length,
                    "Tube length in world units")
      ->capture_default_str();
  synth->add_option("--radii", synth_cfg.phantom.radius_control,
                    "Radius control points, evenly spaced along the axis")
      ->delimiter(',');
  synth->add_option("--bump-amplitude", synth_cfg.phantom.bump_amplitude,
                    "Wall perturbation amplitude")
      ->capture_default_str();
  synth->add_option("--bump-frequency", synth_cfg.phantom.bump_frequency,
                    "Wall perturbation lobes")
      ->capture_default_str();
  synth->add_option("--bend", synth_cfg.phantom.bend_amplitude,
                    "Lateral deflection of the tube axis")
      ->capture_default_str();
  synth->add_option("--axial-segments", synth_cfg.phantom.axial_segments,
                    "Axial tessellation")
      ->capture_default_str();
  synth->add_option("--angular-segments", synth_cfg.phantom.angular_segments,
                    "Angular tessellation")
      ->capture_default_str();
  synth->add_option("--fx", synth_cfg.intrinsics.fx)->capture_default_str();
  synth->add_option("--fy", synth_cfg.intrinsics.fy)->capture_default_str();
  synth->add_option("--cx", synth_cfg.intrinsics.cx)->capture_default_str();
  synth->add_option("--cy", synth_cfg.intrinsics.cy)->capture_default_str();
  synth->add_option("--width", synth_cfg.intrinsics.width)
      ->capture_default_str();
  synth->add_option("--height", synth_cfg.intrinsics.height)
      ->capture_default_str();

  // --- reconstruct ---------------------------------------------------------
  cavrec::ReconstructConfig recon_cfg;
  std::string recon_out;
  double recon_tau_min = -1.0, recon_tau_max = -1.0;
  std::string recon_weight_law = "inverse_sigma";
  std::string recon_scale_mode = "per_frame";
  auto* reconstruct = app.add_subcommand(
      "reconstruct",
      "Fuse a dataset into a TSDF volume and extract the surface mesh");
  add_config_doc(reconstruct);
  reconstruct
      ->add_option("--dataset", recon_cfg.dataset_dir, "Dataset directory")
      ->required();
  reconstruct->add_option("--out", recon_out, "Output directory")->required();
  add_fusion_options(reconstruct, &recon_cfg, &recon_tau_min, &recon_tau_max,
                     &recon_weight_law, &recon_scale_mode);
  reconstruct->add_option("--keep", recon_cfg.keep_m,
                          "Keep this many frames of every block")
      ->capture_default_str();
  reconstruct->add_option("--of", recon_cfg.of_n, "Block length in frames")
      ->capture_default_str();
  reconstruct->add_option("--seed", recon_cfg.seed, "Subsampling seed")
      ->capture_default_str();
  reconstruct->add_flag("--dump-volume", recon_cfg.dump_volume,
                        "Also write the fused volume (volume.tsdf)");

  // --- evaluate ------------------------------------------------------------
  cavrec::EvaluateConfig eval_cfg;
  std::string eval_out;
  auto* evaluate = app.add_subcommand(
      "evaluate", "Compare a reconstruction against a reference model");
  add_config_doc(evaluate);
  evaluate->add_option("--recon", eval_cfg.recon_mesh, "Reconstructed mesh")
      ->required();
  evaluate
      ->add_option("--reference", eval_cfg.reference_mesh, "Reference mesh")
      ->required();
  evaluate
      ->add_option("--trajectory", eval_cfg.trajectory,
                   "Camera trajectory file")
      ->required();
  evaluate->add_option("--cloud", eval_cfg.cloud, "Sparse landmark cloud")
      ->required();
  evaluate->add_option("--out", eval_out, "Output directory")->required();
  evaluate
      ->add_option("--trim", eval_cfg.registration.trim_fraction,
                   "Worst correspondence fraction dropped per iteration")
      ->capture_default_str();
  evaluate
      ->add_option("--max-iters", eval_cfg.registration.max_iters,
                   "Registration iteration cap")
      ->capture_default_str();
  evaluate
      ->add_option("--tol", eval_cfg.registration.tol,
                   "Registration convergence tolerance (<0: auto)")
      ->capture_default_str();
  evaluate
      ->add_option("--sample-points", eval_cfg.sample_points,
                   "Surface samples drawn from the reconstruction")
      ->capture_default_str();
  evaluate->add_option("--seed", eval_cfg.seed, "Sampling seed")
      ->capture_default_str();
  evaluate->add_flag("--contours", eval_cfg.dump_contours,
                     "Dump cross-section contours");

  // --- match ---------------------------------------------------------------
  cavrec::MatchConfig match_cfg;
  std::string match_out;
  auto* match = app.add_subcommand(
      "match", "Subpixel descriptor matching between two descriptor maps");
  add_config_doc(match);
  match->add_option("--source", match_cfg.source_map, "Source descriptor map")
      ->required();
  match->add_option("--target", match_cfg.target_map, "Target descriptor map")
      ->required();
  match->add_option("--queries", match_cfg.queries,
                    "Query pixels, one 'u v' pair per line")
      ->required();
  match->add_option("--out", match_out, "Output matches file")->required();
  match->add_option("--refine", match_cfg.refine_factor,
                    "Subpixel grid refinement factor")
      ->capture_default_str();

  // --- consistency -----------------------------------------------------------
  cavrec::ConsistencyConfig cons_cfg;
  std::string cons_out;
  double cons_tau_min = -1.0, cons_tau_max = -1.0;
  std::string cons_weight_law = "inverse_sigma";
  std::string cons_scale_mode = "per_frame";
  auto* consistency = app.add_subcommand(
      "consistency",
      "Reconstruct two random frame subsets and register one to the other");
  add_config_doc(consistency);
  consistency
      ->add_option("--dataset", cons_cfg.dataset_dir, "Dataset directory")
      ->required();
  consistency->add_option("--out", cons_out, "Output directory")->required();
  add_fusion_options(consistency, &cons_cfg.reconstruct, &cons_tau_min,
                     &cons_tau_max, &cons_weight_law, &cons_scale_mode);
  consistency->add_option("--keep", cons_cfg.keep_m,
                          "Frames kept of every block")
      ->capture_default_str();
  consistency->add_option("--of", cons_cfg.of_n, "Block length in frames")
      ->capture_default_str();
  consistency->add_option("--seed", cons_cfg.seed, "Root seed")
      ->capture_default_str();
  consistency
      ->add_option("--register-samples", cons_cfg.register_samples,
                   "Surface samples used for the registration")
      ->capture_default_str();

  std::vector<std::string> args;
  try {
    args = expand_config(argc, argv);
  } catch (const cavrec::IoError& e) {
    std::fprintf(stderr, "data error: %s\n", e.what());
    return kExitData;
  }
  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    reversed.pop_back();  // program name
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (*synth) {
      cavrec::run_synth(synth_cfg, synth_out);
    } else if (*reconstruct) {
      resolve_fusion_options(&recon_cfg, recon_tau_min, recon_tau_max,
                             recon_weight_law, recon_scale_mode);
      const auto result = cavrec::run_reconstruct(recon_cfg, recon_out);
      std::printf("mesh: %zu vertices, %zu triangles, watertight=%d\n",
                  result.mesh.vertices.size(), result.mesh.triangles.size(),
                  result.watertight.is_watertight ? 1 : 0);
    } else if (*evaluate) {
      const auto result = cavrec::run_evaluate(eval_cfg, eval_out);
      for (const auto& m : result.metrics)
        std::printf("%s %.17g %s\n", m.name.c_str(), m.value, m.unit.c_str());
      if (result.sections_failed) return kExitNumerical;
    } else if (*match) {
      cavrec::run_match(match_cfg, match_out);
    } else if (*consistency) {
      resolve_fusion_options(&cons_cfg.reconstruct, cons_tau_min, cons_tau_max,
                             cons_weight_law, cons_scale_mode);
      const auto result = cavrec::run_consistency(cons_cfg, cons_out);
      std::printf("consistency residual mean %.17g\n", result.residual_mean);
    }
  } catch (const cavrec::IoError& e) {
    std::fprintf(stderr, "data error: %s\n", e.what());
    return kExitData;
  } catch (const cavrec::Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitNumerical;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitNumerical;
  }
  return 0;
}
