#include "cavrec/pipeline.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>

#include "cavrec/cross_section.hpp"
#include "cavrec/marching_cubes.hpp"
#include "cavrec/ply_io.hpp"
#include "cavrec/rng.hpp"

namespace cavrec {

namespace fs = std::filesystem;

namespace {

std::string frame_stem(int frame_id) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "frame_%06d", frame_id);
  return buf;
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string join_radii(const std::vector<double>& radii) {
  std::string out;
  for (std::size_t i = 0; i < radii.size(); ++i) {
    if (i) out += ',';
    out += fmt(radii[i]);
  }
  return out;
}

void write_watertight_report(const fs::path& path,
                             const WatertightReport& report) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path.string());
  out << "boundary_edges " << report.boundary_edge_count << '\n'
      << "non_manifold_edges " << report.non_manifold_edge_count << '\n'
      << "connected_components " << report.connected_component_count << '\n'
      << "is_watertight " << (report.is_watertight ? 1 : 0) << '\n';
}

}  // namespace

void write_config_echo(
    const fs::path& path,
    std::span<const std::pair<std::string, std::string>> entries) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path.string());
  for (const auto& [key, value] : entries) out << key << '=' << value << '\n';
}

std::vector<int> subsample_indices(int n_total, int keep_m, int of_n,
                                   std::uint64_t seed) {
  if (keep_m < 1 || of_n < 1 || keep_m > of_n)
    throw InvalidSpec("subsample: need 1 <= keep_m <= of_n");
  std::vector<int> selected;
  if (keep_m == of_n) {
    selected.resize(n_total);
    for (int i = 0; i < n_total; ++i) selected[i] = i;
    return selected;
  }
  std::mt19937_64 rng(seed);
  for (int block = 0; block < n_total; block += of_n) {
    const int size = std::min(of_n, n_total - block);
    std::vector<int> pool(size);
    for (int i = 0; i < size; ++i) pool[i] = block + i;
    const int take = std::min(keep_m, size);
    for (int i = 0; i < take; ++i) {
      std::uniform_int_distribution<int> pick(i, size - 1);
      std::swap(pool[i], pool[pick(rng)]);
    }
    std::sort(pool.begin(), pool.begin() + take);
    selected.insert(selected.end(), pool.begin(), pool.begin() + take);
  }
  return selected;
}

Dataset load_dataset(const fs::path& dir) {
  Dataset ds;
  ds.root = dir;
  ds.intrinsics = read_intrinsics(dir / "intrinsics.txt");
  ds.cloud = read_sparse_cloud_ply(dir / "cloud.ply");

  const auto trajectory = read_trajectory(dir / "trajectory.txt");
  if (trajectory.empty())
    throw IoError("empty trajectory in " + dir.string());
  ds.frames.reserve(trajectory.size());
  for (const TrajectoryEntry& entry : trajectory) {
    DepthFrame frame;
    const fs::path depth_path =
        dir / "frames" / (frame_stem(entry.frame_id) + ".dpth");
    read_depth(depth_path, &frame);
    if (frame.width != ds.intrinsics.width ||
        frame.height != ds.intrinsics.height)
      throw IoError("depth size mismatch in " + depth_path.string());
    const fs::path ppm_path =
        dir / "frames" / (frame_stem(entry.frame_id) + ".ppm");
    if (fs::exists(ppm_path)) {
      int w = 0, h = 0;
      read_ppm(ppm_path, &w, &h, &frame.color);
      if (w != frame.width || h != frame.height)
        throw IoError("color size mismatch in " + ppm_path.string());
    }
    frame.pose = entry.pose;
    frame.intrinsics = ds.intrinsics;
    frame.frame_id = entry.frame_id;
    ds.frames.push_back(std::move(frame));
  }
  return ds;
}

std::vector<std::pair<std::string, std::string>> SynthConfig::echo() const {
  return {
      {"phantom.length", fmt(phantom.length)},
      {"phantom.radius_control", join_radii(phantom.radius_control)},
      {"phantom.bump_amplitude", fmt(phantom.bump_amplitude)},
      {"phantom.bump_frequency", fmt(phantom.bump_frequency)},
      {"phantom.bend_amplitude", fmt(phantom.bend_amplitude)},
      {"phantom.axial_segments", std::to_string(phantom.axial_segments)},
      {"phantom.angular_segments", std::to_string(phantom.angular_segments)},
      {"intrinsics.fx", fmt(intrinsics.fx)},
      {"intrinsics.fy", fmt(intrinsics.fy)},
      {"intrinsics.cx", fmt(intrinsics.cx)},
      {"intrinsics.cy", fmt(intrinsics.cy)},
      {"intrinsics.width", std::to_string(intrinsics.width)},
      {"intrinsics.height", std::to_string(intrinsics.height)},
      {"frames", std::to_string(n_frames)},
      {"noise_sigma_rel", fmt(noise_sigma_rel)},
      {"sigma_floor", fmt(sigma_floor)},
      {"sparse_points", std::to_string(n_sparse_points)},
      {"depth_scale", fmt(depth_scale)},
      {"seed", std::to_string(seed)},
  };
}

void run_synth(const SynthConfig& cfg, const fs::path& out_dir) {
  cfg.phantom.validate();
  cfg.intrinsics.validate();
  if (cfg.n_frames < 2) throw InvalidSpec("synth: need at least 2 frames");
  if (!(cfg.depth_scale > 0.0))
    throw InvalidSpec("synth: depth_scale must be positive");

  fs::create_directories(out_dir / "frames");

  PhantomSpec phantom_spec = cfg.phantom;
  phantom_spec.seed = derive_seed(cfg.seed, "harness");
  const TriangleMesh phantom = generate_phantom(phantom_spec);
  write_mesh_ply(out_dir / "phantom.ply", phantom);

  const auto poses = generate_trajectory(phantom_spec, cfg.n_frames);
  std::vector<TrajectoryEntry> trajectory(poses.size());
  for (std::size_t i = 0; i < poses.size(); ++i)
    trajectory[i] = {static_cast<int>(i), poses[i]};
  write_trajectory(out_dir / "trajectory.txt", trajectory);
  write_intrinsics(out_dir / "intrinsics.txt", cfg.intrinsics);

  const MeshBvh bvh(phantom);
  RenderConfig render_cfg;
  render_cfg.noise_sigma_rel = cfg.noise_sigma_rel;
  render_cfg.sigma_floor = cfg.sigma_floor;
  render_cfg.seed = derive_seed(cfg.seed, "render-noise");
  for (std::size_t i = 0; i < poses.size(); ++i) {
    DepthFrame frame = render_depth(bvh, poses[i], cfg.intrinsics, render_cfg,
                                    static_cast<int>(i), cfg.threads);
    if (cfg.depth_scale != 1.0) frame = apply_scale(frame, cfg.depth_scale);
    write_depth(out_dir / "frames" / (frame_stem(frame.frame_id) + ".dpth"),
                frame);
    write_ppm(out_dir / "frames" / (frame_stem(frame.frame_id) + ".ppm"),
              frame.width, frame.height, frame.color);
  }

  const SparsePointCloud cloud =
      sample_sparse(phantom, poses, cfg.intrinsics, cfg.n_sparse_points,
                    derive_seed(cfg.seed, "sparse-samples"));
  write_sparse_cloud_ply(out_dir / "cloud.ply", cloud);
  write_config_echo(out_dir / "synth_config.txt", cfg.echo());
}

std::vector<std::pair<std::string, std::string>> ReconstructConfig::echo()
    const {
  const char* law = fusion.weight_law == FusionConfig::WeightLaw::kInverseSigma
                        ? "inverse_sigma"
                        : "uniform";
  const char* mode = fusion.scale_mode == FusionConfig::ScaleMode::kPerFrame
                         ? "per_frame"
                         : fusion.scale_mode == FusionConfig::ScaleMode::kGlobal
                               ? "global"
                               : "none";
  return {
      {"dataset", dataset_dir.string()},
      {"voxel_size", fmt(fusion.voxel_size)},
      {"sigma_multiplier", fmt(fusion.sigma_multiplier)},
      {"tau_min", fmt(fusion.tau_min)},
      {"tau_max", fmt(fusion.tau_max)},
      {"weight_cap", fmt(fusion.weight_cap)},
      {"sigma_floor", fmt(fusion.sigma_floor)},
      {"weight_law", law},
      {"scale_mode", mode},
      {"min_weight", fmt(min_weight)},
      {"subsample_keep", std::to_string(keep_m)},
      {"subsample_of", std::to_string(of_n)},
      {"seed", std::to_string(seed)},
      {"threads", std::to_string(threads)},
  };
}

ReconstructResult run_reconstruct(const ReconstructConfig& cfg,
                                  const fs::path& out_dir) {
  const Dataset dataset = load_dataset(cfg.dataset_dir);
  fs::create_directories(out_dir);

  const std::vector<int> indices =
      subsample_indices(static_cast<int>(dataset.frames.size()), cfg.keep_m,
                        cfg.of_n, derive_seed(cfg.seed, "subsample"));
  std::vector<DepthFrame> selected;
  selected.reserve(indices.size());
  for (int i : indices) selected.push_back(dataset.frames[i]);

  ReconstructResult result;
  result.frames_used = indices;

  const TsdfVolume volume = fuse_sequence(selected, dataset.cloud, cfg.fusion,
                                          &result.scales, cfg.threads);
  result.mesh = marching_cubes(volume, cfg.min_weight);
  result.watertight = check_watertight(result.mesh);

  write_mesh_ply(out_dir / "mesh.ply", result.mesh);
  write_watertight_report(out_dir / "watertight.txt", result.watertight);
  {
    std::ofstream scales(out_dir / "scales.txt");
    if (!scales) throw IoError("cannot open scales.txt in " + out_dir.string());
    for (const FrameScaleLog& log : result.scales)
      scales << log.frame_id << ' ' << fmt(log.scale) << ' '
             << log.landmarks_used << '\n';
  }
  if (cfg.dump_volume) write_tsdf_dump(out_dir / "volume.tsdf", volume);
  write_config_echo(out_dir / "reconstruct_config.txt", cfg.echo());
  return result;
}

std::vector<std::pair<std::string, std::string>> EvaluateConfig::echo() const {
  return {
      {"recon_mesh", recon_mesh.string()},
      {"reference_mesh", reference_mesh.string()},
      {"trajectory", trajectory.string()},
      {"cloud", cloud.string()},
      {"trim_fraction", fmt(registration.trim_fraction)},
      {"max_iters", std::to_string(registration.max_iters)},
      {"tol", fmt(registration.tol)},
      {"sample_points", std::to_string(sample_points)},
      {"seed", std::to_string(seed)},
  };
}

EvaluateResult run_evaluate(const EvaluateConfig& cfg,
                            const fs::path& out_dir) {
  const TriangleMesh recon = read_mesh_ply(cfg.recon_mesh);
  const TriangleMesh reference = read_mesh_ply(cfg.reference_mesh);
  const auto trajectory = read_trajectory(cfg.trajectory);
  const SparsePointCloud cloud = read_sparse_cloud_ply(cfg.cloud);
  fs::create_directories(out_dir);

  EvaluateResult result;
  auto& metrics = result.metrics;

  // Agreement between the sparse landmarks and the dense reconstruction.
  const DistanceStats sparse_stats = point_to_mesh(cloud.points, recon);
  metrics.push_back({"sparse_to_recon_mean", sparse_stats.mean, "mm"});
  metrics.push_back({"sparse_to_recon_stddev", sparse_stats.stddev, "mm"});
  metrics.push_back({"sparse_to_recon_median", sparse_stats.median, "mm"});
  metrics.push_back({"sparse_to_recon_max", sparse_stats.max, "mm"});

  // Dense reconstruction registered onto the reference model.
  const auto samples =
      sample_surface_points(recon, cfg.sample_points,
                            derive_seed(cfg.seed, "evaluate-samples"));
  const auto init = coarse_init(samples, reference);
  const auto registration =
      register_sim3(samples, reference, init, cfg.registration);
  metrics.push_back(
      {"recon_to_reference_mean", registration.residuals.mean, "mm"});
  metrics.push_back(
      {"recon_to_reference_stddev", registration.residuals.stddev, "mm"});
  metrics.push_back(
      {"recon_to_reference_median", registration.residuals.median, "mm"});
  metrics.push_back(
      {"recon_to_reference_max", registration.residuals.max, "mm"});
  metrics.push_back({"registration_scale", registration.transform.scale, ""});
  metrics.push_back(
      {"registration_converged", registration.converged ? 1.0 : 0.0, ""});
  metrics.push_back(
      {"registration_iterations",
       static_cast<double>(registration.iterations), "count"});

  // The raw landmarks registered onto the reference, for the coverage gap
  // between sparse and dense agreement.
  try {
    const auto sparse_init = coarse_init(cloud.points, reference);
    const auto sparse_reg =
        register_sim3(cloud.points, reference, sparse_init, cfg.registration);
    metrics.push_back(
        {"sparse_to_reference_mean", sparse_reg.residuals.mean, "mm"});
    metrics.push_back(
        {"sparse_to_reference_stddev", sparse_reg.residuals.stddev, "mm"});
  } catch (const TooFewPoints&) {
    metrics.push_back({"sparse_to_reference_skipped", 1.0, ""});
  }

  // Cross-sectional areas along the registered trajectory.
  std::vector<RigidPose> poses(trajectory.size());
  for (std::size_t i = 0; i < trajectory.size(); ++i)
    poses[i] = trajectory[i].pose;
  try {
    const SectionSeriesResult sections = cross_section_series(
        recon, reference, poses, registration.transform);
    metrics.push_back({"cross_section_mean_relative_diff",
                       sections.mean_relative_difference, "ratio"});
    metrics.push_back({"cross_section_valid",
                       static_cast<double>(sections.valid_count), "count"});
    metrics.push_back({"cross_section_skipped",
                       static_cast<double>(sections.skipped_count), "count"});
  } catch (const AllSectionsFailed&) {
    result.sections_failed = true;
    metrics.push_back({"cross_section_failed", 1.0, ""});
  }

  if (cfg.dump_contours) {
    const fs::path contour_dir = out_dir / "contours";
    fs::create_directories(contour_dir);
    const TriangleMesh recon_in_ref =
        transformed(recon, registration.transform);
    for (std::size_t i = 0; i < poses.size(); ++i) {
      try {
        const CrossSection section = cross_section(
            recon_in_ref, registration.transform.apply(poses[i]));
        char name[32];
        std::snprintf(name, sizeof(name), "pose_%04zu.txt", i);
        std::ofstream out(contour_dir / name);
        for (const Vec2& p : section.contour)
          out << fmt(p.x()) << ' ' << fmt(p.y()) << '\n';
      } catch (const Error&) {
        // Missing sections are already counted in the metrics.
      }
    }
  }

  const WatertightReport report = check_watertight(recon);
  metrics.push_back({"boundary_edges",
                     static_cast<double>(report.boundary_edge_count), "count"});
  metrics.push_back(
      {"non_manifold_edges",
       static_cast<double>(report.non_manifold_edge_count), "count"});
  metrics.push_back(
      {"connected_components",
       static_cast<double>(report.connected_component_count), "count"});
  metrics.push_back({"is_watertight", report.is_watertight ? 1.0 : 0.0, ""});

  write_metrics_text(out_dir / "metrics.txt", metrics);
  write_metrics_json(out_dir / "metrics.json", metrics);
  write_config_echo(out_dir / "evaluate_config.txt", cfg.echo());
  return result;
}

void run_match(const MatchConfig& cfg, const fs::path& out_file) {
  const DescriptorMap source = read_descriptor_map(cfg.source_map);
  const DescriptorMap target = read_descriptor_map(cfg.target_map);

  std::ifstream queries(cfg.queries);
  if (!queries) throw IoError("cannot open " + cfg.queries.string());
  std::ofstream out(out_file);
  if (!out) throw IoError("cannot open " + out_file.string());

  std::string line;
  int line_no = 0;
  while (std::getline(queries, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream ss(line);
    double u, v;
    if (!(ss >> u >> v))
      throw IoError("malformed query line " + std::to_string(line_no) +
                    " in " + cfg.queries.string());
    const SubpixelMatch match =
        match_subpixel(Vec2(u, v), source, target, cfg.refine_factor);
    out << fmt(u) << ' ' << fmt(v) << ' ' << fmt(match.pixel.x()) << ' '
        << fmt(match.pixel.y()) << ' ' << fmt(match.score) << '\n';
  }
}

std::vector<std::pair<std::string, std::string>> ConsistencyConfig::echo()
    const {
  auto entries = reconstruct.echo();
  entries.emplace_back("consistency.keep", std::to_string(keep_m));
  entries.emplace_back("consistency.of", std::to_string(of_n));
  entries.emplace_back("consistency.seed", std::to_string(seed));
  entries.emplace_back("consistency.register_samples",
                       std::to_string(register_samples));
  return entries;
}

ConsistencyResult run_consistency(const ConsistencyConfig& cfg,
                                  const fs::path& out_dir) {
  fs::create_directories(out_dir);

  ReconstructConfig recon_cfg = cfg.reconstruct;
  recon_cfg.dataset_dir = cfg.dataset_dir;
  recon_cfg.keep_m = cfg.keep_m;
  recon_cfg.of_n = cfg.of_n;

  recon_cfg.seed = derive_seed(cfg.seed, "subset-a");
  const ReconstructResult a = run_reconstruct(recon_cfg, out_dir / "subset_a");
  recon_cfg.seed = derive_seed(cfg.seed, "subset-b");
  const ReconstructResult b = run_reconstruct(recon_cfg, out_dir / "subset_b");

  const auto samples = sample_surface_points(
      a.mesh, cfg.register_samples, derive_seed(cfg.seed, "register-samples"));
  const auto init = coarse_init(samples, b.mesh);
  const auto registration = register_sim3(samples, b.mesh, init, {});

  ConsistencyResult result;
  result.residuals = registration.residuals;
  result.residual_mean = registration.residuals.mean;
  result.metrics.push_back(
      {"consistency_residual_mean", registration.residuals.mean, "mm"});
  result.metrics.push_back(
      {"consistency_residual_stddev", registration.residuals.stddev, "mm"});
  result.metrics.push_back(
      {"consistency_residual_median", registration.residuals.median, "mm"});
  result.metrics.push_back(
      {"consistency_residual_max", registration.residuals.max, "mm"});
  result.metrics.push_back({"registration_scale",
                            registration.transform.scale, ""});
  write_metrics_text(out_dir / "metrics.txt", result.metrics);
  write_metrics_json(out_dir / "metrics.json", result.metrics);
  write_config_echo(out_dir / "consistency_config.txt", cfg.echo());
  return result;
}

}  // namespace cavrec
