#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "cavrec/formats.hpp"
#include "cavrec/mesh.hpp"
#include "cavrec/phantom.hpp"
#include "cavrec/point_mesh.hpp"
#include "cavrec/registration.hpp"
#include "cavrec/render.hpp"
#include "cavrec/tsdf_volume.hpp"

namespace cavrec {

// A dataset directory holds: intrinsics.txt, trajectory.txt, cloud.ply,
// phantom.ply (ground truth), frames/frame_NNNNNN.dpth + .ppm and the
// echoed generator config.
struct Dataset {
  CameraIntrinsics intrinsics;
  std::vector<DepthFrame> frames;  // poses and colors attached
  SparsePointCloud cloud;
  std::filesystem::path root;
};

Dataset load_dataset(const std::filesystem::path& dir);

struct SynthConfig {
  PhantomSpec phantom;
  CameraIntrinsics intrinsics{150.0, 150.0, 159.5, 127.5, 320, 256};
  int n_frames = 60;
  double noise_sigma_rel = 0.01;
  double sigma_floor = 1e-3;
  int n_sparse_points = 1500;
  // Extra factor applied to the written depth maps; scale recovery in the
  // reconstruction step has to undo it.
  double depth_scale = 1.0;
  std::uint64_t seed = 0;
  int threads = 1;

  std::vector<std::pair<std::string, std::string>> echo() const;
};

// Renders a complete synthetic dataset into out_dir.
void run_synth(const SynthConfig& cfg, const std::filesystem::path& out_dir);

struct ReconstructConfig {
  std::filesystem::path dataset_dir;
  FusionConfig fusion = FusionConfig::for_voxel_size(1.0);
  double min_weight = 1e-6;
  // Keep `keep_m` of every `of_n` consecutive frames (seeded per block);
  // keep_m == of_n keeps everything.
  int keep_m = 1, of_n = 1;
  std::uint64_t seed = 0;
  bool dump_volume = false;
  int threads = 1;

  std::vector<std::pair<std::string, std::string>> echo() const;
};

struct ReconstructResult {
  TriangleMesh mesh;
  WatertightReport watertight;
  std::vector<FrameScaleLog> scales;
  std::vector<int> frames_used;
};

// Scale recovery -> fusion -> surface extraction; writes mesh.ply,
// watertight.txt, scales.txt and the echoed config into out_dir.
ReconstructResult run_reconstruct(const ReconstructConfig& cfg,
                                  const std::filesystem::path& out_dir);

struct EvaluateConfig {
  std::filesystem::path recon_mesh;
  std::filesystem::path reference_mesh;
  std::filesystem::path trajectory;
  std::filesystem::path cloud;
  RegistrationConfig registration;
  int sample_points = 10000;  // surface samples drawn from the recon mesh
  std::uint64_t seed = 0;
  bool dump_contours = false;

  std::vector<std::pair<std::string, std::string>> echo() const;
};

struct EvaluateResult {
  std::vector<MetricEntry> metrics;
  bool sections_failed = false;
};

// Sparse-agreement, reference registration, cross-section series and
// watertightness; writes metrics.txt / metrics.json into out_dir.
EvaluateResult run_evaluate(const EvaluateConfig& cfg,
                            const std::filesystem::path& out_dir);

struct MatchConfig {
  std::filesystem::path source_map;
  std::filesystem::path target_map;
  std::filesystem::path queries;  // lines: u v
  int refine_factor = 4;
};

// Writes one `u v u' v' score` line per query pixel.
void run_match(const MatchConfig& cfg, const std::filesystem::path& out_file);

struct ConsistencyConfig {
  std::filesystem::path dataset_dir;
  ReconstructConfig reconstruct;  // dataset_dir is overridden
  int keep_m = 7, of_n = 10;
  std::uint64_t seed = 0;
  int register_samples = 5000;

  std::vector<std::pair<std::string, std::string>> echo() const;
};

struct ConsistencyResult {
  double residual_mean = 0.0;
  DistanceStats residuals;
  std::vector<MetricEntry> metrics;
};

// Two reconstructions from independent keep_m-of-of_n subsamples, the first
// registered onto the second; writes both meshes and metrics into out_dir.
ConsistencyResult run_consistency(const ConsistencyConfig& cfg,
                                  const std::filesystem::path& out_dir);

// Seeded per-block frame selection: keep_m of every of_n consecutive
// indices, in ascending order.
std::vector<int> subsample_indices(int n_total, int keep_m, int of_n,
                                   std::uint64_t seed);

// Effective-config echo shared by every command.
void write_config_echo(
    const std::filesystem::path& path,
    std::span<const std::pair<std::string, std::string>> entries);

}  // namespace cavrec
