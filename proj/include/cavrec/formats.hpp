#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "cavrec/depth_frame.hpp"
#include "cavrec/descriptor.hpp"
#include "cavrec/tsdf_volume.hpp"

namespace cavrec {

// Intrinsics text file, one line: fx fy cx cy width height.
void write_intrinsics(const std::filesystem::path& path,
                      const CameraIntrinsics& k);
CameraIntrinsics read_intrinsics(const std::filesystem::path& path);

// Depth file: magic DPTH, u32 width, u32 height, then f32 little-endian
// row-major means followed by f32 stddevs. Pose, color and intrinsics are
// carried separately.
void write_depth(const std::filesystem::path& path, const DepthFrame& frame);
// Fills width/height/mean/stddev of an allocated or empty frame.
void read_depth(const std::filesystem::path& path, DepthFrame* frame);

// Binary PPM (P6).
void write_ppm(const std::filesystem::path& path, int width, int height,
               std::span<const std::uint8_t> rgb);
void read_ppm(const std::filesystem::path& path, int* width, int* height,
              std::vector<std::uint8_t>* rgb);

// Trajectory text file: one line per frame,
// frame_id tx ty tz qx qy qz qw   (camera-to-world).
struct TrajectoryEntry {
  int frame_id = 0;
  RigidPose pose;
};
void write_trajectory(const std::filesystem::path& path,
                      std::span<const TrajectoryEntry> entries);
std::vector<TrajectoryEntry> read_trajectory(const std::filesystem::path& path);

// Descriptor map: magic DESC, u32 width, u32 height, u32 channels, then f32
// little-endian row-major channel-interleaved data.
void write_descriptor_map(const std::filesystem::path& path,
                          const DescriptorMap& map);
DescriptorMap read_descriptor_map(const std::filesystem::path& path);

// Volume dump: magic TSDF, u32 nx ny nz, f32 origin xyz, f32 voxel_size,
// then per voxel f32 tsdf, f32 weight, u8 rgb, x-fastest.
void write_tsdf_dump(const std::filesystem::path& path, const TsdfVolume& vol);
TsdfVolume read_tsdf_dump(const std::filesystem::path& path);

// Metrics report: plain-text `metric value unit` lines plus the same content
// as a single JSON object.
struct MetricEntry {
  std::string name;
  double value = 0.0;
  std::string unit;
};
void write_metrics_text(const std::filesystem::path& path,
                        std::span<const MetricEntry> metrics);
void write_metrics_json(const std::filesystem::path& path,
                        std::span<const MetricEntry> metrics);

}  // namespace cavrec
