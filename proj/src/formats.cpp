#include "cavrec/formats.hpp"

#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace cavrec {

namespace {

void require(bool ok, const std::string& message) {
  if (!ok) throw IoError(message);
}

template <typename T>
void write_raw(std::ostream& out, T value) {
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T read_raw(std::istream& in, const std::filesystem::path& path) {
  T value;
  in.read(reinterpret_cast<char*>(&value), sizeof(T));
  require(static_cast<bool>(in), "truncated read at offset " +
                                     std::to_string(in.tellg()) + " in " +
                                     path.string());
  return value;
}

void check_magic(std::istream& in, const char* magic,
                 const std::filesystem::path& path) {
  char buf[4];
  in.read(buf, 4);
  require(static_cast<bool>(in) && std::memcmp(buf, magic, 4) == 0,
          "bad magic (expected " + std::string(magic, 4) + ") in " +
              path.string());
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

void write_intrinsics(const std::filesystem::path& path,
                      const CameraIntrinsics& k) {
  std::ofstream out(path);
  require(static_cast<bool>(out), "cannot open " + path.string());
  out << format_double(k.fx) << ' ' << format_double(k.fy) << ' '
      << format_double(k.cx) << ' ' << format_double(k.cy) << ' ' << k.width
      << ' ' << k.height << '\n';
  require(static_cast<bool>(out), "failed writing " + path.string());
}

CameraIntrinsics read_intrinsics(const std::filesystem::path& path) {
  std::ifstream in(path);
  require(static_cast<bool>(in), "cannot open " + path.string());
  CameraIntrinsics k;
  in >> k.fx >> k.fy >> k.cx >> k.cy >> k.width >> k.height;
  require(static_cast<bool>(in), "malformed intrinsics file " + path.string());
  k.validate();
  return k;
}

void write_depth(const std::filesystem::path& path, const DepthFrame& frame) {
  std::ofstream out(path, std::ios::binary);
  require(static_cast<bool>(out), "cannot open " + path.string());
  out.write("DPTH", 4);
  write_raw(out, static_cast<std::uint32_t>(frame.width));
  write_raw(out, static_cast<std::uint32_t>(frame.height));
  for (double v : frame.mean) write_raw(out, static_cast<float>(v));
  for (double v : frame.stddev) write_raw(out, static_cast<float>(v));
  require(static_cast<bool>(out), "failed writing " + path.string());
}

void read_depth(const std::filesystem::path& path, DepthFrame* frame) {
  std::ifstream in(path, std::ios::binary);
  require(static_cast<bool>(in), "cannot open " + path.string());
  check_magic(in, "DPTH", path);
  frame->width = static_cast<int>(read_raw<std::uint32_t>(in, path));
  frame->height = static_cast<int>(read_raw<std::uint32_t>(in, path));
  const std::size_t n =
      static_cast<std::size_t>(frame->width) * frame->height;
  require(n > 0, "empty depth raster in " + path.string());
  frame->mean.resize(n);
  frame->stddev.resize(n);
  for (std::size_t i = 0; i < n; ++i)
    frame->mean[i] = read_raw<float>(in, path);
  for (std::size_t i = 0; i < n; ++i)
    frame->stddev[i] = read_raw<float>(in, path);
}

void write_ppm(const std::filesystem::path& path, int width, int height,
               std::span<const std::uint8_t> rgb) {
  require(rgb.size() == static_cast<std::size_t>(width) * height * 3,
          "ppm: rgb buffer size mismatch for " + path.string());
  std::ofstream out(path, std::ios::binary);
  require(static_cast<bool>(out), "cannot open " + path.string());
  out << "P6\n" << width << ' ' << height << "\n255\n";
  out.write(reinterpret_cast<const char*>(rgb.data()),
            static_cast<std::streamsize>(rgb.size()));
  require(static_cast<bool>(out), "failed writing " + path.string());
}

void read_ppm(const std::filesystem::path& path, int* width, int* height,
              std::vector<std::uint8_t>* rgb) {
  std::ifstream in(path, std::ios::binary);
  require(static_cast<bool>(in), "cannot open " + path.string());
  std::string magic;
  int maxval = 0;
  in >> magic >> *width >> *height >> maxval;
  require(magic == "P6" && *width > 0 && *height > 0 && maxval == 255,
          "unsupported ppm header in " + path.string());
  in.get();  // single whitespace after maxval
  rgb->resize(static_cast<std::size_t>(*width) * *height * 3);
  in.read(reinterpret_cast<char*>(rgb->data()),
          static_cast<std::streamsize>(rgb->size()));
  require(static_cast<bool>(in), "truncated ppm payload in " + path.string());
}

void write_trajectory(const std::filesystem::path& path,
                      std::span<const TrajectoryEntry> entries) {
  std::ofstream out(path);
  require(static_cast<bool>(out), "cannot open " + path.string());
  for (const TrajectoryEntry& e : entries) {
    const Vec3& t = e.pose.translation;
    const Quat& q = e.pose.rotation;
    out << e.frame_id << ' ' << format_double(t.x()) << ' '
        << format_double(t.y()) << ' ' << format_double(t.z()) << ' '
        << format_double(q.x()) << ' ' << format_double(q.y()) << ' '
        << format_double(q.z()) << ' ' << format_double(q.w()) << '\n';
  }
  require(static_cast<bool>(out), "failed writing " + path.string());
}

std::vector<TrajectoryEntry> read_trajectory(
    const std::filesystem::path& path) {
  std::ifstream in(path);
  require(static_cast<bool>(in), "cannot open " + path.string());
  std::vector<TrajectoryEntry> entries;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream ss(line);
    TrajectoryEntry e;
    double qx, qy, qz, qw;
    ss >> e.frame_id >> e.pose.translation.x() >> e.pose.translation.y() >>
        e.pose.translation.z() >> qx >> qy >> qz >> qw;
    require(static_cast<bool>(ss), "malformed trajectory line " +
                                       std::to_string(line_no) + " in " +
                                       path.string());
    e.pose.rotation = Quat(qw, qx, qy, qz).normalized();
    entries.push_back(e);
  }
  return entries;
}

void write_descriptor_map(const std::filesystem::path& path,
                          const DescriptorMap& map) {
  std::ofstream out(path, std::ios::binary);
  require(static_cast<bool>(out), "cannot open " + path.string());
  out.write("DESC", 4);
  write_raw(out, static_cast<std::uint32_t>(map.width()));
  write_raw(out, static_cast<std::uint32_t>(map.height()));
  write_raw(out, static_cast<std::uint32_t>(map.channels()));
  out.write(reinterpret_cast<const char*>(map.data().data()),
            static_cast<std::streamsize>(map.data().size() * sizeof(float)));
  require(static_cast<bool>(out), "failed writing " + path.string());
}

DescriptorMap read_descriptor_map(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  require(static_cast<bool>(in), "cannot open " + path.string());
  check_magic(in, "DESC", path);
  const auto width = read_raw<std::uint32_t>(in, path);
  const auto height = read_raw<std::uint32_t>(in, path);
  const auto channels = read_raw<std::uint32_t>(in, path);
  DescriptorMap map(static_cast<int>(width), static_cast<int>(height),
                    static_cast<int>(channels));
  in.read(reinterpret_cast<char*>(map.data().data()),
          static_cast<std::streamsize>(map.data().size() * sizeof(float)));
  require(static_cast<bool>(in), "truncated descriptor payload in " +
                                     path.string());
  return map;
}

void write_tsdf_dump(const std::filesystem::path& path,
                     const TsdfVolume& vol) {
  std::ofstream out(path, std::ios::binary);
  require(static_cast<bool>(out), "cannot open " + path.string());
  out.write("TSDF", 4);
  write_raw(out, static_cast<std::uint32_t>(vol.nx()));
  write_raw(out, static_cast<std::uint32_t>(vol.ny()));
  write_raw(out, static_cast<std::uint32_t>(vol.nz()));
  for (int c = 0; c < 3; ++c)
    write_raw(out, static_cast<float>(vol.origin()[c]));
  write_raw(out, static_cast<float>(vol.voxel_size()));
  for (std::size_t i = 0; i < vol.voxel_count(); ++i) {
    write_raw(out, vol.tsdf_at(i));
    write_raw(out, vol.weight_at(i));
    const auto rgb = vol.color_at(i);
    for (int c = 0; c < 3; ++c) {
      const long q = std::lround(rgb[c]);
      write_raw(out, static_cast<std::uint8_t>(q < 0 ? 0 : q > 255 ? 255 : q));
    }
  }
  require(static_cast<bool>(out), "failed writing " + path.string());
}

TsdfVolume read_tsdf_dump(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  require(static_cast<bool>(in), "cannot open " + path.string());
  check_magic(in, "TSDF", path);
  const auto nx = read_raw<std::uint32_t>(in, path);
  const auto ny = read_raw<std::uint32_t>(in, path);
  const auto nz = read_raw<std::uint32_t>(in, path);
  Vec3 origin;
  for (int c = 0; c < 3; ++c) origin[c] = read_raw<float>(in, path);
  const float voxel_size = read_raw<float>(in, path);
  TsdfVolume vol(origin, voxel_size, static_cast<int>(nx),
                 static_cast<int>(ny), static_cast<int>(nz));
  for (std::size_t i = 0; i < vol.voxel_count(); ++i) {
    const float tsdf = read_raw<float>(in, path);
    const float weight = read_raw<float>(in, path);
    std::array<float, 3> rgb;
    for (int c = 0; c < 3; ++c)
      rgb[c] = static_cast<float>(read_raw<std::uint8_t>(in, path));
    vol.set_voxel(i, tsdf, weight, rgb);
  }
  return vol;
}

void write_metrics_text(const std::filesystem::path& path,
                        std::span<const MetricEntry> metrics) {
  std::ofstream out(path);
  require(static_cast<bool>(out), "cannot open " + path.string());
  for (const MetricEntry& m : metrics)
    out << m.name << ' ' << format_double(m.value) << ' ' << m.unit << '\n';
  require(static_cast<bool>(out), "failed writing " + path.string());
}

void write_metrics_json(const std::filesystem::path& path,
                        std::span<const MetricEntry> metrics) {
  nlohmann::ordered_json root;
  for (const MetricEntry& m : metrics)
    root[m.name] = {{"value", m.value}, {"unit", m.unit}};
  std::ofstream out(path);
  require(static_cast<bool>(out), "cannot open " + path.string());
  out << root.dump(2) << '\n';
  require(static_cast<bool>(out), "failed writing " + path.string());
}

}  // namespace cavrec
