#include "cavrec/ply_io.hpp"

#include <array>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace cavrec {

namespace {

enum class PlyType { kI8, kU8, kI16, kU16, kI32, kU32, kF32, kF64 };

PlyType parse_type(const std::string& s, const std::filesystem::path& path) {
  if (s == "char" || s == "int8") return PlyType::kI8;
  if (s == "uchar" || s == "uint8") return PlyType::kU8;
  if (s == "short" || s == "int16") return PlyType::kI16;
  if (s == "ushort" || s == "uint16") return PlyType::kU16;
  if (s == "int" || s == "int32") return PlyType::kI32;
  if (s == "uint" || s == "uint32") return PlyType::kU32;
  if (s == "float" || s == "float32") return PlyType::kF32;
  if (s == "double" || s == "float64") return PlyType::kF64;
  throw IoError("ply: unknown property type '" + s + "' in " + path.string());
}

std::size_t type_size(PlyType t) {
  switch (t) {
    case PlyType::kI8:
    case PlyType::kU8:
      return 1;
    case PlyType::kI16:
    case PlyType::kU16:
      return 2;
    case PlyType::kI32:
    case PlyType::kU32:
    case PlyType::kF32:
      return 4;
    case PlyType::kF64:
      return 8;
  }
  return 0;
}

struct PlyProperty {
  std::string name;
  PlyType type = PlyType::kF32;
  bool is_list = false;
  PlyType count_type = PlyType::kU8;
};

struct PlyElement {
  std::string name;
  std::size_t count = 0;
  std::vector<PlyProperty> properties;
};

struct PlyHeader {
  bool binary = false;
  std::vector<PlyElement> elements;
};

PlyHeader read_header(std::istream& in, const std::filesystem::path& path) {
  std::string line;
  if (!std::getline(in, line) || line.substr(0, 3) != "ply")
    throw IoError("ply: missing magic in " + path.string());

  PlyHeader header;
  bool format_seen = false;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::istringstream ss(line);
    std::string word;
    ss >> word;
    if (word == "comment" || word == "obj_info" || word.empty()) continue;
    if (word == "format") {
      std::string fmt;
      ss >> fmt;
      if (fmt == "ascii")
        header.binary = false;
      else if (fmt == "binary_little_endian")
        header.binary = true;
      else
        throw IoError("ply: unsupported format '" + fmt + "' in " +
                      path.string());
      format_seen = true;
    } else if (word == "element") {
      PlyElement element;
      ss >> element.name >> element.count;
      header.elements.push_back(element);
    } else if (word == "property") {
      if (header.elements.empty())
        throw IoError("ply: property before element in " + path.string());
      PlyProperty prop;
      std::string type_word;
      ss >> type_word;
      if (type_word == "list") {
        prop.is_list = true;
        std::string count_word, item_word;
        ss >> count_word >> item_word >> prop.name;
        prop.count_type = parse_type(count_word, path);
        prop.type = parse_type(item_word, path);
      } else {
        prop.type = parse_type(type_word, path);
        ss >> prop.name;
      }
      header.elements.back().properties.push_back(prop);
    } else if (word == "end_header") {
      if (!format_seen)
        throw IoError("ply: missing format line in " + path.string());
      return header;
    } else {
      throw IoError("ply: unexpected header token '" + word + "' in " +
                    path.string());
    }
  }
  throw IoError("ply: truncated header in " + path.string());
}

double read_binary_scalar(std::istream& in, PlyType type,
                          const std::filesystem::path& path) {
  std::array<char, 8> buf;
  in.read(buf.data(), static_cast<std::streamsize>(type_size(type)));
  if (!in)
    throw IoError("ply: truncated payload at offset " +
                  std::to_string(in.tellg()) + " in " + path.string());
  switch (type) {
    case PlyType::kI8: {
      std::int8_t v;
      std::memcpy(&v, buf.data(), 1);
      return v;
    }
    case PlyType::kU8: {
      std::uint8_t v;
      std::memcpy(&v, buf.data(), 1);
      return v;
    }
    case PlyType::kI16: {
      std::int16_t v;
      std::memcpy(&v, buf.data(), 2);
      return v;
    }
    case PlyType::kU16: {
      std::uint16_t v;
      std::memcpy(&v, buf.data(), 2);
      return v;
    }
    case PlyType::kI32: {
      std::int32_t v;
      std::memcpy(&v, buf.data(), 4);
      return v;
    }
    case PlyType::kU32: {
      std::uint32_t v;
      std::memcpy(&v, buf.data(), 4);
      return v;
    }
    case PlyType::kF32: {
      float v;
      std::memcpy(&v, buf.data(), 4);
      return v;
    }
    case PlyType::kF64: {
      double v;
      std::memcpy(&v, buf.data(), 8);
      return v;
    }
  }
  return 0.0;
}

double read_ascii_scalar(std::istream& in,
                         const std::filesystem::path& path) {
  double v;
  if (!(in >> v)) throw IoError("ply: truncated ascii payload in " + path.string());
  return v;
}

// Streams every property value of one element through the callbacks.
template <typename ScalarFn, typename ListFn>
void read_element(std::istream& in, const PlyHeader& header,
                  const PlyElement& element,
                  const std::filesystem::path& path, ScalarFn&& on_scalar,
                  ListFn&& on_list) {
  std::vector<double> list_buffer;
  for (std::size_t row = 0; row < element.count; ++row) {
    for (std::size_t p = 0; p < element.properties.size(); ++p) {
      const PlyProperty& prop = element.properties[p];
      if (!prop.is_list) {
        const double v = header.binary
                             ? read_binary_scalar(in, prop.type, path)
                             : read_ascii_scalar(in, path);
        on_scalar(row, p, v);
      } else {
        const double raw_count =
            header.binary ? read_binary_scalar(in, prop.count_type, path)
                          : read_ascii_scalar(in, path);
        const std::size_t count = static_cast<std::size_t>(raw_count);
        list_buffer.clear();
        for (std::size_t i = 0; i < count; ++i)
          list_buffer.push_back(header.binary
                                    ? read_binary_scalar(in, prop.type, path)
                                    : read_ascii_scalar(in, path));
        on_list(row, p, list_buffer);
      }
    }
  }
}

template <typename T>
void write_raw(std::ostream& out, T value) {
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

int find_property(const PlyElement& element, const std::string& name) {
  for (std::size_t i = 0; i < element.properties.size(); ++i)
    if (element.properties[i].name == name) return static_cast<int>(i);
  return -1;
}

}  // namespace

void write_mesh_ply(const std::filesystem::path& path,
                    const TriangleMesh& mesh) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");

  out << "ply\nformat binary_little_endian 1.0\n";
  out << "element vertex " << mesh.vertices.size() << "\n";
  out << "property float x\nproperty float y\nproperty float z\n";
  if (mesh.has_colors())
    out << "property uchar red\nproperty uchar green\nproperty uchar blue\n";
  out << "element face " << mesh.triangles.size() << "\n";
  out << "property list uchar uint vertex_indices\n";
  out << "end_header\n";

  for (std::size_t i = 0; i < mesh.vertices.size(); ++i) {
    for (int c = 0; c < 3; ++c)
      write_raw(out, static_cast<float>(mesh.vertices[i][c]));
    if (mesh.has_colors())
      for (int c = 0; c < 3; ++c) write_raw(out, mesh.colors[i][c]);
  }
  for (const auto& tri : mesh.triangles) {
    write_raw(out, static_cast<std::uint8_t>(3));
    for (int c = 0; c < 3; ++c) write_raw(out, tri[c]);
  }
  if (!out) throw IoError("failed writing " + path.string());
}

TriangleMesh read_mesh_ply(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  const PlyHeader header = read_header(in, path);

  TriangleMesh mesh;
  for (const PlyElement& element : header.elements) {
    if (element.name == "vertex") {
      const int px = find_property(element, "x");
      const int py = find_property(element, "y");
      const int pz = find_property(element, "z");
      if (px < 0 || py < 0 || pz < 0)
        throw IoError("ply: vertex positions missing in " + path.string());
      const int pr = find_property(element, "red");
      const int pg = find_property(element, "green");
      const int pb = find_property(element, "blue");
      const bool has_color = pr >= 0 && pg >= 0 && pb >= 0;
      mesh.vertices.assign(element.count, Vec3::Zero());
      if (has_color) mesh.colors.assign(element.count, {0, 0, 0});
      read_element(
          in, header, element, path,
          [&](std::size_t row, std::size_t p, double v) {
            const int ip = static_cast<int>(p);
            if (ip == px) mesh.vertices[row].x() = v;
            else if (ip == py) mesh.vertices[row].y() = v;
            else if (ip == pz) mesh.vertices[row].z() = v;
            else if (has_color && ip == pr)
              mesh.colors[row][0] = static_cast<std::uint8_t>(v);
            else if (has_color && ip == pg)
              mesh.colors[row][1] = static_cast<std::uint8_t>(v);
            else if (has_color && ip == pb)
              mesh.colors[row][2] = static_cast<std::uint8_t>(v);
          },
          [](std::size_t, std::size_t, const std::vector<double>&) {});
    } else if (element.name == "face") {
      mesh.triangles.reserve(element.count);
      read_element(
          in, header, element, path,
          [](std::size_t, std::size_t, double) {},
          [&](std::size_t, std::size_t, const std::vector<double>& list) {
            if (list.size() < 3) return;
            // Fan-triangulate polygonal faces.
            for (std::size_t i = 1; i + 1 < list.size(); ++i)
              mesh.triangles.push_back(
                  {static_cast<std::uint32_t>(list[0]),
                   static_cast<std::uint32_t>(list[i]),
                   static_cast<std::uint32_t>(list[i + 1])});
          });
    } else {
      // Unknown element: consume and drop.
      read_element(
          in, header, element, path,
          [](std::size_t, std::size_t, double) {},
          [](std::size_t, std::size_t, const std::vector<double>&) {});
    }
  }
  return mesh;
}

void write_sparse_cloud_ply(const std::filesystem::path& path,
                            const SparsePointCloud& cloud) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << "ply\nformat ascii 1.0\n";
  out << "element vertex " << cloud.points.size() << "\n";
  out << "property double x\nproperty double y\nproperty double z\n";
  out << "property list uint uint visibility\n";
  out << "end_header\n";
  char buf[96];
  for (std::size_t i = 0; i < cloud.points.size(); ++i) {
    const Vec3& p = cloud.points[i];
    std::snprintf(buf, sizeof(buf), "%.17g %.17g %.17g", p.x(), p.y(), p.z());
    out << buf << ' ' << cloud.visibility[i].size();
    for (std::uint32_t f : cloud.visibility[i]) out << ' ' << f;
    out << '\n';
  }
  if (!out) throw IoError("failed writing " + path.string());
}

SparsePointCloud read_sparse_cloud_ply(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  const PlyHeader header = read_header(in, path);

  SparsePointCloud cloud;
  for (const PlyElement& element : header.elements) {
    if (element.name != "vertex") {
      read_element(
          in, header, element, path,
          [](std::size_t, std::size_t, double) {},
          [](std::size_t, std::size_t, const std::vector<double>&) {});
      continue;
    }
    const int px = find_property(element, "x");
    const int py = find_property(element, "y");
    const int pz = find_property(element, "z");
    const int pvis = find_property(element, "visibility");
    if (px < 0 || py < 0 || pz < 0 || pvis < 0)
      throw IoError("ply: cloud needs x y z and visibility in " +
                    path.string());
    cloud.points.assign(element.count, Vec3::Zero());
    cloud.visibility.assign(element.count, {});
    read_element(
        in, header, element, path,
        [&](std::size_t row, std::size_t p, double v) {
          const int ip = static_cast<int>(p);
          if (ip == px) cloud.points[row].x() = v;
          else if (ip == py) cloud.points[row].y() = v;
          else if (ip == pz) cloud.points[row].z() = v;
        },
        [&](std::size_t row, std::size_t p, const std::vector<double>& list) {
          if (static_cast<int>(p) != pvis) return;
          auto& vis = cloud.visibility[row];
          vis.reserve(list.size());
          for (double v : list) vis.push_back(static_cast<std::uint32_t>(v));
        });
  }
  return cloud;
}

}  // namespace cavrec
