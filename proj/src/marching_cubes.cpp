#include "cavrec/marching_cubes.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <unordered_map>

namespace cavrec {

namespace {

// Cube corners:        Cube edges (by corner pair):
//   0:(0,0,0) 1:(1,0,0)    0:(0,1) 1:(1,2)  2:(2,3)  3:(3,0)   bottom ring
//   2:(1,1,0) 3:(0,1,0)    4:(4,5) 5:(5,6)  6:(6,7)  7:(7,4)   top ring
//   4:(0,0,1) 5:(1,0,1)    8:(0,4) 9:(1,5) 10:(2,6) 11:(3,7)   verticals
//   6:(1,1,1) 7:(0,1,1)
constexpr int kEdgeCorners[12][2] = {{0, 1}, {1, 2}, {2, 3}, {3, 0},
                                     {4, 5}, {5, 6}, {6, 7}, {7, 4},
                                     {0, 4}, {1, 5}, {2, 6}, {3, 7}};

// Grid anchor of each edge: offset of the lower corner plus the edge axis.
constexpr int kEdgeAnchor[12][4] = {
    {0, 0, 0, 0}, {1, 0, 0, 1}, {0, 1, 0, 0}, {0, 0, 0, 1},
    {0, 0, 1, 0}, {1, 0, 1, 1}, {0, 1, 1, 0}, {0, 0, 1, 1},
    {0, 0, 0, 2}, {1, 0, 0, 2}, {1, 1, 0, 2}, {0, 1, 0, 2}};

// Face corner cycles, counter-clockwise seen from outside the cube.
constexpr int kFaces[6][4] = {{0, 3, 2, 1}, {4, 5, 6, 7}, {0, 1, 5, 4},
                              {3, 7, 6, 2}, {0, 4, 7, 3}, {1, 2, 6, 5}};

int edge_between(int a, int b) {
  for (int e = 0; e < 12; ++e) {
    if ((kEdgeCorners[e][0] == a && kEdgeCorners[e][1] == b) ||
        (kEdgeCorners[e][0] == b && kEdgeCorners[e][1] == a))
      return e;
  }
  return -1;
}

bool edge_on_face(int edge, const int* face) {
  int hits = 0;
  for (int c = 0; c < 4; ++c)
    hits += (face[c] == kEdgeCorners[edge][0]) +
            (face[c] == kEdgeCorners[edge][1]);
  return hits == 2;
}

bool edges_share_face(int a, int b) {
  for (const auto& face : kFaces)
    if (edge_on_face(a, face) && edge_on_face(b, face)) return true;
  return false;
}

using TriRow = std::array<std::int8_t, 16>;

// Builds the 256-entry triangulation table by tracing the isocontour over
// the cube faces. On each face, contour segments run from the cycle edge
// where the walk leaves the inside region to the crossing found scanning
// backward, which cuts every inside corner run off separately. That pairing
// depends only on the face's own sign pattern, so the two cubes sharing a
// face always agree and the extracted surface has no cracks. Ambiguous
// faces (diagonal sign patterns) are resolved by the same fixed rule.
std::array<TriRow, 256> build_tri_table() {
  std::array<TriRow, 256> table{};
  for (int code = 0; code < 256; ++code) {
    TriRow& row = table[code];
    row.fill(-1);

    bool inside[8];
    for (int c = 0; c < 8; ++c) inside[c] = (code >> c) & 1;

    int next_edge[12];
    int in_degree[12] = {0};
    std::fill(std::begin(next_edge), std::end(next_edge), -1);

    for (const auto& face : kFaces) {
      for (int i = 0; i < 4; ++i) {
        const int a = face[i];
        const int b = face[(i + 1) % 4];
        if (!(inside[a] && !inside[b])) continue;  // not an exit crossing
        for (int step = 1; step <= 3; ++step) {
          const int j = (i + 4 - step) % 4;
          const int pa = face[j];
          const int pb = face[(j + 1) % 4];
          if (inside[pa] == inside[pb]) continue;
          const int from = edge_between(a, b);
          const int to = edge_between(pa, pb);
          next_edge[from] = to;
          ++in_degree[to];
          break;
        }
      }
    }

    // Each crossed edge must chain to exactly one successor.
    for (int e = 0; e < 12; ++e) {
      const bool crossed =
          inside[kEdgeCorners[e][0]] != inside[kEdgeCorners[e][1]];
      if (crossed != (next_edge[e] >= 0) || (crossed && in_degree[e] != 1))
        throw Error("marching cubes: inconsistent case table");
    }

    int out = 0;
    bool emitted[12] = {false};
    for (int start = 0; start < 12; ++start) {
      if (next_edge[start] < 0 || emitted[start]) continue;
      std::array<int, 12> poly{};
      int len = 0;
      int e = start;
      do {
        poly[len++] = e;
        emitted[e] = true;
        e = next_edge[e];
      } while (e != start);
      // Traced polygons wind toward the inside; reverse for a
      // counter-clockwise order seen from the positive side.
      std::reverse(poly.begin(), poly.begin() + len);

      // Fan from an apex whose diagonals never lie inside a cube face:
      // a diagonal coplanar with an ambiguous face can coincide with the
      // neighbor cube's diagonal and pinch the surface there.
      int apex = 0;
      for (int r = 0; r < len; ++r) {
        bool clean = true;
        for (int j = 0; clean && j < len; ++j) {
          if (j == r || j == (r + 1) % len || j == (r + len - 1) % len)
            continue;
          clean = !edges_share_face(poly[r], poly[j]);
        }
        if (clean) {
          apex = r;
          break;
        }
      }
      for (int t = 1; t + 1 < len; ++t) {
        if (out + 3 > 15)
          throw Error("marching cubes: case exceeds 5 triangles");
        row[out++] = static_cast<std::int8_t>(poly[apex]);
        row[out++] = static_cast<std::int8_t>(poly[(apex + t) % len]);
        row[out++] = static_cast<std::int8_t>(poly[(apex + t + 1) % len]);
      }
    }
  }
  return table;
}

const std::array<TriRow, 256>& tri_table() {
  static const std::array<TriRow, 256> table = build_tri_table();
  return table;
}

}  // namespace

TriangleMesh marching_cubes(const TsdfVolume& vol, double min_weight) {
  if (vol.nx() < 2 || vol.ny() < 2 || vol.nz() < 2)
    throw EmptyVolume("marching_cubes: need at least 2 voxels per axis");

  const auto& table = tri_table();
  const int nx = vol.nx(), ny = vol.ny(), nz = vol.nz();

  TriangleMesh mesh;
  std::unordered_map<std::uint64_t, std::uint32_t> edge_vertex;

  // Welds by global edge id: 3 * linear grid index + axis.
  const auto global_edge = [&](int i, int j, int k, int e) {
    const std::uint64_t gx = static_cast<std::uint64_t>(i + kEdgeAnchor[e][0]);
    const std::uint64_t gy = static_cast<std::uint64_t>(j + kEdgeAnchor[e][1]);
    const std::uint64_t gz = static_cast<std::uint64_t>(k + kEdgeAnchor[e][2]);
    return 3 * (gx + static_cast<std::uint64_t>(nx) *
                         (gy + static_cast<std::uint64_t>(ny) * gz)) +
           kEdgeAnchor[e][3];
  };

  std::size_t corner_idx[8];
  double corner_val[8];
  for (int k = 0; k + 1 < nz; ++k) {
    for (int j = 0; j + 1 < ny; ++j) {
      for (int i = 0; i + 1 < nx; ++i) {
        bool observed = true;
        int code = 0;
        for (int c = 0; c < 8; ++c) {
          const int ci = i + ((c == 1 || c == 2 || c == 5 || c == 6) ? 1 : 0);
          const int cj = j + ((c == 2 || c == 3 || c == 6 || c == 7) ? 1 : 0);
          const int ck = k + (c >= 4 ? 1 : 0);
          const std::size_t idx = vol.index(ci, cj, ck);
          if (vol.weight_at(idx) < min_weight) {
            observed = false;
            break;
          }
          corner_idx[c] = idx;
          corner_val[c] = vol.tsdf_at(idx);
          if (corner_val[c] < 0.0) code |= 1 << c;
        }
        if (!observed || code == 0 || code == 255) continue;

        const TriRow& row = table[code];
        for (int t = 0; t < 16 && row[t] >= 0; t += 3) {
          std::uint32_t tri[3];
          for (int v = 0; v < 3; ++v) {
            const int e = row[t + v];
            const std::uint64_t key = global_edge(i, j, k, e);
            auto it = edge_vertex.find(key);
            if (it == edge_vertex.end()) {
              const int ca = kEdgeCorners[e][0];
              const int cb = kEdgeCorners[e][1];
              const double va = corner_val[ca];
              const double vb = corner_val[cb];
              double mu = va - vb;
              mu = std::abs(mu) > 0.0 ? std::clamp(va / mu, 0.0, 1.0) : 0.5;

              const Vec3 pa = vol.voxel_center(
                  i + ((ca == 1 || ca == 2 || ca == 5 || ca == 6) ? 1 : 0),
                  j + ((ca == 2 || ca == 3 || ca == 6 || ca == 7) ? 1 : 0),
                  k + (ca >= 4 ? 1 : 0));
              const Vec3 pb = vol.voxel_center(
                  i + ((cb == 1 || cb == 2 || cb == 5 || cb == 6) ? 1 : 0),
                  j + ((cb == 2 || cb == 3 || cb == 6 || cb == 7) ? 1 : 0),
                  k + (cb >= 4 ? 1 : 0));
              const auto col_a = vol.color_at(corner_idx[ca]);
              const auto col_b = vol.color_at(corner_idx[cb]);

              const std::uint32_t new_index =
                  static_cast<std::uint32_t>(mesh.vertices.size());
              mesh.vertices.push_back(pa + mu * (pb - pa));
              std::array<std::uint8_t, 3> rgb;
              for (int c = 0; c < 3; ++c) {
                const double value = col_a[c] + mu * (col_b[c] - col_a[c]);
                rgb[c] = static_cast<std::uint8_t>(
                    std::clamp(std::lround(value), 0l, 255l));
              }
              mesh.colors.push_back(rgb);
              edge_vertex.emplace(key, new_index);
              tri[v] = new_index;
            } else {
              tri[v] = it->second;
            }
          }
          if (tri[0] != tri[1] && tri[1] != tri[2] && tri[0] != tri[2])
            mesh.triangles.push_back({tri[0], tri[1], tri[2]});
        }
      }
    }
  }
  return mesh;
}

}  // namespace cavrec
