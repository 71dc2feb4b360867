#pragma once

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "semmap/core/error.hpp"
#include "semmap/map/palette.hpp"
#include "semmap/map/semantic_map.hpp"

namespace semmap {

enum class ColorMode { kSemantic, kRgb };
enum class PlyFormat { kAscii, kBinaryLittleEndian };

using Triangle = std::array<int, 3>;

namespace detail {

struct Planar {
  double x;
  double y;
};

inline double Cross2(const Planar& o, const Planar& a, const Planar& b) {
  return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
}

// Projects a planar 3D polygon onto the coordinate plane that best preserves
// its area; the result is oriented counter-clockwise.
inline std::vector<Planar> ProjectToPlane(std::span<const Point3> poly) {
  Eigen::Vector3d normal = Eigen::Vector3d::Zero();
  const std::size_t n = poly.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Point3& a = poly[i];
    const Point3& b = poly[(i + 1) % n];
    normal.x() += (a.y() - b.y()) * (a.z() + b.z());
    normal.y() += (a.z() - b.z()) * (a.x() + b.x());
    normal.z() += (a.x() - b.x()) * (a.y() + b.y());
  }
  int drop = 0;
  normal.cwiseAbs().maxCoeff(&drop);
  const int ax = (drop + 1) % 3;
  const int ay = (drop + 2) % 3;
  std::vector<Planar> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = {poly[i][ax], poly[i][ay]};
  double area = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    area += out[i].x * out[(i + 1) % n].y - out[(i + 1) % n].x * out[i].y;
  }
  if (area < 0.0) {
    for (Planar& p : out) p.y = -p.y;
  }
  return out;
}

inline bool IsConvex(const std::vector<Planar>& pts) {
  const std::size_t n = pts.size();
  for (std::size_t i = 0; i < n; ++i) {
    if (Cross2(pts[i], pts[(i + 1) % n], pts[(i + 2) % n]) < 0.0) return false;
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (pts[i].x == pts[j].x && pts[i].y == pts[j].y) return false;
    }
  }
  return true;
}

inline bool StrictlyInside(const Planar& p, const Planar& a, const Planar& b,
                           const Planar& c) {
  return Cross2(a, b, p) > 0.0 && Cross2(b, c, p) > 0.0 &&
         Cross2(c, a, p) > 0.0;
}

}  // namespace detail

// Fan triangulation for convex polygons, ear clipping otherwise. Always
// returns n - 2 triangles of indices into the polygon.
inline std::vector<Triangle> TriangulatePolygon(std::span<const Point3> poly) {
  std::vector<Triangle> tris;
  const int n = static_cast<int>(poly.size());
  if (n < 3) return tris;
  tris.reserve(n - 2);
  const std::vector<detail::Planar> pts = detail::ProjectToPlane(poly);
  if (detail::IsConvex(pts)) {
    for (int i = 1; i + 1 < n; ++i) tris.push_back({0, i, i + 1});
    return tris;
  }

  std::vector<int> ring(n);
  for (int i = 0; i < n; ++i) ring[i] = i;
  auto is_ear = [&](std::size_t i, bool allow_flat) {
    const std::size_t m = ring.size();
    const int a = ring[(i + m - 1) % m];
    const int b = ring[i];
    const int c = ring[(i + 1) % m];
    const double turn = detail::Cross2(pts[a], pts[b], pts[c]);
    if (allow_flat ? turn < 0.0 : turn <= 0.0) return false;
    for (std::size_t j = 0; j < m; ++j) {
      const int q = ring[j];
      if (q == a || q == b || q == c) continue;
      const detail::Planar& p = pts[q];
      if ((p.x == pts[a].x && p.y == pts[a].y) ||
          (p.x == pts[b].x && p.y == pts[b].y) ||
          (p.x == pts[c].x && p.y == pts[c].y)) {
        continue;
      }
      if (detail::StrictlyInside(p, pts[a], pts[b], pts[c])) return false;
    }
    return true;
  };
  while (ring.size() > 3) {
    const std::size_t m = ring.size();
    std::size_t ear = m;
    for (std::size_t i = 0; i < m && ear == m; ++i) {
      if (is_ear(i, false)) ear = i;
    }
    for (std::size_t i = 0; i < m && ear == m; ++i) {
      if (is_ear(i, true)) ear = i;
    }
    if (ear == m) ear = 0;  // numerically stuck; clip anyway
    tris.push_back({ring[(ear + m - 1) % m], ring[ear], ring[(ear + 1) % m]});
    ring.erase(ring.begin() + static_cast<std::ptrdiff_t>(ear));
  }
  tris.push_back({ring[0], ring[1], ring[2]});
  return tris;
}

namespace detail {

template <typename T>
void WriteLittleEndian(std::ostream& out, T value) {
  static_assert(std::endian::native == std::endian::little ||
                std::endian::native == std::endian::big);
  std::array<char, sizeof(T)> bytes;
  std::memcpy(bytes.data(), &value, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) {
    std::reverse(bytes.begin(), bytes.end());
  }
  out.write(bytes.data(), sizeof(T));
}

}  // namespace detail

// Writes the map as a PLY 1.0 triangle mesh with per-vertex colour. Polygons
// are emitted in (frame_id, superpixel_id) order and do not share vertices.
inline void WritePly(std::ostream& out, const SemanticMap& map,
                     ColorMode color_mode, const Palette& palette,
                     PlyFormat format) {
  if (map.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "cannot export an empty map");
  }
  const auto ordered = map.Ordered();
  std::size_t vertex_count = 0;
  std::size_t face_count = 0;
  for (const MapPolygon3D* p : ordered) {
    vertex_count += p->vertices.size();
    face_count += p->vertices.size() - 2;
  }

  out << "ply\n"
      << (format == PlyFormat::kAscii ? "format ascii 1.0\n"
                                      : "format binary_little_endian 1.0\n")
      << "comment semmap semantic polygon map\n"
      << "element vertex " << vertex_count << "\n"
      << "property float x\nproperty float y\nproperty float z\n"
      << "property uchar red\nproperty uchar green\nproperty uchar blue\n"
      << "element face " << face_count << "\n"
      << "property list uchar int vertex_indices\n"
      << "end_header\n";

  auto color_of = [&](const MapPolygon3D& p) {
    return color_mode == ColorMode::kSemantic ? palette.Color(p.semantic_label)
                                              : p.rgb;
  };
  char buf[128];
  for (const MapPolygon3D* p : ordered) {
    const auto rgb = color_of(*p);
    for (const Point3& v : p->vertices) {
      const float x = static_cast<float>(v.x());
      const float y = static_cast<float>(v.y());
      const float z = static_cast<float>(v.z());
      if (format == PlyFormat::kAscii) {
        std::snprintf(buf, sizeof(buf), "%.9g %.9g %.9g %u %u %u\n", x, y, z,
                      rgb[0], rgb[1], rgb[2]);
        out << buf;
      } else {
        detail::WriteLittleEndian(out, x);
        detail::WriteLittleEndian(out, y);
        detail::WriteLittleEndian(out, z);
        out.write(reinterpret_cast<const char*>(rgb.data()), 3);
      }
    }
  }
  std::int32_t base = 0;
  for (const MapPolygon3D* p : ordered) {
    for (const Triangle& t : TriangulatePolygon(p->vertices)) {
      if (format == PlyFormat::kAscii) {
        out << "3 " << base + t[0] << ' ' << base + t[1] << ' ' << base + t[2]
            << '\n';
      } else {
        out.put(3);
        for (const int i : t) detail::WriteLittleEndian<std::int32_t>(out, base + i);
      }
    }
    base += static_cast<std::int32_t>(p->vertices.size());
  }
}

inline void ExportPly(const SemanticMap& map, ColorMode color_mode,
                      const Palette& palette, const std::string& path,
                      PlyFormat format = PlyFormat::kBinaryLittleEndian) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIo, "cannot open " + path + " for writing");
  WritePly(out, map, color_mode, palette, format);
  out.flush();
  if (!out) throw Error(ErrorCode::kIo, "failed writing " + path);
}

}  // namespace semmap
