#pragma once

// Straight-loop reference implementations used only by the tests. They are
// written independently of the library code paths they check.

#include <algorithm>
#include <cmath>
#include <array>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <map>
#include <optional>
#include <queue>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "semmap/core/image_grid.hpp"
#include "semmap/polygonize/polygonize.hpp"

namespace oracle {

using semmap::DepthMap;
using semmap::LabelMap;
using semmap::ValidityMask;

// Two-pass form: variance of d plus half the squared mean.
inline double ScaleInvariant(const DepthMap& pred, const DepthMap& gt,
                             const ValidityMask& mask) {
  std::vector<double> d;
  for (int v = 0; v < gt.height(); ++v)
    for (int u = 0; u < gt.width(); ++u)
      if (mask(u, v)) d.push_back(std::log(pred(u, v) / gt(u, v)));
  double mean = 0.0;
  for (double x : d) mean += x;
  mean /= d.size();
  double var = 0.0;
  for (double x : d) var += (x - mean) * (x - mean);
  var /= d.size();
  return var + 0.5 * mean * mean;
}

inline double CrossEntropy(const semmap::ImageGrid<double>& probs,
                           const LabelMap& gt, const ValidityMask& mask) {
  double total = 0.0;
  int n = 0;
  for (int v = 0; v < gt.height(); ++v)
    for (int u = 0; u < gt.width(); ++u) {
      if (!mask(u, v) || gt(u, v) == 255) continue;
      total += -std::log(std::max(probs(u, v, gt(u, v)), 1e-12));
      ++n;
    }
  return total / n;
}

struct Depth {
  double mean_error, rms, abs_rel, sq_rel, d1, d2, d3;
};

inline Depth DepthMetrics(const DepthMap& pred, const DepthMap& gt,
                          const ValidityMask& mask) {
  std::vector<std::pair<double, double>> pairs;
  for (int v = 0; v < gt.height(); ++v)
    for (int u = 0; u < gt.width(); ++u)
      if (mask(u, v)) pairs.emplace_back(pred(u, v), gt(u, v));
  Depth m{};
  for (auto [p, g] : pairs) {
    m.mean_error += std::abs(p - g);
    m.rms += (p - g) * (p - g);
    m.abs_rel += std::abs(p - g) / g;
    m.sq_rel += (p - g) * (p - g) / g;
    const double r = p > g ? p / g : g / p;
    m.d1 += r < 1.25;
    m.d2 += r < 1.25 * 1.25;
    m.d3 += r < 1.25 * 1.25 * 1.25;
  }
  const double n = static_cast<double>(pairs.size());
  m.mean_error /= n;
  m.rms = std::sqrt(m.rms / n);
  m.abs_rel /= n;
  m.sq_rel /= n;
  m.d1 /= n;
  m.d2 /= n;
  m.d3 /= n;
  return m;
}

// Per-class intersection and union counted pixel by pixel, one class at a
// time. Ground-truth ignore pixels drop out entirely.
inline std::vector<std::optional<double>> ClassIou(const LabelMap& pred,
                                                   const LabelMap& gt,
                                                   int num_classes,
                                                   const std::vector<int>& map) {
  auto cat = [&](int label) { return map.empty() ? label : map[label]; };
  int cats = num_classes;
  if (!map.empty()) cats = *std::max_element(map.begin(), map.end()) + 1;
  std::vector<std::optional<double>> out(cats);
  for (int c = 0; c < cats; ++c) {
    std::size_t inter = 0, uni = 0;
    for (std::size_t i = 0; i < gt.pixel_count(); ++i) {
      if (gt.at_index(i) == 255) continue;
      const bool in_gt = cat(gt.at_index(i)) == c;
      const bool in_pred = pred.at_index(i) != 255 && cat(pred.at_index(i)) == c;
      inter += in_gt && in_pred;
      uni += in_gt || in_pred;
    }
    if (uni > 0) out[c] = static_cast<double>(inter) / static_cast<double>(uni);
  }
  return out;
}

inline double MeanOf(const std::vector<std::optional<double>>& v) {
  double s = 0.0;
  int n = 0;
  for (const auto& x : v)
    if (x) {
      s += *x;
      ++n;
    }
  return n ? s / n : 0.0;
}

// Least squares of depth = a u + b v + c through the SVD pseudoinverse of the
// design matrix.
inline Eigen::Vector3d PlaneLeastSquares(const std::vector<double>& u,
                                         const std::vector<double>& v,
                                         const std::vector<double>& d) {
  Eigen::MatrixXd a(u.size(), 3);
  Eigen::VectorXd b(u.size());
  for (std::size_t i = 0; i < u.size(); ++i) {
    a(i, 0) = u[i];
    a(i, 1) = v[i];
    a(i, 2) = 1.0;
    b(i) = d[i];
  }
  return a.completeOrthogonalDecomposition().pseudoInverse() * b;
}

// Flood fill (4-neighbour): number of components of each id.
template <typename T>
std::map<T, int> ComponentCounts(const semmap::ImageGrid<T>& grid) {
  std::vector<char> seen(grid.pixel_count(), 0);
  std::map<T, int> count;
  const int w = grid.width(), h = grid.height();
  for (int start = 0; start < w * h; ++start) {
    if (seen[start]) continue;
    const T id = grid.at_index(start);
    ++count[id];
    std::queue<int> q;
    q.push(start);
    seen[start] = 1;
    while (!q.empty()) {
      const int p = q.front();
      q.pop();
      const int pu = p % w, pv = p / w;
      const int nb[4][2] = {{1, 0}, {-1, 0}, {0, 1}, {0, -1}};
      for (auto& d : nb) {
        const int nu = pu + d[0], nv = pv + d[1];
        if (nu < 0 || nv < 0 || nu >= w || nv >= h) continue;
        const int ni = nv * w + nu;
        if (seen[ni] || grid.at_index(ni) != id) continue;
        seen[ni] = 1;
        q.push(ni);
      }
    }
  }
  return count;
}

// Winding number of the pixel centre, computed edge by edge.
inline bool PointInPolygon(const semmap::Polygon2D& poly, double x, double y) {
  int winding = 0;
  const auto& p = poly.vertices;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const auto& a = p[i];
    const auto& b = p[(i + 1) % p.size()];
    const double cross = (b.u - a.u) * (y - a.v) - (x - a.u) * (b.v - a.v);
    if (a.v <= y) {
      if (b.v > y && cross > 0) ++winding;
    } else if (b.v <= y && cross < 0) {
      --winding;
    }
  }
  return winding != 0;
}

inline std::vector<std::int64_t> RasterizeBrute(const semmap::Polygon2D& poly,
                                                int w, int h) {
  std::vector<std::int64_t> out;
  for (int v = 0; v < h; ++v)
    for (int u = 0; u < w; ++u)
      if (PointInPolygon(poly, u, v)) out.push_back(std::int64_t(v) * w + u);
  return out;
}

inline double SegmentDistance(double px, double py, double ax, double ay,
                              double bx, double by) {
  const double dx = bx - ax, dy = by - ay;
  const double len2 = dx * dx + dy * dy;
  double t = len2 > 0 ? ((px - ax) * dx + (py - ay) * dy) / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  return std::hypot(px - ax - t * dx, py - ay - t * dy);
}

inline double DistanceToPolygon(const semmap::Polygon2D& poly, double x,
                                double y) {
  double best = 1e300;
  const auto& p = poly.vertices;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const auto& a = p[i];
    const auto& b = p[(i + 1) % p.size()];
    best = std::min(best, SegmentDistance(x, y, a.u, a.v, b.u, b.v));
  }
  return best;
}

// Minimal PLY reader (ascii and binary_little_endian) for the exact layout
// float x y z, uchar rgb, face list uchar/int.
struct PlyMesh {
  std::vector<std::array<float, 3>> xyz;
  std::vector<std::array<int, 3>> rgb;
  std::vector<std::vector<int>> faces;
};

inline PlyMesh ReadPly(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::string line;
  std::getline(in, line);
  if (line != "ply") throw std::runtime_error("missing magic");
  bool binary = false;
  std::size_t nv = 0, nf = 0;
  std::vector<std::string> vprops;
  std::string current;
  while (std::getline(in, line)) {
    if (line == "end_header") break;
    std::istringstream ls(line);
    std::string kw;
    ls >> kw;
    if (kw == "format") {
      std::string f;
      ls >> f;
      binary = f == "binary_little_endian";
      if (!binary && f != "ascii") throw std::runtime_error("format " + f);
    } else if (kw == "element") {
      std::size_t n;
      ls >> current >> n;
      (current == "vertex" ? nv : nf) = n;
    } else if (kw == "property" && current == "vertex") {
      std::string type, name;
      ls >> type >> name;
      vprops.push_back(type + " " + name);
    } else if (kw == "property") {
      std::string list, ct, it, name;
      ls >> list >> ct >> it >> name;
      if (list != "list" || ct != "uchar" || it != "int" || name != "vertex_indices")
        throw std::runtime_error("face layout");
    }
  }
  const std::vector<std::string> expected = {
      "float x",       "float y",         "float z",
      "uchar red",     "uchar green",     "uchar blue"};
  if (vprops != expected) throw std::runtime_error("vertex layout");
  PlyMesh mesh;
  auto read_le = [&](auto& value) {
    unsigned char bytes[sizeof(value)];
    in.read(reinterpret_cast<char*>(bytes), sizeof(value));
    if (!in) throw std::runtime_error("truncated body");
    std::uint32_t bits = 0;
    for (int i = sizeof(value) - 1; i >= 0; --i) bits = (bits << 8) | bytes[i];
    std::memcpy(&value, &bits, sizeof(value));
  };
  for (std::size_t i = 0; i < nv; ++i) {
    std::array<float, 3> p;
    std::array<int, 3> c;
    if (binary) {
      for (float& x : p) read_le(x);
      for (int& x : c) {
        unsigned char b;
        in.read(reinterpret_cast<char*>(&b), 1);
        x = b;
      }
    } else {
      in >> p[0] >> p[1] >> p[2] >> c[0] >> c[1] >> c[2];
    }
    if (!in) throw std::runtime_error("truncated vertices");
    mesh.xyz.push_back(p);
    mesh.rgb.push_back(c);
  }
  for (std::size_t i = 0; i < nf; ++i) {
    int count = 0;
    if (binary) {
      unsigned char b;
      in.read(reinterpret_cast<char*>(&b), 1);
      count = b;
    } else {
      in >> count;
    }
    std::vector<int> face(count);
    for (int& idx : face) {
      if (binary) {
        std::int32_t x;
        read_le(x);
        idx = x;
      } else {
        in >> idx;
      }
    }
    if (!in) throw std::runtime_error("truncated faces");
    for (int idx : face)
      if (idx < 0 || static_cast<std::size_t>(idx) >= nv)
        throw std::runtime_error("face index out of range");
    mesh.faces.push_back(std::move(face));
  }
  if (binary) {
    in.peek();
    if (!in.eof()) throw std::runtime_error("trailing bytes");
  }
  return mesh;
}

}  // namespace oracle
