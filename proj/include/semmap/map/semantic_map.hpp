#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "semmap/core/camera.hpp"
#include "semmap/core/error.hpp"
#include "semmap/core/image_grid.hpp"
#include "semmap/depth_refine/plane_fit.hpp"
#include "semmap/depth_refine/ransac_ground.hpp"
#include "semmap/polygonize/polygonize.hpp"
#include "semmap/snic/snic.hpp"

namespace semmap {

using Rgb = std::array<std::uint8_t, 3>;

inline constexpr std::uint8_t kRoadClass = 0;
inline constexpr std::uint8_t kSkyClass = 10;

struct MapPolygon3D {
  std::vector<Point3> vertices;  // world frame
  std::uint8_t semantic_label = kIgnoreLabel;
  Rgb rgb{0, 0, 0};
  int frame_id = 0;
  std::int32_t superpixel_id = -1;
  // Valid-depth pixels of the source superpixel that this polygon stands in
  // for.
  std::size_t represented_points = 0;
};

struct MemoryStats {
  std::size_t stored_vertices = 0;
  std::size_t equivalent_dense_points = 0;
  double compression_ratio = 0.0;
};

// Gives each vertex its depth from the superpixel plane, back-projects it and
// moves it into the world frame.
inline MapPolygon3D LiftPolygon(const Polygon2D& poly, const PlaneParams& plane,
                                const CameraIntrinsics& k,
                                const CameraPose& pose) {
  if (!plane.valid) {
    throw Error(ErrorCode::kDegenerateGeometry,
                "superpixel " + std::to_string(poly.superpixel_id) +
                    " has no valid plane");
  }
  MapPolygon3D out;
  out.superpixel_id = poly.superpixel_id;
  out.vertices.reserve(poly.vertices.size());
  for (const Vertex2& p : poly.vertices) {
    const double z = plane.DepthAt(p.u, p.v);
    if (!std::isfinite(z) || z <= 0.0) {
      throw Error(ErrorCode::kDegenerateGeometry,
                  "superpixel " + std::to_string(poly.superpixel_id) +
                      " plane depth " + std::to_string(z) + " at vertex (" +
                      std::to_string(p.u) + ", " + std::to_string(p.v) + ")");
    }
    out.vertices.push_back(TransformToWorld(BackProject(p.u, p.v, z, k), pose));
  }
  return out;
}

// Lifts the vertices onto a camera-frame 3D plane by ray intersection; used
// for road polygons once the ground plane is known.
inline MapPolygon3D LiftPolygon(const Polygon2D& poly, const Plane3& plane,
                                const CameraIntrinsics& k,
                                const CameraPose& pose) {
  MapPolygon3D out;
  out.superpixel_id = poly.superpixel_id;
  out.vertices.reserve(poly.vertices.size());
  for (const Vertex2& p : poly.vertices) {
    const Eigen::Vector3d ray((p.u - k.cx) / k.fx, (p.v - k.cy) / k.fy, 1.0);
    const double denom = plane.normal.dot(ray);
    const double z = std::abs(denom) > 1e-12 ? plane.offset / denom : -1.0;
    if (!std::isfinite(z) || z <= 0.0) {
      throw Error(ErrorCode::kDegenerateGeometry,
                  "superpixel " + std::to_string(poly.superpixel_id) +
                      " vertex ray misses the ground plane");
    }
    out.vertices.push_back(TransformToWorld(ray * z, pose));
  }
  return out;
}

namespace detail {

inline std::uint8_t Majority(const std::array<std::size_t, 256>& counts) {
  std::uint8_t best = kIgnoreLabel;
  std::size_t best_count = 0;
  for (int c = 0; c < 256; ++c) {
    if (c == kIgnoreLabel) continue;
    if (counts[c] > best_count) {
      best_count = counts[c];
      best = static_cast<std::uint8_t>(c);
    }
  }
  return best;
}

}  // namespace detail

// Majority label of a superpixel's pixels, ignoring the ignore id; ties go to
// the smaller class id.
inline std::uint8_t AssignLabel(const SuperpixelPartition& partition,
                                std::int32_t id, const LabelMap& labels) {
  RequireSameShape(partition.assignment, labels, "label assignment");
  std::array<std::size_t, 256> counts{};
  for (std::size_t i = 0; i < labels.pixel_count(); ++i) {
    if (partition.assignment.at_index(i) == id) ++counts[labels.at_index(i)];
  }
  return detail::Majority(counts);
}

inline std::vector<std::uint8_t> AssignLabels(
    const SuperpixelPartition& partition, const LabelMap& labels) {
  RequireSameShape(partition.assignment, labels, "label assignment");
  std::vector<std::array<std::size_t, 256>> counts(partition.k_actual);
  for (auto& c : counts) c.fill(0);
  for (std::size_t i = 0; i < labels.pixel_count(); ++i) {
    ++counts[partition.assignment.at_index(i)][labels.at_index(i)];
  }
  std::vector<std::uint8_t> out(partition.k_actual);
  for (int id = 0; id < partition.k_actual; ++id) {
    out[id] = detail::Majority(counts[id]);
  }
  return out;
}

inline std::vector<Rgb> MeanColors(const SuperpixelPartition& partition,
                                   const RgbImage& rgb) {
  RequireSameShape(partition.assignment, rgb, "mean colours");
  std::vector<std::array<double, 3>> sums(partition.k_actual, {0, 0, 0});
  std::vector<std::size_t> counts(partition.k_actual, 0);
  for (std::size_t i = 0; i < rgb.pixel_count(); ++i) {
    const std::int32_t id = partition.assignment.at_index(i);
    for (int c = 0; c < 3; ++c) sums[id][c] += rgb.at_index(i, c);
    ++counts[id];
  }
  std::vector<Rgb> out(partition.k_actual, Rgb{0, 0, 0});
  for (int id = 0; id < partition.k_actual; ++id) {
    if (counts[id] == 0) continue;
    for (int c = 0; c < 3; ++c) {
      out[id][c] = static_cast<std::uint8_t>(
          std::lround(sums[id][c] / static_cast<double>(counts[id])));
    }
  }
  return out;
}

// Append-only collection of world-frame polygons. Single writer.
class SemanticMap {
 public:
  explicit SemanticMap(std::uint8_t sky_class = kSkyClass)
      : sky_class_(sky_class) {}

  // Appends one frame's polygons, dropping sky polygons. Each frame may be
  // added once.
  void Accumulate(int frame_id, std::vector<MapPolygon3D> frame_polygons) {
    if (frames_.contains(frame_id)) {
      throw Error(ErrorCode::kInvalidArgument,
                  "frame " + std::to_string(frame_id) + " already in map");
    }
    std::set<std::int32_t> ids;
    for (const MapPolygon3D& p : frame_polygons) {
      if (!ids.insert(p.superpixel_id).second) {
        throw Error(ErrorCode::kInvalidArgument,
                    "frame " + std::to_string(frame_id) +
                        " repeats superpixel " +
                        std::to_string(p.superpixel_id));
      }
    }
    frames_.insert(frame_id);
    for (MapPolygon3D& p : frame_polygons) {
      if (p.semantic_label == sky_class_) continue;
      p.frame_id = frame_id;
      stats_.stored_vertices += p.vertices.size();
      stats_.equivalent_dense_points += p.represented_points;
      polygons_.push_back(std::move(p));
    }
    stats_.compression_ratio =
        stats_.equivalent_dense_points == 0
            ? 0.0
            : static_cast<double>(stats_.stored_vertices) /
                  static_cast<double>(stats_.equivalent_dense_points);
  }

  const std::vector<MapPolygon3D>& polygons() const noexcept {
    return polygons_;
  }
  std::size_t frame_count() const noexcept { return frames_.size(); }
  const MemoryStats& stats() const noexcept { return stats_; }
  std::uint8_t sky_class() const noexcept { return sky_class_; }
  bool empty() const noexcept { return polygons_.empty(); }

  // Polygons ordered by (frame_id, superpixel_id).
  std::vector<const MapPolygon3D*> Ordered() const {
    std::vector<const MapPolygon3D*> out;
    out.reserve(polygons_.size());
    for (const MapPolygon3D& p : polygons_) out.push_back(&p);
    std::sort(out.begin(), out.end(), [](const auto* a, const auto* b) {
      return std::pair(a->frame_id, a->superpixel_id) <
             std::pair(b->frame_id, b->superpixel_id);
    });
    return out;
  }

 private:
  std::uint8_t sky_class_;
  std::vector<MapPolygon3D> polygons_;
  std::set<int> frames_;
  MemoryStats stats_;
};

}  // namespace semmap
