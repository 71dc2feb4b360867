#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <queue>
#include <string>
#include <vector>

#include "semmap/core/color.hpp"
#include "semmap/core/error.hpp"
#include "semmap/core/image_grid.hpp"

namespace semmap {

struct SnicParams {
  int k_superpixels = 400;
  // Spatial normaliser s; unset means the seed grid cell area w*h/K.
  std::optional<double> spatial_norm;
  // Colour normaliser m (compactness 10, squared).
  double color_norm = 100.0;
  // Value of h() when the pixel label differs from the cluster's seed label.
  double semantic_penalty = 10.0;

  double ResolvedSpatialNorm(int width, int height) const {
    return spatial_norm.value_or(static_cast<double>(width) * height /
                                 k_superpixels);
  }

  void Validate() const {
    if (k_superpixels < 1) {
      throw Error(ErrorCode::kInvalidArgument, "k_superpixels must be >= 1");
    }
    if (spatial_norm && !(*spatial_norm > 0.0)) {
      throw Error(ErrorCode::kInvalidArgument, "spatial_norm must be > 0");
    }
    if (!(color_norm > 0.0)) {
      throw Error(ErrorCode::kInvalidArgument, "color_norm must be > 0");
    }
    if (!(semantic_penalty >= 0.0)) {
      throw Error(ErrorCode::kInvalidArgument, "semantic_penalty must be >= 0");
    }
  }
};

struct SeedPosition {
  int u = 0;
  int v = 0;
  bool operator==(const SeedPosition&) const = default;
};

struct ClusterCentroid {
  double u = 0.0;
  double v = 0.0;
  Lab color;
  std::uint8_t seed_label = kIgnoreLabel;
  std::int64_t pixel_count = 0;
};

struct PixelFeature {
  double u = 0.0;
  double v = 0.0;
  Lab color;
  std::uint8_t label = kIgnoreLabel;
};

struct SuperpixelPartition {
  AssignmentMap assignment;
  std::vector<ClusterCentroid> centroids;
  int k_actual = 0;
  // Number of queue pops that assigned a pixel; equals the pixel count.
  std::size_t assignment_count = 0;
};

// Regular seed grid with roughly square cells and about k seeds. The grid
// shape (nx, ny) is chosen to keep the seed count within [0.75k, 1.3k] while
// keeping cells as square as possible.
inline std::vector<SeedPosition> InitSeeds(int width, int height, int k) {
  if (width < 1 || height < 1) {
    throw Error(ErrorCode::kInvalidArgument, "image must be non-empty");
  }
  if (k < 1 || static_cast<std::int64_t>(k) >
                   static_cast<std::int64_t>(width) * height) {
    throw Error(ErrorCode::kInvalidArgument,
                "superpixel count " + std::to_string(k) +
                    " must lie in [1, " +
                    std::to_string(static_cast<std::int64_t>(width) * height) +
                    "]");
  }
  int best_nx = 1, best_ny = 1;
  double best_score = std::numeric_limits<double>::infinity();
  const int max_nx = std::min(width, k);
  for (int nx = 1; nx <= max_nx; ++nx) {
    const double ideal = static_cast<double>(k) / nx;
    for (int ny : {static_cast<int>(std::floor(ideal)),
                   static_cast<int>(std::ceil(ideal))}) {
      ny = std::clamp(ny, 1, height);
      const double count = static_cast<double>(nx) * ny;
      const bool in_range = count >= 0.75 * k && count <= 1.3 * k;
      const double aspect = std::abs(std::log(
          (static_cast<double>(width) / nx) / (static_cast<double>(height) / ny)));
      const double score = (in_range ? 0.0 : 1e6) + aspect +
                           std::abs(count - k) / static_cast<double>(k);
      if (score < best_score) {
        best_score = score;
        best_nx = nx;
        best_ny = ny;
      }
    }
  }
  const double step_u = static_cast<double>(width) / best_nx;
  const double step_v = static_cast<double>(height) / best_ny;
  std::vector<SeedPosition> seeds;
  seeds.reserve(static_cast<std::size_t>(best_nx) * best_ny);
  for (int j = 0; j < best_ny; ++j) {
    for (int i = 0; i < best_nx; ++i) {
      seeds.push_back({static_cast<int>(std::floor((i + 0.5) * step_u)),
                       static_cast<int>(std::floor((j + 0.5) * step_v))});
    }
  }
  return seeds;
}

// sqrt(|dx|^2 / s + |dc|^2 / m + h), h = penalty when labels differ.
inline double SnicDistance(const PixelFeature& pixel,
                           const ClusterCentroid& centroid, double spatial_norm,
                           double color_norm, double semantic_penalty) {
  const double du = pixel.u - centroid.u;
  const double dv = pixel.v - centroid.v;
  const double dl = pixel.color.l - centroid.color.l;
  const double da = pixel.color.a - centroid.color.a;
  const double db = pixel.color.b - centroid.color.b;
  const double h = pixel.label == centroid.seed_label ? 0.0 : semantic_penalty;
  return std::sqrt((du * du + dv * dv) / spatial_norm +
                   (dl * dl + da * da + db * db) / color_norm + h);
}

inline double SnicDistance(const PixelFeature& pixel,
                           const ClusterCentroid& centroid,
                           const SnicParams& params, int width, int height) {
  return SnicDistance(pixel, centroid, params.ResolvedSpatialNorm(width, height),
                      params.color_norm, params.semantic_penalty);
}

namespace detail {

struct QueueEntry {
  double distance;
  std::int64_t pixel;
  std::int32_t cluster;

  bool operator>(const QueueEntry& o) const {
    if (distance != o.distance) return distance > o.distance;
    if (pixel != o.pixel) return pixel > o.pixel;
    return cluster > o.cluster;
  }
};

struct ClusterSums {
  double u = 0.0, v = 0.0, l = 0.0, a = 0.0, b = 0.0;
  std::int64_t count = 0;
};

// Priority-queue region growing from grid seeds. With labels == nullptr the
// semantic term is dropped (plain SNIC).
inline SuperpixelPartition RunSnicImpl(const LabImage& lab,
                                       const LabelMap* labels,
                                       const SnicParams& params) {
  params.Validate();
  if (lab.channels() != 3) {
    throw Error(ErrorCode::kInvalidArgument, "expected a 3-channel Lab image");
  }
  if (labels) RequireSameShape(lab, *labels, "superpixel segmentation");

  const int width = lab.width();
  const int height = lab.height();
  const double spatial_norm = params.ResolvedSpatialNorm(width, height);
  const double penalty = labels ? params.semantic_penalty : 0.0;
  const std::vector<SeedPosition> seeds =
      InitSeeds(width, height, params.k_superpixels);

  auto feature = [&](std::int64_t index) {
    PixelFeature f;
    f.u = static_cast<double>(index % width);
    f.v = static_cast<double>(index / width);
    f.color = {lab.at_index(index, 0), lab.at_index(index, 1),
               lab.at_index(index, 2)};
    f.label = labels ? labels->at_index(index) : kIgnoreLabel;
    return f;
  };

  const int num_seeds = static_cast<int>(seeds.size());
  std::vector<ClusterCentroid> centroids(num_seeds);
  std::vector<ClusterSums> sums(num_seeds);
  std::priority_queue<QueueEntry, std::vector<QueueEntry>,
                      std::greater<QueueEntry>>
      queue;
  for (int k = 0; k < num_seeds; ++k) {
    const std::int64_t index =
        static_cast<std::int64_t>(seeds[k].v) * width + seeds[k].u;
    centroids[k].seed_label = labels ? labels->at_index(index) : kIgnoreLabel;
    queue.push({0.0, index, k});
  }

  AssignmentMap assignment(width, height, 1, -1);
  std::size_t assigned = 0;
  constexpr int kDu[4] = {1, -1, 0, 0};
  constexpr int kDv[4] = {0, 0, 1, -1};
  while (!queue.empty()) {
    const QueueEntry top = queue.top();
    queue.pop();
    if (assignment.at_index(top.pixel) >= 0) continue;
    assignment.at_index(top.pixel) = top.cluster;
    ++assigned;

    const PixelFeature f = feature(top.pixel);
    ClusterSums& s = sums[top.cluster];
    s.u += f.u;
    s.v += f.v;
    s.l += f.color.l;
    s.a += f.color.a;
    s.b += f.color.b;
    ++s.count;
    ClusterCentroid& c = centroids[top.cluster];
    const double n = static_cast<double>(s.count);
    c.u = s.u / n;
    c.v = s.v / n;
    c.color = {s.l / n, s.a / n, s.b / n};
    c.pixel_count = s.count;

    const int u = static_cast<int>(f.u);
    const int v = static_cast<int>(f.v);
    for (int dir = 0; dir < 4; ++dir) {
      const int nu = u + kDu[dir];
      const int nv = v + kDv[dir];
      if (!assignment.contains(nu, nv)) continue;
      const std::int64_t ni = static_cast<std::int64_t>(nv) * width + nu;
      if (assignment.at_index(ni) >= 0) continue;
      queue.push({SnicDistance(feature(ni), c, spatial_norm, params.color_norm,
                               penalty),
                  ni, top.cluster});
    }
  }

  // Seeds swallowed by a neighbour before their own pop leave empty clusters;
  // compact ids so they run over [0, k_actual).
  std::vector<std::int32_t> remap(num_seeds, -1);
  SuperpixelPartition out;
  for (int k = 0; k < num_seeds; ++k) {
    if (centroids[k].pixel_count == 0) continue;
    remap[k] = static_cast<std::int32_t>(out.centroids.size());
    out.centroids.push_back(centroids[k]);
  }
  for (auto& id : assignment.data()) id = remap[id];
  out.assignment = std::move(assignment);
  out.k_actual = static_cast<int>(out.centroids.size());
  out.assignment_count = assigned;
  return out;
}

}  // namespace detail

// Semantic-aware SNIC: clusters on position, CIELAB colour and label.
inline SuperpixelPartition RunSnic(const LabImage& lab, const LabelMap& labels,
                                   const SnicParams& params) {
  return detail::RunSnicImpl(lab, &labels, params);
}

// Colour-and-position SNIC without the semantic term.
inline SuperpixelPartition RunSnicPlain(const LabImage& lab,
                                        const SnicParams& params) {
  return detail::RunSnicImpl(lab, nullptr, params);
}

// Row-major pixel indices of every superpixel.
inline std::vector<std::vector<std::int64_t>> PixelsBySuperpixel(
    const SuperpixelPartition& partition) {
  std::vector<std::vector<std::int64_t>> members(partition.k_actual);
  for (std::size_t i = 0; i < partition.assignment.pixel_count(); ++i) {
    members[partition.assignment.at_index(i)].push_back(
        static_cast<std::int64_t>(i));
  }
  return members;
}

// Fraction of ground-truth boundary pixels with a segmentation boundary pixel
// within `tolerance` (Chebyshev distance). A pixel is on a boundary when one
// of its 4-neighbours carries a different id.
template <typename A, typename B>
double BoundaryRecall(const ImageGrid<A>& segmentation,
                      const ImageGrid<B>& truth, int tolerance = 0) {
  RequireSameShape(segmentation, truth, "boundary recall");
  auto boundary = [](const auto& grid) {
    ImageGrid<std::uint8_t> b(grid.width(), grid.height());
    for (int v = 0; v < grid.height(); ++v) {
      for (int u = 0; u < grid.width(); ++u) {
        const auto id = grid(u, v);
        const bool edge = (u + 1 < grid.width() && grid(u + 1, v) != id) ||
                          (u > 0 && grid(u - 1, v) != id) ||
                          (v + 1 < grid.height() && grid(u, v + 1) != id) ||
                          (v > 0 && grid(u, v - 1) != id);
        b(u, v) = edge ? 1 : 0;
      }
    }
    return b;
  };
  const auto seg_b = boundary(segmentation);
  const auto gt_b = boundary(truth);
  std::size_t total = 0, hit = 0;
  for (int v = 0; v < truth.height(); ++v) {
    for (int u = 0; u < truth.width(); ++u) {
      if (!gt_b(u, v)) continue;
      ++total;
      bool found = false;
      for (int dv = -tolerance; dv <= tolerance && !found; ++dv) {
        for (int du = -tolerance; du <= tolerance && !found; ++du) {
          found = seg_b.contains(u + du, v + dv) && seg_b(u + du, v + dv);
        }
      }
      hit += found;
    }
  }
  return total == 0 ? 1.0 : static_cast<double>(hit) / total;
}

}  // namespace semmap
