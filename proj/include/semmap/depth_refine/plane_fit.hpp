#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "semmap/core/error.hpp"
#include "semmap/core/image_grid.hpp"
#include "semmap/snic/snic.hpp"

namespace semmap {

// Slanted depth plane of one superpixel: depth(u, v) = a*u + b*v + c.
struct PlaneParams {
  double a = 0.0;
  double b = 0.0;
  double c = 0.0;
  std::int32_t superpixel_id = -1;
  bool valid = false;

  double DepthAt(double u, double v) const { return a * u + b * v + c; }
};

struct DepthSample {
  double u = 0.0;
  double v = 0.0;
  double depth = 0.0;
};

// Relative pivot below which the centred 2x2 system counts as singular.
inline constexpr double kPlaneSingularTolerance = 1e-10;

// Least-squares plane through (u, v, depth) samples from the normal
// equations. Coordinates are centred first, which decouples c and leaves a
// 2x2 system for the slopes. Fewer than three samples or collinear (u, v)
// positions give the constant plane (0, 0, mean depth).
inline PlaneParams FitPlane(std::span<const DepthSample> samples) {
  if (samples.empty()) {
    throw Error(ErrorCode::kNoData, "plane fit needs at least one sample");
  }
  const double n = static_cast<double>(samples.size());
  double mu = 0.0, mv = 0.0, md = 0.0;
  for (const DepthSample& s : samples) {
    mu += s.u;
    mv += s.v;
    md += s.depth;
  }
  mu /= n;
  mv /= n;
  md /= n;

  PlaneParams plane;
  plane.valid = true;
  plane.c = md;
  if (samples.size() < 3) return plane;

  double suu = 0.0, suv = 0.0, svv = 0.0, sud = 0.0, svd = 0.0;
  for (const DepthSample& s : samples) {
    const double du = s.u - mu;
    const double dv = s.v - mv;
    const double dd = s.depth - md;
    suu += du * du;
    suv += du * dv;
    svv += dv * dv;
    sud += du * dd;
    svd += dv * dd;
  }
  const double det = suu * svv - suv * suv;
  if (!(det > kPlaneSingularTolerance * suu * svv) || suu <= 0.0 ||
      svv <= 0.0) {
    return plane;
  }
  plane.a = (sud * svv - svd * suv) / det;
  plane.b = (svd * suu - sud * suv) / det;
  plane.c = md - plane.a * mu - plane.b * mv;
  return plane;
}

struct RefinedDepth {
  DepthMap depth;
  ValidityMask mask;
  std::vector<PlaneParams> planes;  // indexed by superpixel id
};

// Replaces every pixel's depth with its superpixel's fitted plane. Only valid
// depths feed the fits; superpixels without any are marked invalid, and plane
// values <= 0 are masked out.
inline RefinedDepth ApplyPlanes(const SuperpixelPartition& partition,
                                const DepthMap& depth,
                                const ValidityMask& mask) {
  RequireSameShape(partition.assignment, depth, "plane refinement");
  RequireSameShape(partition.assignment, mask, "plane refinement");
  const int width = depth.width();
  const auto members = PixelsBySuperpixel(partition);

  RefinedDepth out{DepthMap(width, depth.height()),
                   ValidityMask(width, depth.height()),
                   std::vector<PlaneParams>(partition.k_actual)};
  std::vector<DepthSample> samples;
  for (int id = 0; id < partition.k_actual; ++id) {
    samples.clear();
    for (const std::int64_t idx : members[id]) {
      if (!mask.at_index(idx)) continue;
      samples.push_back({static_cast<double>(idx % width),
                         static_cast<double>(idx / width), depth.at_index(idx)});
    }
    PlaneParams& plane = out.planes[id];
    if (samples.empty()) {
      plane = PlaneParams{};
    } else {
      plane = FitPlane(samples);
    }
    plane.superpixel_id = id;
    if (!plane.valid) continue;
    for (const std::int64_t idx : members[id]) {
      const double z = plane.DepthAt(static_cast<double>(idx % width),
                                     static_cast<double>(idx / width));
      if (std::isfinite(z) && z > 0.0) {
        out.depth.at_index(idx) = z;
        out.mask.at_index(idx) = 1;
      }
    }
  }
  return out;
}

}  // namespace semmap
