#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Eigenvalues>

#include "semmap/core/camera.hpp"
#include "semmap/core/error.hpp"
#include "semmap/core/image_grid.hpp"

namespace semmap {

struct RansacParams {
  int iterations = 200;
  double inlier_threshold = 0.15;  // meters, point-to-plane
  double min_inliers = 0.5;        // fraction of candidate points
  std::optional<std::uint64_t> rng_seed;

  void Validate() const {
    if (iterations < 1) {
      throw Error(ErrorCode::kInvalidArgument, "ransac iterations must be >= 1");
    }
    if (!(inlier_threshold > 0.0)) {
      throw Error(ErrorCode::kInvalidArgument,
                  "ransac inlier threshold must be > 0");
    }
    if (!(min_inliers > 0.0 && min_inliers <= 1.0)) {
      throw Error(ErrorCode::kInvalidArgument,
                  "ransac min_inliers must lie in (0, 1]");
    }
    if (!rng_seed) {
      throw Error(ErrorCode::kInvalidArgument,
                  "ransac rng_seed must be set explicitly");
    }
  }
};

// Plane {X : normal . X = offset}, |normal| = 1, offset >= 0.
struct Plane3 {
  Eigen::Vector3d normal = Eigen::Vector3d::UnitZ();
  double offset = 0.0;

  double Distance(const Point3& p) const {
    return std::abs(normal.dot(p) - offset);
  }
};

enum class RansacStatus {
  kApplied,
  kInsufficientPoints,
  kNoConsensus,
};

inline const char* ToString(RansacStatus s) {
  switch (s) {
    case RansacStatus::kApplied:
      return "applied";
    case RansacStatus::kInsufficientPoints:
      return "insufficient road points";
    case RansacStatus::kNoConsensus:
      return "no consensus";
  }
  return "unknown";
}

struct RansacPlaneResult {
  RansacStatus status = RansacStatus::kInsufficientPoints;
  Plane3 plane;
  std::vector<std::size_t> inliers;  // indices into the input points
};

namespace detail {

inline Plane3 Canonical(Eigen::Vector3d normal, double offset) {
  if (offset < 0.0) {
    normal = -normal;
    offset = -offset;
  }
  return {normal, offset};
}

// Orthogonal least-squares plane: normal is the covariance eigenvector with
// the smallest eigenvalue.
inline Plane3 FitPlaneOrthogonal(std::span<const Point3> points,
                                 std::span<const std::size_t> subset) {
  Eigen::Vector3d mean = Eigen::Vector3d::Zero();
  for (const std::size_t i : subset) mean += points[i];
  mean /= static_cast<double>(subset.size());
  Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
  for (const std::size_t i : subset) {
    const Eigen::Vector3d d = points[i] - mean;
    cov += d * d.transpose();
  }
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> solver(cov);
  const Eigen::Vector3d normal = solver.eigenvectors().col(0).normalized();
  return Canonical(normal, normal.dot(mean));
}

inline std::vector<std::size_t> Inliers(std::span<const Point3> points,
                                        const Plane3& plane, double threshold) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (plane.Distance(points[i]) < threshold) out.push_back(i);
  }
  return out;
}

}  // namespace detail

// Three-point RANSAC followed by an orthogonal least-squares refit on the
// consensus set. The returned inliers are those of the refitted plane.
inline RansacPlaneResult FitPlaneRansac(std::span<const Point3> points,
                                        const RansacParams& params) {
  params.Validate();
  RansacPlaneResult result;
  if (points.size() < 3) return result;

  std::mt19937_64 rng(*params.rng_seed);
  std::uniform_int_distribution<std::size_t> pick(0, points.size() - 1);
  std::size_t best_count = 0;
  Plane3 best;
  for (int it = 0; it < params.iterations; ++it) {
    const std::size_t i = pick(rng);
    std::size_t j = pick(rng);
    while (j == i) j = pick(rng);
    std::size_t k = pick(rng);
    while (k == i || k == j) k = pick(rng);
    const Eigen::Vector3d n =
        (points[j] - points[i]).cross(points[k] - points[i]);
    const double norm = n.norm();
    if (!(norm > 1e-12)) continue;
    const Eigen::Vector3d unit = n / norm;
    const Plane3 hypothesis = detail::Canonical(unit, unit.dot(points[i]));
    std::size_t count = 0;
    for (const Point3& p : points) {
      count += hypothesis.Distance(p) < params.inlier_threshold;
    }
    if (count > best_count) {
      best_count = count;
      best = hypothesis;
    }
  }
  if (best_count < 3 || static_cast<double>(best_count) <
                            params.min_inliers * static_cast<double>(points.size())) {
    result.status = RansacStatus::kNoConsensus;
    return result;
  }
  const std::vector<std::size_t> consensus =
      detail::Inliers(points, best, params.inlier_threshold);
  result.plane = detail::FitPlaneOrthogonal(points, consensus);
  result.inliers = detail::Inliers(points, result.plane, params.inlier_threshold);
  if (result.inliers.size() < 3) {
    result.plane = best;
    result.inliers = consensus;
  }
  result.status = RansacStatus::kApplied;
  return result;
}

struct GroundResult {
  RansacStatus status = RansacStatus::kInsufficientPoints;
  Plane3 plane;                        // camera frame
  std::vector<std::int64_t> inliers;   // row-major pixel indices
  std::size_t road_pixels = 0;
  DepthMap depth;
  ValidityMask mask;
};

// Fits a 3D plane to the back-projected road pixels and re-renders their
// depth from the ray/plane intersection. Pixels with other labels keep their
// values bit for bit. A skipped fit returns the input unchanged.
inline GroundResult RansacGround(const DepthMap& depth, const ValidityMask& mask,
                                 const LabelMap& labels, std::uint8_t road_class,
                                 const CameraIntrinsics& k,
                                 const RansacParams& params) {
  RequireSameShape(depth, mask, "road smoothing");
  RequireSameShape(depth, labels, "road smoothing");
  k.Validate();
  params.Validate();

  GroundResult out{RansacStatus::kInsufficientPoints, {}, {}, 0, depth, mask};
  const int width = depth.width();
  std::vector<std::int64_t> pixels;
  std::vector<Point3> points;
  for (std::size_t i = 0; i < depth.pixel_count(); ++i) {
    if (labels.at_index(i) != road_class || !mask.at_index(i)) continue;
    const double u = static_cast<double>(i % width);
    const double v = static_cast<double>(i / width);
    pixels.push_back(static_cast<std::int64_t>(i));
    points.push_back(BackProject(u, v, depth.at_index(i), k));
  }
  out.road_pixels = pixels.size();
  if (points.size() < 3) return out;

  const RansacPlaneResult fit = FitPlaneRansac(points, params);
  out.status = fit.status;
  if (fit.status != RansacStatus::kApplied) return out;
  out.plane = fit.plane;
  out.inliers.reserve(fit.inliers.size());
  for (const std::size_t i : fit.inliers) out.inliers.push_back(pixels[i]);

  for (const std::int64_t idx : pixels) {
    const Eigen::Vector3d ray((static_cast<double>(idx % width) - k.cx) / k.fx,
                              (static_cast<double>(idx / width) - k.cy) / k.fy,
                              1.0);
    const double denom = fit.plane.normal.dot(ray);
    if (std::abs(denom) < 1e-12) continue;
    const double z = fit.plane.offset / denom;
    if (std::isfinite(z) && z > 0.0) out.depth.at_index(idx) = z;
  }
  return out;
}

}  // namespace semmap
