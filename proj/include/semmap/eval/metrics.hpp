#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "semmap/core/error.hpp"
#include "semmap/core/image_grid.hpp"

namespace semmap {

struct DepthMetrics {
  double mean_error = 0.0;
  double rms_error = 0.0;
  double abs_rel = 0.0;
  double sq_rel = 0.0;
  double delta1 = 0.0;
  double delta2 = 0.0;
  double delta3 = 0.0;
  std::size_t pixel_count = 0;
};

inline DepthMetrics ComputeDepthMetrics(const DepthMap& pred, const DepthMap& gt,
                                        const ValidityMask& mask) {
  RequireSameShape(pred, gt, "depth metrics");
  RequireSameShape(pred, mask, "depth metrics");
  constexpr double kT1 = 1.25;
  constexpr double kT2 = kT1 * kT1;
  constexpr double kT3 = kT2 * kT1;

  double abs_sum = 0.0, sq_sum = 0.0, abs_rel = 0.0, sq_rel = 0.0;
  std::size_t d1 = 0, d2 = 0, d3 = 0, n = 0;
  for (std::size_t i = 0; i < pred.pixel_count(); ++i) {
    if (!mask.at_index(i)) continue;
    const double p = pred.at_index(i);
    const double g = gt.at_index(i);
    if (!(p > 0.0) || !(g > 0.0)) {
      throw Error(ErrorCode::kInvalidArgument,
                  "non-positive depth under mask at pixel " +
                      std::to_string(i));
    }
    const double diff = p - g;
    abs_sum += std::abs(diff);
    sq_sum += diff * diff;
    abs_rel += std::abs(diff) / g;
    sq_rel += diff * diff / g;
    const double ratio = std::max(p / g, g / p);
    d1 += ratio < kT1;
    d2 += ratio < kT2;
    d3 += ratio < kT3;
    ++n;
  }
  if (n == 0) {
    throw Error(ErrorCode::kUndefinedLoss, "mask selects no pixels");
  }
  const double nn = static_cast<double>(n);
  DepthMetrics m;
  m.mean_error = abs_sum / nn;
  m.rms_error = std::sqrt(sq_sum / nn);
  m.abs_rel = abs_rel / nn;
  m.sq_rel = sq_rel / nn;
  m.delta1 = static_cast<double>(d1) / nn;
  m.delta2 = static_cast<double>(d2) / nn;
  m.delta3 = static_cast<double>(d3) / nn;
  m.pixel_count = n;
  return m;
}

struct SegMetrics {
  // Empty entries mark classes absent from both prediction and ground truth.
  std::vector<std::optional<double>> per_class_iou;
  std::vector<std::optional<double>> per_category_iou;
  double mean_iou_class = 0.0;
  double mean_iou_category = 0.0;
};

namespace detail {

struct IouResult {
  std::vector<std::optional<double>> iou;
  double mean = 0.0;
};

// Confusion counts over pixels whose ground truth is not ignored. A predicted
// ignore label counts as a miss for the true class only.
inline IouResult IntersectionOverUnion(const LabelMap& pred, const LabelMap& gt,
                                       const std::vector<int>& mapping,
                                       int num_outputs, std::uint8_t ignore) {
  std::vector<std::size_t> tp(num_outputs, 0), fp(num_outputs, 0),
      fn(num_outputs, 0);
  for (std::size_t i = 0; i < gt.pixel_count(); ++i) {
    const std::uint8_t g = gt.at_index(i);
    if (g == ignore) continue;
    const std::uint8_t p = pred.at_index(i);
    const int gc = mapping[g];
    if (p == ignore) {
      ++fn[gc];
      continue;
    }
    const int pc = mapping[p];
    if (pc == gc) {
      ++tp[gc];
    } else {
      ++fn[gc];
      ++fp[pc];
    }
  }
  IouResult out;
  out.iou.resize(num_outputs);
  double sum = 0.0;
  int present = 0;
  for (int c = 0; c < num_outputs; ++c) {
    const std::size_t denom = tp[c] + fp[c] + fn[c];
    if (denom == 0) continue;
    out.iou[c] = static_cast<double>(tp[c]) / static_cast<double>(denom);
    sum += *out.iou[c];
    ++present;
  }
  out.mean = present > 0 ? sum / present : 0.0;
  return out;
}

}  // namespace detail

// Per-class and per-category IoU. category_map[c] gives the category of class
// c; an empty map treats every class as its own category.
inline SegMetrics SegmentationIou(const LabelMap& pred, const LabelMap& gt,
                                  int num_classes,
                                  const std::vector<int>& category_map = {},
                                  std::uint8_t ignore_id = kIgnoreLabel) {
  RequireSameShape(pred, gt, "segmentation IoU");
  if (num_classes < 1 || num_classes > 255) {
    throw Error(ErrorCode::kInvalidArgument,
                "class count must lie in [1, 255], got " +
                    std::to_string(num_classes));
  }
  auto check_labels = [&](const LabelMap& grid, const char* which) {
    for (std::size_t i = 0; i < grid.pixel_count(); ++i) {
      const std::uint8_t l = grid.at_index(i);
      if (l != ignore_id && l >= num_classes) {
        throw Error(ErrorCode::kInvalidArgument,
                    std::string(which) + " label " + std::to_string(l) +
                        " at pixel " + std::to_string(i) +
                        " exceeds class count");
      }
    }
  };
  check_labels(pred, "predicted");
  check_labels(gt, "ground-truth");

  std::vector<int> identity(256, 0);
  for (int c = 0; c < num_classes; ++c) identity[c] = c;
  const detail::IouResult classes =
      detail::IntersectionOverUnion(pred, gt, identity, num_classes, ignore_id);

  std::vector<int> categories = identity;
  int num_categories = num_classes;
  if (!category_map.empty()) {
    if (static_cast<int>(category_map.size()) != num_classes) {
      throw Error(ErrorCode::kInvalidArgument,
                  "category map must have one entry per class");
    }
    num_categories = 0;
    for (int c = 0; c < num_classes; ++c) {
      if (category_map[c] < 0) {
        throw Error(ErrorCode::kInvalidArgument, "negative category id");
      }
      categories[c] = category_map[c];
      num_categories = std::max(num_categories, category_map[c] + 1);
    }
  }
  const detail::IouResult cats = detail::IntersectionOverUnion(
      pred, gt, categories, num_categories, ignore_id);

  SegMetrics m;
  m.per_class_iou = classes.iou;
  m.mean_iou_class = classes.mean;
  m.per_category_iou = cats.iou;
  m.mean_iou_category = cats.mean;
  return m;
}

// The 19 urban-scene training classes grouped into 7 categories: flat,
// construction, object, nature, sky, human, vehicle.
inline std::vector<int> DefaultCategoryMap() {
  return {0, 0, 1, 1, 1, 2, 2, 2, 3, 3, 4, 5, 5, 6, 6, 6, 6, 6, 6};
}

}  // namespace semmap
