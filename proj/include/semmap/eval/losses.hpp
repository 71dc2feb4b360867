#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>

#include "semmap/core/error.hpp"
#include "semmap/core/image_grid.hpp"

namespace semmap {

struct LossValue {
  double value = 0.0;
};

// Per-pixel class probabilities: a grid with one channel per class.
using ClassProbabilities = ImageGrid<double>;

inline constexpr double kDefaultLossBalance = 0.75;
inline constexpr double kProbabilityFloor = 1e-12;
inline constexpr double kProbabilitySumTolerance = 1e-6;

// Scale-invariant log-depth error over masked pixels:
//   L = (1/n) sum d_i^2 - (1/(2 n^2)) (sum d_i)^2,  d_i = ln pred_i - ln gt_i.
inline LossValue ScaleInvariantLoss(const DepthMap& pred, const DepthMap& gt,
                                    const ValidityMask& mask) {
  RequireSameShape(pred, gt, "scale-invariant loss");
  RequireSameShape(pred, mask, "scale-invariant loss");
  double sum = 0.0;
  double sum_sq = 0.0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < pred.pixel_count(); ++i) {
    if (!mask.at_index(i)) continue;
    const double p = pred.at_index(i);
    const double g = gt.at_index(i);
    if (!(p > 0.0) || !(g > 0.0)) {
      throw Error(ErrorCode::kInvalidArgument,
                  "non-positive depth under mask at pixel " +
                      std::to_string(i));
    }
    const double d = std::log(p) - std::log(g);
    sum += d;
    sum_sq += d * d;
    ++n;
  }
  if (n == 0) {
    throw Error(ErrorCode::kUndefinedLoss, "mask selects no pixels");
  }
  const double nn = static_cast<double>(n);
  const double value = sum_sq / nn - (sum * sum) / (2.0 * nn * nn);
  // Var(d) + mean(d)^2 / 2 is non-negative; clip rounding residue.
  return {std::max(value, 0.0)};
}

// Mean over masked pixels of -ln p(true class); probabilities are floored at
// kProbabilityFloor before the log. Pixels labelled kIgnoreLabel are skipped.
inline LossValue CrossEntropyLoss(const ClassProbabilities& probs,
                                  const LabelMap& gt, const ValidityMask& mask) {
  RequireSameShape(probs, gt, "cross-entropy loss");
  RequireSameShape(probs, mask, "cross-entropy loss");
  const int num_classes = probs.channels();
  double total = 0.0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < probs.pixel_count(); ++i) {
    if (!mask.at_index(i) || gt.at_index(i) == kIgnoreLabel) continue;
    double row_sum = 0.0;
    for (int c = 0; c < num_classes; ++c) {
      const double p = probs.at_index(i, c);
      if (!(p >= 0.0)) {
        throw Error(ErrorCode::kInvalidArgument,
                    "negative probability at pixel " + std::to_string(i));
      }
      row_sum += p;
    }
    if (std::abs(row_sum - 1.0) > kProbabilitySumTolerance) {
      throw Error(ErrorCode::kInvalidArgument,
                  "probabilities at pixel " + std::to_string(i) + " sum to " +
                      std::to_string(row_sum));
    }
    const int label = gt.at_index(i);
    if (label >= num_classes) {
      throw Error(ErrorCode::kInvalidArgument,
                  "label " + std::to_string(label) + " at pixel " +
                      std::to_string(i) + " exceeds class count " +
                      std::to_string(num_classes));
    }
    total -= std::log(std::max(probs.at_index(i, label), kProbabilityFloor));
    ++n;
  }
  if (n == 0) {
    throw Error(ErrorCode::kUndefinedLoss, "mask selects no pixels");
  }
  return {total / static_cast<double>(n)};
}

// alpha * L_s + (1 - alpha) * L_d.
inline LossValue CombinedLoss(LossValue semantic, LossValue depth,
                              double alpha = kDefaultLossBalance) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) {
    throw Error(ErrorCode::kInvalidArgument,
                "loss balance must lie in [0, 1], got " + std::to_string(alpha));
  }
  return {alpha * semantic.value + (1.0 - alpha) * depth.value};
}

}  // namespace semmap
