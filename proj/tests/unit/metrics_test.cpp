#include <cmath>

#include <gtest/gtest.h>

#include "semmap/eval/metrics.hpp"
#include "support/oracles.hpp"
#include "support/scenes.hpp"

using namespace semmap;

TEST(DepthMetrics, IdenticalGrids) {
  scenes::Rng rng(1);
  const DepthMap gt = scenes::RandomDepth(rng, 6, 6);
  const DepthMetrics m = ComputeDepthMetrics(gt, gt, ValidityMask(6, 6, 1, 1));
  EXPECT_EQ(m.mean_error, 0.0);
  EXPECT_EQ(m.rms_error, 0.0);
  EXPECT_EQ(m.abs_rel, 0.0);
  EXPECT_EQ(m.sq_rel, 0.0);
  EXPECT_EQ(m.delta1, 1.0);
  EXPECT_EQ(m.delta2, 1.0);
  EXPECT_EQ(m.delta3, 1.0);
  EXPECT_EQ(m.pixel_count, 36u);
}

TEST(DepthMetrics, TwoPixelHandValues) {
  const DepthMetrics m = ComputeDepthMetrics(DepthMap(2, 1, 1, {2, 8}),
                                             DepthMap(2, 1, 1, {4, 4}),
                                             ValidityMask(2, 1, 1, 1));
  EXPECT_NEAR(m.abs_rel, 0.75, 1e-12);
  EXPECT_NEAR(m.rms_error, std::sqrt(10.0), 1e-12);
  EXPECT_NEAR(m.sq_rel, 2.5, 1e-12);
  EXPECT_NEAR(m.mean_error, 3.0, 1e-12);
  EXPECT_EQ(m.delta1, 0.0);
  EXPECT_EQ(m.delta2, 0.0);
  EXPECT_EQ(m.delta3, 0.0);
}

TEST(DepthMetrics, ConstantRatio) {
  scenes::Rng rng(2);
  const DepthMap gt = scenes::RandomDepth(rng, 5, 4);
  DepthMap pred = gt;
  for (auto& x : pred.data()) x *= 1.2;
  const DepthMetrics m = ComputeDepthMetrics(pred, gt, ValidityMask(5, 4, 1, 1));
  EXPECT_NEAR(m.abs_rel, 0.2, 1e-12);
  EXPECT_EQ(m.delta1, 1.0);
}

TEST(DepthMetrics, EmptyMask) {
  try {
    ComputeDepthMetrics(DepthMap(2, 2, 1, 1.0), DepthMap(2, 2, 1, 1.0),
                        ValidityMask(2, 2));
    ADD_FAILURE();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kUndefinedLoss);
  }
}

TEST(DepthMetricsProperty, MatchesOracleAndDeltasAreMonotone) {
  scenes::Rng rng(3);
  for (int trial = 0; trial < 300; ++trial) {
    const int w = scenes::UniformInt(rng, 1, 32), h = scenes::UniformInt(rng, 1, 32);
    const DepthMap gt = scenes::RandomDepth(rng, w, h, 1.0, 10.0);
    const DepthMap pred = scenes::RandomDepth(rng, w, h, 1.0, 10.0);
    const ValidityMask mask = scenes::RandomMask(rng, w, h);
    const DepthMetrics m = ComputeDepthMetrics(pred, gt, mask);
    const oracle::Depth o = oracle::DepthMetrics(pred, gt, mask);
    auto near = [](double a, double b) {
      return std::abs(a - b) <= 1e-9 * std::max(1.0, std::abs(b));
    };
    EXPECT_TRUE(near(m.mean_error, o.mean_error));
    EXPECT_TRUE(near(m.rms_error, o.rms));
    EXPECT_TRUE(near(m.abs_rel, o.abs_rel));
    EXPECT_TRUE(near(m.sq_rel, o.sq_rel));
    EXPECT_TRUE(near(m.delta1, o.d1));
    EXPECT_TRUE(near(m.delta2, o.d2));
    EXPECT_TRUE(near(m.delta3, o.d3));
    EXPECT_LE(m.delta1, m.delta2);
    EXPECT_LE(m.delta2, m.delta3);
  }
}

TEST(SegmentationIou, IdenticalGrids) {
  scenes::Rng rng(4);
  const LabelMap gt = scenes::RandomLabels(rng, 10, 10, 5);
  const SegMetrics m = SegmentationIou(gt, gt, 19);
  for (int c = 0; c < 19; ++c) {
    if (m.per_class_iou[c]) {
      EXPECT_EQ(*m.per_class_iou[c], 1.0);
    }
  }
  EXPECT_FALSE(m.per_class_iou[18].has_value());
  EXPECT_EQ(m.mean_iou_class, 1.0);
}

TEST(SegmentationIou, HandCountedConfusion) {
  const LabelMap gt(2, 2, 1, {0, 0, 1, 1});
  const LabelMap pred(2, 2, 1, {0, 1, 1, 1});
  const SegMetrics m = SegmentationIou(pred, gt, 2);
  EXPECT_NEAR(*m.per_class_iou[0], 0.5, 1e-12);
  EXPECT_NEAR(*m.per_class_iou[1], 2.0 / 3.0, 1e-12);
  EXPECT_NEAR(m.mean_iou_class, 7.0 / 12.0, 1e-12);
}

TEST(SegmentationIou, DisjointClasses) {
  const SegMetrics m =
      SegmentationIou(LabelMap(3, 3, 1, 4), LabelMap(3, 3, 1, 9), 19);
  EXPECT_EQ(*m.per_class_iou[4], 0.0);
  EXPECT_EQ(*m.per_class_iou[9], 0.0);
  EXPECT_EQ(m.mean_iou_class, 0.0);
}

TEST(SegmentationIou, IgnoreAndCategories) {
  // Ground-truth ignore pixels drop out; class 1 and 2 share category 1.
  const LabelMap gt(4, 1, 1, {0, 1, 2, 255});
  const LabelMap pred(4, 1, 1, {0, 2, 1, 0});
  const SegMetrics m = SegmentationIou(pred, gt, 3, {0, 1, 1});
  EXPECT_EQ(*m.per_class_iou[0], 1.0);
  EXPECT_EQ(*m.per_class_iou[1], 0.0);
  EXPECT_EQ(*m.per_category_iou[1], 1.0);
  EXPECT_EQ(m.mean_iou_category, 1.0);
}

TEST(SegmentationIou, RejectsOutOfRangeLabels) {
  EXPECT_THROW(SegmentationIou(LabelMap(1, 1, 1, 19), LabelMap(1, 1), 19), Error);
  EXPECT_THROW(SegmentationIou(LabelMap(1, 1), LabelMap(1, 1), 2, {0}), Error);
}

TEST(SegmentationIouProperty, MatchesSetOracle) {
  scenes::Rng rng(5);
  const std::vector<int> cats = DefaultCategoryMap();
  for (int trial = 0; trial < 200; ++trial) {
    const int w = scenes::UniformInt(rng, 1, 24), h = scenes::UniformInt(rng, 1, 24);
    const LabelMap gt = scenes::RandomLabels(rng, w, h, 19, 0.1);
    const LabelMap pred = scenes::RandomLabels(rng, w, h, 19, 0.1);
    const SegMetrics m = SegmentationIou(pred, gt, 19, cats);
    const auto cls = oracle::ClassIou(pred, gt, 19, {});
    const auto cat = oracle::ClassIou(pred, gt, 19, cats);
    ASSERT_EQ(m.per_class_iou.size(), cls.size());
    for (std::size_t c = 0; c < cls.size(); ++c) {
      ASSERT_EQ(m.per_class_iou[c].has_value(), cls[c].has_value());
      if (cls[c]) {
        EXPECT_NEAR(*m.per_class_iou[c], *cls[c], 1e-12);
        EXPECT_GE(*cls[c], 0.0);
        EXPECT_LE(*cls[c], 1.0);
      }
    }
    for (std::size_t c = 0; c < cat.size(); ++c) {
      ASSERT_EQ(m.per_category_iou[c].has_value(), cat[c].has_value());
      if (cat[c]) {
        EXPECT_NEAR(*m.per_category_iou[c], *cat[c], 1e-12);
      }
    }
    EXPECT_NEAR(m.mean_iou_class, oracle::MeanOf(cls), 1e-9);
    EXPECT_NEAR(m.mean_iou_category, oracle::MeanOf(cat), 1e-9);
  }
}
