#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "semmap/pipeline/pipeline.hpp"
#include "support/oracles.hpp"
#include "support/scenes.hpp"
#include "support/temp_dir.hpp"

using namespace semmap;
using testing_support::TempDir;

namespace {

PipelineConfig SmallConfig() {
  PipelineConfig c;
  c.intrinsics = {80, 80, 32, 24};
  c.snic.k_superpixels = 24;
  c.ransac.rng_seed = 5;
  return c;
}

FrameData Wall(int id, const CameraPose& pose, std::uint8_t label = 2) {
  scenes::Rng rng(99);
  FrameData f;
  f.frame_id = id;
  f.rgb = scenes::RandomRegions(rng, 64, 48, 6, 4.0).rgb;
  f.depth = DepthMap(64, 48, 1, 5.0);
  f.mask = ValidityMask(64, 48, 1, 1);
  f.labels = LabelMap(64, 48, 1, label);
  f.pose = pose;
  return f;
}

std::string ReadAll(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Writes corridor frames to disk and returns their bundles.
std::vector<FrameBundle> WriteCorridor(const TempDir& dir, int frames) {
  std::vector<FrameBundle> out;
  for (int i = 0; i < frames; ++i) {
    const auto f = scenes::Corridor::Render(i, 0.1, 40 + i);
    const std::string s = std::to_string(i);
    SaveRgb(dir.file("rgb" + s + ".png"), f.rgb);
    SaveDepth(dir.file("depth" + s + ".png"), f.depth, f.mask);
    SaveLabels(dir.file("labels" + s + ".png"), f.labels);
    out.push_back({i, dir.file("rgb" + s + ".png"), dir.file("depth" + s + ".png"),
                   dir.file("labels" + s + ".png"), scenes::Corridor::Pose(i)});
  }
  return out;
}

PipelineConfig CorridorConfig() {
  PipelineConfig c;
  c.intrinsics = scenes::Corridor::Intrinsics();
  c.snic.k_superpixels = 120;
  c.ransac.rng_seed = 3;
  return c;
}

}  // namespace

TEST(ProcessFrame, FrontalWallLiesAtItsDepth) {
  const FrameResult r = ProcessFrame(SmallConfig(), Wall(0, CameraPose::Identity()));
  ASSERT_FALSE(r.polygons.empty());
  EXPECT_EQ(r.polygons.size(), static_cast<std::size_t>(r.superpixels));
  EXPECT_EQ(r.skipped_polygons, 0u);
  std::size_t points = 0;
  for (const auto& p : r.polygons) {
    EXPECT_EQ(p.semantic_label, 2);
    points += p.represented_points;
    for (const auto& v : p.vertices) EXPECT_NEAR(v.z(), 5.0, 1e-6);
  }
  EXPECT_EQ(points, 64u * 48u);
}

TEST(ProcessFrame, RoadFrameUsesGroundPlane) {
  const FrameResult r = ProcessFrame(SmallConfig(), Wall(0, CameraPose::Identity(), 0));
  EXPECT_EQ(r.ground_status, RansacStatus::kApplied);
  for (const auto& p : r.polygons)
    for (const auto& v : p.vertices) EXPECT_NEAR(v.z(), 5.0, 1e-9);
}

TEST(ProcessFrame, SkyIsNotLifted) {
  const FrameResult r = ProcessFrame(SmallConfig(), Wall(0, CameraPose::Identity(), kSkyClass));
  EXPECT_TRUE(r.polygons.empty());
}

TEST(ProcessFrame, InvalidDepthSuperpixelsAreSkipped) {
  FrameData f = Wall(0, CameraPose::Identity());
  for (int v = 0; v < 48; ++v)
    for (int u = 0; u < 32; ++u) {
      f.depth(u, v) = 0.0;
      f.mask(u, v) = 0;
    }
  const FrameResult r = ProcessFrame(SmallConfig(), f);
  EXPECT_GT(r.skipped_polygons, 0u);
  EXPECT_EQ(r.polygons.size() + r.skipped_polygons, static_cast<std::size_t>(r.superpixels));
}

TEST(BuildMap, TranslationShiftsPolygons) {
  const Eigen::Vector3d t(1.5, -0.25, 3.0);
  const auto result = BuildMap(SmallConfig(), {Wall(0, CameraPose::Identity()),
                                               Wall(1, CameraPose::Translation(t))});
  EXPECT_EQ(result.skipped_frames, 0u);
  std::vector<const MapPolygon3D*> a, b;
  for (const auto* p : result.map.Ordered()) (p->frame_id == 0 ? a : b).push_back(p);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    ASSERT_EQ(a[i]->vertices.size(), b[i]->vertices.size());
    for (std::size_t k = 0; k < a[i]->vertices.size(); ++k)
      EXPECT_LT((b[i]->vertices[k] - (a[i]->vertices[k] + t)).norm(), 1e-9);
  }
}

TEST(BuildMap, FramesAreIndependentAndWorkerCountIrrelevant) {
  std::vector<FrameData> frames;
  for (int i = 0; i < 4; ++i) {
    const auto c = scenes::Corridor::Render(i, 0.1, 7 + i);
    frames.push_back({10 - i, c.rgb, c.depth, c.mask, c.labels, scenes::Corridor::Pose(i)});
  }
  PipelineConfig config = CorridorConfig();
  const auto serial = BuildMap(config, frames);
  config.workers = 3;
  const auto parallel = BuildMap(config, frames);
  const auto alone = BuildMap(config, {frames[2]});
  auto key = [](const MapPolygon3D* p) { return std::pair(p->frame_id, p->superpixel_id); };
  const auto s = serial.map.Ordered();
  const auto p = parallel.map.Ordered();
  ASSERT_EQ(s.size(), p.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    EXPECT_EQ(key(s[i]), key(p[i]));
    EXPECT_EQ(s[i]->vertices, p[i]->vertices);
  }
  std::vector<const MapPolygon3D*> from_full;
  for (const auto* q : s)
    if (q->frame_id == frames[2].frame_id) from_full.push_back(q);
  const auto a = alone.map.Ordered();
  ASSERT_EQ(a.size(), from_full.size());
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(a[i]->vertices, from_full[i]->vertices);
  // Reports come back in frame_id order.
  for (std::size_t i = 1; i < serial.frames.size(); ++i)
    EXPECT_LT(serial.frames[i - 1].frame_id, serial.frames[i].frame_id);
}

TEST(BuildMap, RejectsDuplicateFrameIds) {
  EXPECT_THROW(BuildMap(SmallConfig(), {Wall(3, CameraPose::Identity()),
                                         Wall(3, CameraPose::Identity())}),
               Error);
}

TEST(BuildMap, BadFrameIsSkipped) {
  FrameData bad = Wall(1, CameraPose::Identity());
  bad.labels = LabelMap(10, 10);
  const auto r = BuildMap(SmallConfig(), {Wall(0, CameraPose::Identity()), bad});
  EXPECT_EQ(r.skipped_frames, 1u);
  EXPECT_FALSE(r.frames[1].ok);
  EXPECT_FALSE(r.frames[1].error.empty());
  EXPECT_EQ(r.map.frame_count(), 1u);
}

TEST(RunPipeline, WritesReproducibleOutputs) {
  TempDir dir;
  const auto bundles = WriteCorridor(dir, 2);
  PipelineConfig config = CorridorConfig();
  const auto a = RunPipeline(config, bundles, dir.path() / "out_a");
  config.workers = 2;
  const auto b = RunPipeline(config, bundles, dir.path() / "out_b");
  EXPECT_EQ(a.skipped_frames, 0u);
  ASSERT_FALSE(a.ply_path.empty());
  EXPECT_EQ(ReadAll(a.ply_path), ReadAll(b.ply_path));
  const auto mesh = oracle::ReadPly(a.ply_path);
  EXPECT_EQ(mesh.xyz.size(), a.stats.stored_vertices);
  const std::string stats = ReadAll(dir.file("out_a/stats.txt"));
  EXPECT_NE(stats.find("compression_ratio="), std::string::npos);
  const std::string timings = ReadAll(dir.file("out_a/timings.txt"));
  EXPECT_NE(timings.find("\n0 ok "), std::string::npos);
  EXPECT_NE(timings.find("\n1 ok "), std::string::npos);
}

TEST(RunPipeline, CorruptFrameIsReportedAndSkipped) {
  TempDir dir;
  auto bundles = WriteCorridor(dir, 2);
  std::ofstream(dir.file("broken.png")) << "not a png";
  bundles[1].depth_path = dir.file("broken.png");
  const auto r = RunPipeline(CorridorConfig(), bundles, dir.path() / "out");
  EXPECT_EQ(r.skipped_frames, 1u);
  EXPECT_FALSE(r.frames[1].ok);
  EXPECT_NE(r.frames[1].error.find("broken.png"), std::string::npos);
  EXPECT_NE(ReadAll(dir.file("out/timings.txt")).find("1 skipped"), std::string::npos);
}

TEST(RunPipeline, ConfigErrorsAbortEarly) {
  TempDir dir;
  PipelineConfig c = CorridorConfig();
  c.ransac.rng_seed.reset();
  EXPECT_THROW(RunPipeline(c, {FrameBundle{}}, dir.path()), Error);
  EXPECT_THROW(RunPipeline(CorridorConfig(), {}, dir.path()), Error);
}

TEST(MakeBundles, PairsPosesByFrameId) {
  const std::vector<CameraPose> poses = {CameraPose::Identity(),
                                         CameraPose::Translation({1, 0, 0})};
  const auto b = MakeBundles({{1, "a", "b", "c"}}, poses);
  EXPECT_EQ(b[0].pose.translation(), Eigen::Vector3d(1, 0, 0));
  EXPECT_THROW(MakeBundles({{2, "a", "b", "c"}}, poses), Error);
}
