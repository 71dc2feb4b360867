#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <optional>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include <spdlog/spdlog.h>

#include "semmap/core/camera.hpp"
#include "semmap/core/color.hpp"
#include "semmap/core/error.hpp"
#include "semmap/core/image_grid.hpp"
#include "semmap/depth_refine/plane_fit.hpp"
#include "semmap/depth_refine/ransac_ground.hpp"
#include "semmap/io/raster_io.hpp"
#include "semmap/io/text_io.hpp"
#include "semmap/map/palette.hpp"
#include "semmap/map/ply_export.hpp"
#include "semmap/map/semantic_map.hpp"
#include "semmap/pipeline/config.hpp"
#include "semmap/polygonize/polygonize.hpp"
#include "semmap/snic/snic.hpp"

namespace semmap {

// One frame of network outputs plus its pose.
struct FrameData {
  int frame_id = 0;
  RgbImage rgb;
  DepthMap depth;
  ValidityMask mask;
  LabelMap labels;
  CameraPose pose;
};

// A frame on disk; the pose comes from the pose file line `frame_id`.
struct FrameBundle {
  int frame_id = 0;
  std::string rgb_path;
  std::string depth_path;
  std::string label_path;
  CameraPose pose;
};

struct FrameTiming {
  double superpixel_ms = 0.0;
  double refine_ms = 0.0;
  double ground_ms = 0.0;
  double polygonize_ms = 0.0;
  double lift_ms = 0.0;
  double total_ms = 0.0;
};

struct FrameResult {
  int frame_id = 0;
  std::vector<MapPolygon3D> polygons;
  int superpixels = 0;
  std::size_t skipped_polygons = 0;
  RansacStatus ground_status = RansacStatus::kInsufficientPoints;
  FrameTiming timing;
};

struct FrameReport {
  int frame_id = 0;
  bool ok = false;
  std::string error;
  std::size_t polygons = 0;
  std::size_t skipped_polygons = 0;
  RansacStatus ground_status = RansacStatus::kInsufficientPoints;
  FrameTiming timing;
};

struct MapBuildResult {
  SemanticMap map;
  std::vector<FrameReport> frames;  // ordered by frame_id
  std::size_t skipped_frames = 0;
};

namespace detail {

class Stopwatch {
 public:
  double Lap() {
    const auto now = std::chrono::steady_clock::now();
    const double ms =
        std::chrono::duration<double, std::milli>(now - last_).count();
    last_ = now;
    return ms;
  }

 private:
  std::chrono::steady_clock::time_point last_ = std::chrono::steady_clock::now();
};

}  // namespace detail

// Superpixels -> plane refinement -> road smoothing -> polygons -> labels ->
// world-frame polygons. Sky superpixels are not lifted; polygons whose plane
// gives non-positive depth are skipped and counted.
inline FrameResult ProcessFrame(const PipelineConfig& config,
                                const FrameData& frame) {
  RequireSameShape(frame.rgb, frame.depth, "frame");
  RequireSameShape(frame.rgb, frame.mask, "frame");
  RequireSameShape(frame.rgb, frame.labels, "frame");
  FrameResult result;
  result.frame_id = frame.frame_id;
  detail::Stopwatch total;
  detail::Stopwatch lap;

  const SuperpixelPartition partition =
      RunSnic(RgbToCielab(frame.rgb), frame.labels, config.snic);
  result.superpixels = partition.k_actual;
  result.timing.superpixel_ms = lap.Lap();

  const RefinedDepth refined = ApplyPlanes(partition, frame.depth, frame.mask);
  result.timing.refine_ms = lap.Lap();

  const GroundResult ground =
      RansacGround(refined.depth, refined.mask, frame.labels, config.road_class,
                   config.intrinsics, config.ransac);
  result.ground_status = ground.status;
  if (ground.status != RansacStatus::kApplied) {
    spdlog::debug("frame {}: road smoothing skipped ({})", frame.frame_id,
                  ToString(ground.status));
  }
  result.timing.ground_ms = lap.Lap();

  const auto members = PixelsBySuperpixel(partition);
  const std::vector<std::uint8_t> labels = AssignLabels(partition, frame.labels);
  const std::vector<Rgb> colors = MeanColors(partition, frame.rgb);
  std::vector<Polygon2D> polygons(partition.k_actual);
  for (int id = 0; id < partition.k_actual; ++id) {
    if (labels[id] == config.sky_class) continue;
    polygons[id] = ContourToPolygon(
        TraceBoundary(partition.assignment, id, members[id]),
        config.polygon_epsilon, id);
  }
  result.timing.polygonize_ms = lap.Lap();

  for (int id = 0; id < partition.k_actual; ++id) {
    if (labels[id] == config.sky_class) continue;
    std::size_t valid = 0;
    for (const std::int64_t idx : members[id]) valid += frame.mask.at_index(idx);
    try {
      MapPolygon3D lifted =
          labels[id] == config.road_class &&
                  ground.status == RansacStatus::kApplied
              ? LiftPolygon(polygons[id], ground.plane, config.intrinsics,
                            frame.pose)
              : LiftPolygon(polygons[id], refined.planes[id], config.intrinsics,
                            frame.pose);
      lifted.semantic_label = labels[id];
      lifted.rgb = colors[id];
      lifted.frame_id = frame.frame_id;
      lifted.represented_points = valid;
      result.polygons.push_back(std::move(lifted));
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kDegenerateGeometry) throw;
      ++result.skipped_polygons;
      spdlog::debug("frame {}: {}", frame.frame_id, e.what());
    }
  }
  result.timing.lift_ms = lap.Lap();
  result.timing.total_ms = total.Lap();
  return result;
}

namespace detail {

// Runs `produce(i)` for i in [0, count) on a bounded pool; results keep their
// input slot.
inline std::vector<std::optional<FrameResult>> RunPool(
    std::size_t count, int workers,
    const std::function<FrameResult(std::size_t)>& produce,
    std::vector<std::string>& errors) {
  std::vector<std::optional<FrameResult>> results(count);
  errors.assign(count, {});
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < count; i = next++) {
      try {
        results[i] = produce(i);
      } catch (const std::exception& e) {
        errors[i] = e.what();
      }
    }
  };
  const int threads =
      static_cast<int>(std::min<std::size_t>(std::max(workers, 1), count));
  if (threads <= 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(threads);
    for (int t = 0; t < threads; ++t) pool.emplace_back(work);
  }
  return results;
}

inline MapBuildResult Assemble(
    const PipelineConfig& config, const std::vector<int>& frame_ids,
    std::vector<std::optional<FrameResult>>& results,
    const std::vector<std::string>& errors) {
  MapBuildResult out{SemanticMap(config.sky_class), {}, 0};
  std::vector<std::size_t> order(frame_ids.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return frame_ids[a] < frame_ids[b];
  });
  for (const std::size_t i : order) {
    FrameReport report;
    report.frame_id = frame_ids[i];
    if (results[i]) {
      FrameResult& r = *results[i];
      report.ok = true;
      report.polygons = r.polygons.size();
      report.skipped_polygons = r.skipped_polygons;
      report.ground_status = r.ground_status;
      report.timing = r.timing;
      out.map.Accumulate(r.frame_id, std::move(r.polygons));
    } else {
      report.error = errors[i];
      ++out.skipped_frames;
      spdlog::warn("frame {} skipped: {}", frame_ids[i], errors[i]);
    }
    out.frames.push_back(std::move(report));
  }
  return out;
}

inline void RequireUniqueIds(const std::vector<int>& ids) {
  std::set<int> seen;
  for (const int id : ids) {
    if (!seen.insert(id).second) {
      throw Error(ErrorCode::kInvalidArgument,
                  "frame id " + std::to_string(id) + " listed twice");
    }
  }
}

}  // namespace detail

// In-memory map building over a bounded worker pool. Frames that throw are
// skipped and reported; accumulation happens in frame_id order.
inline MapBuildResult BuildMap(const PipelineConfig& config,
                               const std::vector<FrameData>& frames) {
  config.Validate();
  std::vector<int> ids;
  for (const FrameData& f : frames) ids.push_back(f.frame_id);
  detail::RequireUniqueIds(ids);
  std::vector<std::string> errors;
  auto results = detail::RunPool(
      frames.size(), config.workers,
      [&](std::size_t i) { return ProcessFrame(config, frames[i]); }, errors);
  return detail::Assemble(config, ids, results, errors);
}

inline FrameData LoadFrame(const PipelineConfig& config,
                           const FrameBundle& bundle) {
  FrameData f;
  f.frame_id = bundle.frame_id;
  f.rgb = LoadRgb(bundle.rgb_path);
  DepthFrame depth = LoadDepth(bundle.depth_path, config.depth_scale);
  f.depth = std::move(depth.depth);
  f.mask = std::move(depth.mask);
  f.labels = LoadLabels(bundle.label_path, config.num_classes);
  f.pose = bundle.pose;
  RequireSameShape(f.rgb, f.depth, "frame " + std::to_string(f.frame_id) +
                                       " rgb/depth");
  RequireSameShape(f.rgb, f.labels, "frame " + std::to_string(f.frame_id) +
                                        " rgb/labels");
  return f;
}

// Pairs index entries with poses (pose line = frame_id).
inline std::vector<FrameBundle> MakeBundles(
    const std::vector<FrameEntry>& entries,
    const std::vector<CameraPose>& poses) {
  std::vector<FrameBundle> out;
  for (const FrameEntry& e : entries) {
    if (e.frame_id < 0 || static_cast<std::size_t>(e.frame_id) >= poses.size()) {
      throw Error(ErrorCode::kInvalidArgument,
                  "frame " + std::to_string(e.frame_id) + " has no pose (" +
                      std::to_string(poses.size()) + " poses loaded)");
    }
    out.push_back({e.frame_id, e.rgb_path, e.depth_path, e.label_path,
                   poses[e.frame_id]});
  }
  return out;
}

struct PipelineReport {
  MemoryStats stats;
  std::vector<FrameReport> frames;
  std::size_t skipped_frames = 0;
  std::size_t polygons = 0;
  std::string ply_path;  // empty when nothing was exported
};

inline void WriteTimingReport(const std::string& path,
                              const std::vector<FrameReport>& frames) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path);
  out << "# frame_id status polygons skipped_polygons ground superpixel_ms "
         "refine_ms ground_ms polygonize_ms lift_ms total_ms\n";
  char buf[256];
  for (const FrameReport& f : frames) {
    std::snprintf(buf, sizeof(buf), "%d %s %zu %zu %s %.3f %.3f %.3f %.3f %.3f %.3f\n",
                  f.frame_id, f.ok ? "ok" : "skipped", f.polygons,
                  f.skipped_polygons,
                  f.ground_status == RansacStatus::kApplied ? "applied" : "skipped",
                  f.timing.superpixel_ms, f.timing.refine_ms, f.timing.ground_ms,
                  f.timing.polygonize_ms, f.timing.lift_ms, f.timing.total_ms);
    out << buf;
  }
}

inline void WriteStatsReport(const std::string& path,
                             const PipelineReport& report) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path);
  out << "frames=" << report.frames.size() << "\n"
      << "skipped_frames=" << report.skipped_frames << "\n"
      << "polygons=" << report.polygons << "\n"
      << "stored_vertices=" << report.stats.stored_vertices << "\n"
      << "equivalent_dense_points=" << report.stats.equivalent_dense_points
      << "\n"
      << "compression_ratio=" << report.stats.compression_ratio << "\n";
}

// End-to-end run from disk: loads and processes frames on the worker pool,
// then writes map.ply, stats.txt and timings.txt into `out_dir`.
inline PipelineReport RunPipeline(const PipelineConfig& config,
                                  const std::vector<FrameBundle>& frames,
                                  const std::filesystem::path& out_dir) {
  config.Validate();
  if (frames.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "no frames to process");
  }
  const Palette palette = config.palette_path.empty()
                              ? DefaultPalette()
                              : LoadPalette(config.palette_path);
  std::vector<int> ids;
  for (const FrameBundle& f : frames) ids.push_back(f.frame_id);
  detail::RequireUniqueIds(ids);

  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) {
    throw Error(ErrorCode::kIo,
                "cannot create " + out_dir.string() + ": " + ec.message());
  }

  std::vector<std::string> errors;
  auto results = detail::RunPool(
      frames.size(), config.workers,
      [&](std::size_t i) {
        return ProcessFrame(config, LoadFrame(config, frames[i]));
      },
      errors);
  MapBuildResult built = detail::Assemble(config, ids, results, errors);

  PipelineReport report;
  report.stats = built.map.stats();
  report.frames = std::move(built.frames);
  report.skipped_frames = built.skipped_frames;
  report.polygons = built.map.polygons().size();
  if (!built.map.empty()) {
    report.ply_path = (out_dir / "map.ply").string();
    ExportPly(built.map, config.color_mode, palette, report.ply_path,
              config.ply_format);
  } else {
    spdlog::warn("map is empty; no PLY written");
  }
  WriteStatsReport((out_dir / "stats.txt").string(), report);
  WriteTimingReport((out_dir / "timings.txt").string(), report.frames);
  return report;
}

}  // namespace semmap
