// semmap command-line tool: the full pipeline plus one subcommand per stage.

#include <cstdio>
#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>
#include <spdlog/cfg/env.h>
#include <spdlog/spdlog.h>

#include "semmap/core/color.hpp"
#include "semmap/depth_refine/plane_fit.hpp"
#include "semmap/eval/metrics.hpp"
#include "semmap/io/raster_io.hpp"
#include "semmap/io/text_io.hpp"
#include "semmap/map/semantic_map.hpp"
#include "semmap/pipeline/config.hpp"
#include "semmap/pipeline/pipeline.hpp"
#include "semmap/polygonize/polygonize.hpp"
#include "semmap/snic/snic.hpp"

using namespace semmap;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitPartial = 2;

std::ofstream OpenOut(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path);
  return out;
}

// Rebuilds a partition from a stored assignment raster. Ids must be dense.
SuperpixelPartition PartitionFromAssignment(AssignmentMap assignment) {
  SuperpixelPartition p;
  std::int32_t max_id = -1;
  for (const auto id : assignment.data()) max_id = std::max(max_id, id);
  p.k_actual = max_id + 1;
  p.assignment_count = assignment.pixel_count();
  p.centroids.resize(p.k_actual);
  for (std::size_t i = 0; i < assignment.pixel_count(); ++i) {
    auto& c = p.centroids[assignment.at_index(i)];
    c.u += static_cast<double>(i % assignment.width());
    c.v += static_cast<double>(i / assignment.width());
    ++c.pixel_count;
  }
  for (auto& c : p.centroids) {
    if (c.pixel_count == 0) continue;
    c.u /= c.pixel_count;
    c.v /= c.pixel_count;
  }
  p.assignment = std::move(assignment);
  return p;
}

struct PipelineArgs {
  std::string config;
  std::string frames;
  std::string out;
  std::vector<std::string> overrides;
};

int RunPipelineCommand(const PipelineArgs& args) {
  PipelineConfig config;
  std::vector<FrameBundle> bundles;
  try {
    config = LoadPipelineConfig(args.config);
    std::map<std::string, std::string> values;
    for (const std::string& kv : args.overrides) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos || eq == 0) {
        throw Error(ErrorCode::kFormat, "--set expects key=value, got '" + kv + "'");
      }
      values[kv.substr(0, eq)] = kv.substr(eq + 1);
    }
    ApplyConfigValues(values, config);
    config.Validate();
    if (config.poses_path.empty()) {
      throw Error(ErrorCode::kInvalidArgument, "config key 'poses' is required");
    }
    bundles = MakeBundles(LoadFrameIndex(args.frames), LoadPoses(config.poses_path));
  } catch (const Error& e) {
    spdlog::error("configuration: {}", e.what());
    return kExitFailure;
  }
  const PipelineReport report = RunPipeline(config, bundles, args.out);
  std::printf("frames=%zu\nskipped_frames=%zu\npolygons=%zu\nstored_vertices=%zu\n"
              "equivalent_dense_points=%zu\ncompression_ratio=%.6f\nply=%s\n",
              report.frames.size(), report.skipped_frames, report.polygons,
              report.stats.stored_vertices, report.stats.equivalent_dense_points,
              report.stats.compression_ratio, report.ply_path.c_str());
  return report.skipped_frames == 0 ? kExitOk : kExitPartial;
}

struct SuperpixelArgs {
  std::string image;
  std::string labels;
  std::string out_assignment;
  std::string out_centroids;
  SnicParams params;
  std::optional<double> spatial_norm;
  int num_classes = kNumClasses;
};

int RunSuperpixelCommand(SuperpixelArgs args) {
  args.params.spatial_norm = args.spatial_norm;
  const LabImage lab = RgbToCielab(LoadRgb(args.image));
  const SuperpixelPartition p =
      args.labels.empty() ? RunSnicPlain(lab, args.params)
                          : RunSnic(lab, LoadLabels(args.labels, args.num_classes),
                                    args.params);
  SaveAssignment(args.out_assignment, p.assignment);
  std::ofstream out = OpenOut(args.out_centroids);
  out << "# id u v L a b seed_label pixel_count\n";
  char buf[256];
  for (int id = 0; id < p.k_actual; ++id) {
    const ClusterCentroid& c = p.centroids[id];
    std::snprintf(buf, sizeof(buf), "%d %.4f %.4f %.4f %.4f %.4f %d %lld\n", id, c.u,
                  c.v, c.color.l, c.color.a, c.color.b, c.seed_label,
                  static_cast<long long>(c.pixel_count));
    out << buf;
  }
  spdlog::info("{} superpixels", p.k_actual);
  return kExitOk;
}

struct RefineArgs {
  std::string depth;
  std::string assignment;
  std::string labels;
  std::string out_depth;
  std::string out_planes;
  double depth_scale = kDefaultDepthScale;
  int num_classes = kNumClasses;
};

int RunRefineCommand(const RefineArgs& args) {
  const DepthFrame depth = LoadDepth(args.depth, args.depth_scale);
  const SuperpixelPartition p = PartitionFromAssignment(LoadAssignment(args.assignment));
  if (!args.labels.empty()) {
    RequireSameShape(p.assignment, LoadLabels(args.labels, args.num_classes),
                     "assignment/labels");
  }
  const RefinedDepth r = ApplyPlanes(p, depth.depth, depth.mask);
  SaveDepth(args.out_depth, r.depth, r.mask, args.depth_scale);
  std::ofstream out = OpenOut(args.out_planes);
  char buf[256];
  for (const PlaneParams& plane : r.planes) {
    std::snprintf(buf, sizeof(buf), "%d %d %.17g %.17g %.17g\n", plane.superpixel_id,
                  plane.valid ? 1 : 0, plane.a, plane.b, plane.c);
    out << buf;
  }
  return kExitOk;
}

struct PolygonizeArgs {
  std::string assignment;
  std::string labels;
  std::string out;
  double epsilon = 0.0;
  int num_classes = kNumClasses;
};

int RunPolygonizeCommand(const PolygonizeArgs& args) {
  const SuperpixelPartition p = PartitionFromAssignment(LoadAssignment(args.assignment));
  std::vector<std::uint8_t> labels(p.k_actual, kIgnoreLabel);
  if (!args.labels.empty()) labels = AssignLabels(p, LoadLabels(args.labels, args.num_classes));
  const auto members = PixelsBySuperpixel(p);
  std::ofstream out = OpenOut(args.out);
  std::size_t polygons = 0, vertices = 0;
  char buf[64];
  for (int id = 0; id < p.k_actual; ++id) {
    if (members[id].empty()) continue;
    const Polygon2D poly =
        ContourToPolygon(TraceBoundary(p.assignment, id, members[id]), args.epsilon, id);
    out << id << ' ' << static_cast<int>(labels[id]);
    for (const Vertex2& v : poly.vertices) {
      std::snprintf(buf, sizeof(buf), " %.6g %.6g", v.u, v.v);
      out << buf;
    }
    out << '\n';
    ++polygons;
    vertices += poly.vertices.size();
  }
  std::printf("polygons=%zu\nstored_vertices=%zu\nboundary_pixels=%zu\n", polygons,
              vertices, CountBoundaryPixels(p.assignment));
  return kExitOk;
}

struct EvaluateArgs {
  std::string pred_depth;
  std::string gt_depth;
  std::string pred_labels;
  std::string gt_labels;
  std::string json;
  double depth_scale = kDefaultDepthScale;
  int num_classes = kNumClasses;
};

int RunEvaluateCommand(const EvaluateArgs& args) {
  if (args.pred_depth.empty() != args.gt_depth.empty() ||
      args.pred_labels.empty() != args.gt_labels.empty() ||
      (args.pred_depth.empty() && args.pred_labels.empty())) {
    throw Error(ErrorCode::kInvalidArgument,
                "give --pred-depth with --gt-depth and/or --pred-labels with --gt-labels");
  }
  nlohmann::ordered_json report;
  auto emit = [&](const std::string& key, double value) {
    std::printf("%s=%.6f\n", key.c_str(), value);
    report[key] = value;
  };
  if (!args.pred_depth.empty()) {
    const DepthFrame pred = LoadDepth(args.pred_depth, args.depth_scale);
    const DepthFrame gt = LoadDepth(args.gt_depth, args.depth_scale);
    RequireSameShape(pred.depth, gt.depth, "evaluate depth");
    ValidityMask both(gt.mask.width(), gt.mask.height());
    for (std::size_t i = 0; i < both.pixel_count(); ++i) {
      both.at_index(i) = pred.mask.at_index(i) && gt.mask.at_index(i);
    }
    const DepthMetrics m = ComputeDepthMetrics(pred.depth, gt.depth, both);
    std::printf("depth_pixels=%zu\n", m.pixel_count);
    report["depth_pixels"] = m.pixel_count;
    emit("mean_error", m.mean_error);
    emit("rms_error", m.rms_error);
    emit("abs_rel", m.abs_rel);
    emit("sq_rel", m.sq_rel);
    emit("delta1", m.delta1);
    emit("delta2", m.delta2);
    emit("delta3", m.delta3);
  }
  if (!args.pred_labels.empty()) {
    const SegMetrics s = SegmentationIou(LoadLabels(args.pred_labels, args.num_classes),
                                         LoadLabels(args.gt_labels, args.num_classes),
                                         args.num_classes,
                                         args.num_classes == kNumClasses
                                             ? DefaultCategoryMap()
                                             : std::vector<int>{});
    emit("mean_iou_class", s.mean_iou_class);
    if (!s.per_category_iou.empty()) emit("mean_iou_category", s.mean_iou_category);
    for (std::size_t c = 0; c < s.per_class_iou.size(); ++c) {
      if (s.per_class_iou[c]) emit("iou_class_" + std::to_string(c), *s.per_class_iou[c]);
    }
  }
  if (!args.json.empty()) OpenOut(args.json) << report.dump(2) << '\n';
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  spdlog::set_level(spdlog::level::info);
  spdlog::cfg::load_env_levels();

  CLI::App app{"Semantic polygon mapping from RGB, depth and label frames"};
  app.require_subcommand(1);

  PipelineArgs pipeline;
  auto* pipeline_cmd = app.add_subcommand("pipeline", "Build a PLY map from a frame index");
  pipeline_cmd->add_option("--config", pipeline.config, "key=value config file")->required();
  pipeline_cmd->add_option("--frames", pipeline.frames, "frame index file")->required();
  pipeline_cmd->add_option("--out", pipeline.out, "output directory")->required();
  pipeline_cmd->add_option("--set", pipeline.overrides, "config override key=value");

  SuperpixelArgs superpixel;
  auto* superpixel_cmd = app.add_subcommand("superpixel", "Run SNIC on one image");
  superpixel_cmd->add_option("--image", superpixel.image, "RGB raster")->required();
  superpixel_cmd->add_option("--labels", superpixel.labels, "label raster (enables the semantic term)");
  superpixel_cmd->add_option("-k,--superpixels", superpixel.params.k_superpixels, "requested superpixels")
      ->capture_default_str();
  superpixel_cmd->add_option("--spatial-norm", superpixel.spatial_norm, "s (default: width*height/k)");
  superpixel_cmd->add_option("--color-norm", superpixel.params.color_norm, "m")->capture_default_str();
  superpixel_cmd->add_option("--semantic-penalty", superpixel.params.semantic_penalty, "lambda")
      ->capture_default_str();
  superpixel_cmd->add_option("--num-classes", superpixel.num_classes)->capture_default_str();
  superpixel_cmd->add_option("--out-assignment", superpixel.out_assignment, "16-bit id raster")->required();
  superpixel_cmd->add_option("--out-centroids", superpixel.out_centroids, "centroid text file")->required();

  RefineArgs refine;
  auto* refine_cmd = app.add_subcommand("refine", "Fit one depth plane per superpixel");
  refine_cmd->add_option("--depth", refine.depth, "16-bit depth raster")->required();
  refine_cmd->add_option("--assignment", refine.assignment, "16-bit id raster")->required();
  refine_cmd->add_option("--labels", refine.labels, "label raster (shape check)");
  refine_cmd->add_option("--depth-scale", refine.depth_scale)->capture_default_str();
  refine_cmd->add_option("--num-classes", refine.num_classes)->capture_default_str();
  refine_cmd->add_option("--out-depth", refine.out_depth, "refined depth raster")->required();
  refine_cmd->add_option("--out-planes", refine.out_planes, "plane file: id valid a b c")->required();

  PolygonizeArgs polygonize;
  auto* polygonize_cmd = app.add_subcommand("polygonize", "Trace superpixels into polygons");
  polygonize_cmd->add_option("--assignment", polygonize.assignment, "16-bit id raster")->required();
  polygonize_cmd->add_option("--labels", polygonize.labels, "label raster for majority labels");
  polygonize_cmd->add_option("--epsilon", polygonize.epsilon, "simplification tolerance in pixels")
      ->capture_default_str();
  polygonize_cmd->add_option("--num-classes", polygonize.num_classes)->capture_default_str();
  polygonize_cmd->add_option("--out", polygonize.out, "polygon file: id label u v ...")->required();

  EvaluateArgs evaluate;
  auto* evaluate_cmd = app.add_subcommand("evaluate", "Depth and segmentation metrics");
  evaluate_cmd->add_option("--pred-depth", evaluate.pred_depth);
  evaluate_cmd->add_option("--gt-depth", evaluate.gt_depth);
  evaluate_cmd->add_option("--pred-labels", evaluate.pred_labels);
  evaluate_cmd->add_option("--gt-labels", evaluate.gt_labels);
  evaluate_cmd->add_option("--depth-scale", evaluate.depth_scale)->capture_default_str();
  evaluate_cmd->add_option("--num-classes", evaluate.num_classes)->capture_default_str();
  evaluate_cmd->add_option("--json", evaluate.json, "also write the report as JSON");

  CLI11_PARSE(app, argc, argv);

  try {
    if (pipeline_cmd->parsed()) return RunPipelineCommand(pipeline);
    if (superpixel_cmd->parsed()) return RunSuperpixelCommand(superpixel);
    if (refine_cmd->parsed()) return RunRefineCommand(refine);
    if (polygonize_cmd->parsed()) return RunPolygonizeCommand(polygonize);
    if (evaluate_cmd->parsed()) return RunEvaluateCommand(evaluate);
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return kExitFailure;
  }
  return kExitFailure;
}
