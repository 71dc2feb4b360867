#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>

#include "semmap/core/camera.hpp"
#include "semmap/core/error.hpp"
#include "semmap/depth_refine/ransac_ground.hpp"
#include "semmap/io/raster_io.hpp"
#include "semmap/io/text_io.hpp"
#include "semmap/map/ply_export.hpp"
#include "semmap/map/semantic_map.hpp"
#include "semmap/snic/snic.hpp"

namespace semmap {

struct PipelineConfig {
  CameraIntrinsics intrinsics{0.0, 0.0, 0.0, 0.0};
  SnicParams snic;
  double polygon_epsilon = 0.0;
  RansacParams ransac;
  std::uint8_t road_class = kRoadClass;
  std::uint8_t sky_class = kSkyClass;
  int num_classes = kNumClasses;
  double depth_scale = kDefaultDepthScale;
  ColorMode color_mode = ColorMode::kSemantic;
  PlyFormat ply_format = PlyFormat::kBinaryLittleEndian;
  std::string palette_path;  // empty: built-in palette
  std::string poses_path;
  int workers = 1;

  void Validate() const {
    intrinsics.Validate();
    snic.Validate();
    ransac.Validate();
    if (!(polygon_epsilon >= 0.0)) {
      throw Error(ErrorCode::kInvalidArgument, "epsilon must be >= 0");
    }
    if (!(depth_scale > 0.0)) {
      throw Error(ErrorCode::kInvalidArgument, "depth_scale must be > 0");
    }
    if (num_classes < 1 || num_classes > 255) {
      throw Error(ErrorCode::kInvalidArgument, "num_classes must lie in [1, 255]");
    }
    if (workers < 1) {
      throw Error(ErrorCode::kInvalidArgument, "workers must be >= 1");
    }
  }
};

namespace detail {

inline double ToDouble(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    const double d = std::stod(value, &used);
    if (used == value.size()) return d;
  } catch (const std::exception&) {
  }
  throw Error(ErrorCode::kFormat,
              "config key " + key + ": not a number: '" + value + "'");
}

inline long long ToInteger(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    const long long i = std::stoll(value, &used);
    if (used == value.size()) return i;
  } catch (const std::exception&) {
  }
  throw Error(ErrorCode::kFormat,
              "config key " + key + ": not an integer: '" + value + "'");
}

inline std::uint8_t ToClass(const std::string& key, const std::string& value) {
  const long long i = ToInteger(key, value);
  if (i < 0 || i > 255) {
    throw Error(ErrorCode::kFormat, "config key " + key + ": class id out of range");
  }
  return static_cast<std::uint8_t>(i);
}

}  // namespace detail

// Applies `key = value` settings on top of `config`. Relative paths are
// resolved against `base_dir`.
inline void ApplyConfigValues(const std::map<std::string, std::string>& values,
                              PipelineConfig& config,
                              const std::filesystem::path& base_dir = {}) {
  auto resolve = [&](const std::string& p) {
    const std::filesystem::path path(p);
    return (path.is_absolute() || base_dir.empty() ? path : base_dir / path)
        .string();
  };
  for (const auto& [key, value] : values) {
    using detail::ToClass;
    using detail::ToDouble;
    using detail::ToInteger;
    if (key == "fx") {
      config.intrinsics.fx = ToDouble(key, value);
    } else if (key == "fy") {
      config.intrinsics.fy = ToDouble(key, value);
    } else if (key == "cx") {
      config.intrinsics.cx = ToDouble(key, value);
    } else if (key == "cy") {
      config.intrinsics.cy = ToDouble(key, value);
    } else if (key == "superpixels") {
      config.snic.k_superpixels = static_cast<int>(ToInteger(key, value));
    } else if (key == "spatial_norm") {
      config.snic.spatial_norm = ToDouble(key, value);
    } else if (key == "color_norm") {
      config.snic.color_norm = ToDouble(key, value);
    } else if (key == "semantic_penalty") {
      config.snic.semantic_penalty = ToDouble(key, value);
    } else if (key == "epsilon") {
      config.polygon_epsilon = ToDouble(key, value);
    } else if (key == "ransac_iterations") {
      config.ransac.iterations = static_cast<int>(ToInteger(key, value));
    } else if (key == "ransac_threshold") {
      config.ransac.inlier_threshold = ToDouble(key, value);
    } else if (key == "ransac_min_inliers") {
      config.ransac.min_inliers = ToDouble(key, value);
    } else if (key == "ransac_seed") {
      config.ransac.rng_seed = static_cast<std::uint64_t>(ToInteger(key, value));
    } else if (key == "road_class") {
      config.road_class = ToClass(key, value);
    } else if (key == "sky_class") {
      config.sky_class = ToClass(key, value);
    } else if (key == "num_classes") {
      config.num_classes = static_cast<int>(ToInteger(key, value));
    } else if (key == "depth_scale") {
      config.depth_scale = ToDouble(key, value);
    } else if (key == "color_mode") {
      if (value == "semantic") {
        config.color_mode = ColorMode::kSemantic;
      } else if (value == "rgb") {
        config.color_mode = ColorMode::kRgb;
      } else {
        throw Error(ErrorCode::kFormat, "color_mode must be semantic or rgb");
      }
    } else if (key == "ply_format") {
      if (value == "binary") {
        config.ply_format = PlyFormat::kBinaryLittleEndian;
      } else if (value == "ascii") {
        config.ply_format = PlyFormat::kAscii;
      } else {
        throw Error(ErrorCode::kFormat, "ply_format must be binary or ascii");
      }
    } else if (key == "palette") {
      config.palette_path = resolve(value);
    } else if (key == "poses") {
      config.poses_path = resolve(value);
    } else if (key == "workers") {
      config.workers = static_cast<int>(ToInteger(key, value));
    } else {
      throw Error(ErrorCode::kFormat, "unknown config key '" + key + "'");
    }
  }
}

inline PipelineConfig LoadPipelineConfig(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open config " + path);
  PipelineConfig config;
  ApplyConfigValues(ParseKeyValues(in, path), config,
                    std::filesystem::path(path).parent_path());
  return config;
}

}  // namespace semmap
