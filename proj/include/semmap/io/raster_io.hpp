#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <string>
#include <utility>
#include <vector>

#include <png.h>

#include "semmap/core/error.hpp"
#include "semmap/core/image_grid.hpp"

namespace semmap {

inline constexpr double kDefaultDepthScale = 256.0;
inline constexpr int kNumClasses = 19;

namespace detail {

// RAII wrapper over libpng's simplified read API.
class PngReader {
 public:
  explicit PngReader(const std::string& path) : path_(path) {
    std::memset(&image_, 0, sizeof(image_));
    image_.version = PNG_IMAGE_VERSION;
    if (!png_image_begin_read_from_file(&image_, path.c_str())) {
      const std::string msg = image_.message;
      png_image_free(&image_);
      throw Error(ErrorCode::kIo, "cannot read PNG " + path + ": " + msg);
    }
  }
  ~PngReader() { png_image_free(&image_); }
  PngReader(const PngReader&) = delete;
  PngReader& operator=(const PngReader&) = delete;

  int width() const { return static_cast<int>(image_.width); }
  int height() const { return static_cast<int>(image_.height); }
  bool is_16bit() const { return image_.format & PNG_FORMAT_FLAG_LINEAR; }
  bool is_color() const { return image_.format & PNG_FORMAT_FLAG_COLOR; }
  bool has_alpha() const { return image_.format & PNG_FORMAT_FLAG_ALPHA; }
  bool is_colormapped() const {
    return image_.format & PNG_FORMAT_FLAG_COLORMAP;
  }

  std::string Describe() const {
    return std::string(is_16bit() ? "16-bit " : "8-bit ") +
           (is_color() ? "colour" : "grey") + (has_alpha() ? "+alpha" : "");
  }

  template <typename T>
  std::vector<T> Finish(png_uint_32 format) {
    image_.format = format;
    std::vector<T> pixels(PNG_IMAGE_SIZE(image_) / sizeof(T));
    if (!png_image_finish_read(&image_, nullptr, pixels.data(), 0, nullptr)) {
      throw Error(ErrorCode::kIo,
                  "cannot decode PNG " + path_ + ": " + image_.message);
    }
    return pixels;
  }

 private:
  std::string path_;
  png_image image_;
};

template <typename T>
void WritePng(const std::string& path, int width, int height,
              png_uint_32 format, const std::vector<T>& pixels) {
  png_image image;
  std::memset(&image, 0, sizeof(image));
  image.version = PNG_IMAGE_VERSION;
  image.width = static_cast<png_uint_32>(width);
  image.height = static_cast<png_uint_32>(height);
  image.format = format;
  if (!png_image_write_to_file(&image, path.c_str(), 0, pixels.data(), 0,
                               nullptr)) {
    const std::string msg = image.message;
    png_image_free(&image);
    throw Error(ErrorCode::kIo, "cannot write PNG " + path + ": " + msg);
  }
  png_image_free(&image);
}

}  // namespace detail

struct DepthFrame {
  DepthMap depth;
  ValidityMask mask;
};

// 16-bit single-channel raster; depth = raw / depth_scale, raw 0 = invalid.
inline DepthFrame LoadDepth(const std::string& path,
                            double depth_scale = kDefaultDepthScale) {
  if (!(depth_scale > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "depth_scale must be > 0");
  }
  detail::PngReader png(path);
  if (!png.is_16bit() || png.is_color() || png.has_alpha() ||
      png.is_colormapped()) {
    throw Error(ErrorCode::kFormat, path +
                                        ": expected 16-bit single-channel "
                                        "depth raster, got " +
                                        png.Describe());
  }
  const auto raw = png.Finish<std::uint16_t>(PNG_FORMAT_LINEAR_Y);
  DepthFrame out{DepthMap(png.width(), png.height()),
                 ValidityMask(png.width(), png.height())};
  for (std::size_t i = 0; i < raw.size(); ++i) {
    if (raw[i] == 0) continue;
    out.depth.at_index(i) = raw[i] / depth_scale;
    out.mask.at_index(i) = 1;
  }
  return out;
}

// Inverse of LoadDepth: invalid pixels are written as 0, valid ones rounded
// and clamped to [1, 65535].
inline void SaveDepth(const std::string& path, const DepthMap& depth,
                      const ValidityMask& mask,
                      double depth_scale = kDefaultDepthScale) {
  RequireSameShape(depth, mask, "save depth");
  std::vector<std::uint16_t> raw(depth.pixel_count(), 0);
  for (std::size_t i = 0; i < raw.size(); ++i) {
    if (!mask.at_index(i)) continue;
    const double scaled = std::round(depth.at_index(i) * depth_scale);
    raw[i] = static_cast<std::uint16_t>(std::clamp(scaled, 1.0, 65535.0));
  }
  detail::WritePng(path, depth.width(), depth.height(), PNG_FORMAT_LINEAR_Y,
                   raw);
}

// 8-bit single-channel label raster with values < num_classes or 255.
inline LabelMap LoadLabels(const std::string& path,
                           int num_classes = kNumClasses) {
  detail::PngReader png(path);
  if (png.is_16bit() || png.is_color() || png.has_alpha()) {
    throw Error(ErrorCode::kFormat, path +
                                        ": expected 8-bit single-channel "
                                        "label raster, got " +
                                        png.Describe());
  }
  const int width = png.width();
  auto raw = png.Finish<std::uint8_t>(PNG_FORMAT_GRAY);
  for (std::size_t i = 0; i < raw.size(); ++i) {
    if (raw[i] != kIgnoreLabel && raw[i] >= num_classes) {
      throw Error(ErrorCode::kFormat,
                  path + ": label value " + std::to_string(raw[i]) +
                      " at (" + std::to_string(i % width) + ", " +
                      std::to_string(i / width) + ") is outside [0, " +
                      std::to_string(num_classes - 1) + "] and not 255");
    }
  }
  return LabelMap(width, png.height(), 1, std::move(raw));
}

inline void SaveLabels(const std::string& path, const LabelMap& labels) {
  detail::WritePng(path, labels.width(), labels.height(), PNG_FORMAT_GRAY,
                   std::vector<std::uint8_t>(labels.data().begin(),
                                             labels.data().end()));
}

inline RgbImage LoadRgb(const std::string& path) {
  detail::PngReader png(path);
  const int width = png.width();
  const int height = png.height();
  auto raw = png.Finish<std::uint8_t>(PNG_FORMAT_RGB);
  return RgbImage(width, height, 3, std::move(raw));
}

inline void SaveRgb(const std::string& path, const RgbImage& rgb) {
  if (rgb.channels() != 3) {
    throw Error(ErrorCode::kInvalidArgument, "expected a 3-channel image");
  }
  detail::WritePng(path, rgb.width(), rgb.height(), PNG_FORMAT_RGB,
                   std::vector<std::uint8_t>(rgb.data().begin(),
                                             rgb.data().end()));
}

// Superpixel ids as a 16-bit raster.
inline void SaveAssignment(const std::string& path,
                           const AssignmentMap& assignment) {
  std::vector<std::uint16_t> raw(assignment.pixel_count());
  for (std::size_t i = 0; i < raw.size(); ++i) {
    const std::int32_t id = assignment.at_index(i);
    if (id < 0 || id > 65535) {
      throw Error(ErrorCode::kInvalidArgument,
                  "superpixel id " + std::to_string(id) +
                      " does not fit a 16-bit raster");
    }
    raw[i] = static_cast<std::uint16_t>(id);
  }
  detail::WritePng(path, assignment.width(), assignment.height(),
                   PNG_FORMAT_LINEAR_Y, raw);
}

inline AssignmentMap LoadAssignment(const std::string& path) {
  detail::PngReader png(path);
  if (!png.is_16bit() || png.is_color() || png.has_alpha()) {
    throw Error(ErrorCode::kFormat, path +
                                        ": expected 16-bit single-channel "
                                        "assignment raster, got " +
                                        png.Describe());
  }
  const auto raw = png.Finish<std::uint16_t>(PNG_FORMAT_LINEAR_Y);
  AssignmentMap out(png.width(), png.height());
  for (std::size_t i = 0; i < raw.size(); ++i) out.at_index(i) = raw[i];
  return out;
}

}  // namespace semmap
