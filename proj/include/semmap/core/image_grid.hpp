#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "semmap/core/error.hpp"

namespace semmap {

// Dense row-major raster. Pixel (u, v) is column u, row v; the origin is the
// centre of the top-left pixel. Multi-channel grids interleave channels per
// pixel.
template <typename T>
class ImageGrid {
 public:
  using value_type = T;

  ImageGrid() = default;

  ImageGrid(int width, int height, int channels = 1, T fill = T{})
      : width_(width), height_(height), channels_(channels) {
    if (width < 1 || height < 1 || channels < 1) {
      throw Error(ErrorCode::kInvalidArgument,
                  "image dimensions must be positive, got " +
                      std::to_string(width) + "x" + std::to_string(height) +
                      "x" + std::to_string(channels));
    }
    data_.assign(static_cast<std::size_t>(width) * height * channels, fill);
  }

  ImageGrid(int width, int height, int channels, std::vector<T> data)
      : ImageGrid(width, height, channels) {
    if (data.size() != data_.size()) {
      throw Error(ErrorCode::kInvalidArgument,
                  "image data length " + std::to_string(data.size()) +
                      " does not match " + std::to_string(data_.size()));
    }
    data_ = std::move(data);
  }

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  int channels() const noexcept { return channels_; }
  std::size_t pixel_count() const noexcept {
    return static_cast<std::size_t>(width_) * height_;
  }
  bool empty() const noexcept { return data_.empty(); }

  bool contains(int u, int v) const noexcept {
    return u >= 0 && v >= 0 && u < width_ && v < height_;
  }

  std::size_t index(int u, int v) const noexcept {
    return static_cast<std::size_t>(v) * width_ + u;
  }

  T& operator()(int u, int v, int c = 0) noexcept {
    return data_[index(u, v) * channels_ + c];
  }
  const T& operator()(int u, int v, int c = 0) const noexcept {
    return data_[index(u, v) * channels_ + c];
  }

  // Flat access by pixel index (row-major) and channel.
  T& at_index(std::size_t pixel, int c = 0) noexcept {
    return data_[pixel * channels_ + c];
  }
  const T& at_index(std::size_t pixel, int c = 0) const noexcept {
    return data_[pixel * channels_ + c];
  }

  std::span<T> pixel(int u, int v) noexcept {
    return {data_.data() + index(u, v) * channels_,
            static_cast<std::size_t>(channels_)};
  }
  std::span<const T> pixel(int u, int v) const noexcept {
    return {data_.data() + index(u, v) * channels_,
            static_cast<std::size_t>(channels_)};
  }

  std::span<T> data() noexcept { return data_; }
  std::span<const T> data() const noexcept { return data_; }

  template <typename U>
  bool same_shape(const ImageGrid<U>& other) const noexcept {
    return width_ == other.width() && height_ == other.height();
  }

  bool operator==(const ImageGrid&) const = default;

 private:
  int width_ = 0;
  int height_ = 0;
  int channels_ = 0;
  std::vector<T> data_;
};

using RgbImage = ImageGrid<std::uint8_t>;  // 3 channels
using LabImage = ImageGrid<double>;        // 3 channels, CIELAB
using DepthMap = ImageGrid<double>;        // meters, 0 = invalid
using ValidityMask = ImageGrid<std::uint8_t>;
using LabelMap = ImageGrid<std::uint8_t>;
using AssignmentMap = ImageGrid<std::int32_t>;

inline constexpr std::uint8_t kIgnoreLabel = 255;

template <typename A, typename B>
void RequireSameShape(const ImageGrid<A>& a, const ImageGrid<B>& b,
                      std::string_view what) {
  if (!a.same_shape(b)) {
    throw Error(ErrorCode::kInvalidArgument,
                std::string(what) + ": grid sizes differ (" +
                    std::to_string(a.width()) + "x" +
                    std::to_string(a.height()) + " vs " +
                    std::to_string(b.width()) + "x" +
                    std::to_string(b.height()) + ")");
  }
}

// Mask of strictly positive depth values.
inline ValidityMask MaskFromDepth(const DepthMap& depth) {
  ValidityMask mask(depth.width(), depth.height());
  for (std::size_t i = 0; i < depth.pixel_count(); ++i) {
    mask.at_index(i) = depth.at_index(i) > 0.0 ? 1 : 0;
  }
  return mask;
}

}  // namespace semmap
