#pragma once

#include <array>
#include <cmath>
#include <cstdint>

#include "semmap/core/error.hpp"
#include "semmap/core/image_grid.hpp"

namespace semmap {

struct Lab {
  double l = 0.0;
  double a = 0.0;
  double b = 0.0;
};

namespace detail {

inline double SrgbToLinear(double c) {
  return c <= 0.04045 ? c / 12.92 : std::pow((c + 0.055) / 1.055, 2.4);
}

inline double LabCompand(double t) {
  constexpr double kEpsilon = 216.0 / 24389.0;
  constexpr double kKappa = 24389.0 / 27.0;
  return t > kEpsilon ? std::cbrt(t) : (kKappa * t + 16.0) / 116.0;
}

}  // namespace detail

// sRGB (8 bit, standard gamma) -> CIE XYZ (D65) -> CIELAB.
inline Lab RgbToCielab(std::uint8_t r, std::uint8_t g, std::uint8_t b) {
  const double rl = detail::SrgbToLinear(r / 255.0);
  const double gl = detail::SrgbToLinear(g / 255.0);
  const double bl = detail::SrgbToLinear(b / 255.0);

  const double x = 0.4124564 * rl + 0.3575761 * gl + 0.1804375 * bl;
  const double y = 0.2126729 * rl + 0.7151522 * gl + 0.0721750 * bl;
  const double z = 0.0193339 * rl + 0.1191920 * gl + 0.9503041 * bl;

  constexpr double kWhiteX = 0.95047;
  constexpr double kWhiteY = 1.0;
  constexpr double kWhiteZ = 1.08883;

  const double fx = detail::LabCompand(x / kWhiteX);
  const double fy = detail::LabCompand(y / kWhiteY);
  const double fz = detail::LabCompand(z / kWhiteZ);
  return {116.0 * fy - 16.0, 500.0 * (fx - fy), 200.0 * (fy - fz)};
}

inline LabImage RgbToCielab(const RgbImage& rgb) {
  if (rgb.channels() != 3) {
    throw Error(ErrorCode::kInvalidArgument, "expected a 3-channel RGB image");
  }
  LabImage lab(rgb.width(), rgb.height(), 3);
  for (std::size_t i = 0; i < rgb.pixel_count(); ++i) {
    const Lab c =
        RgbToCielab(rgb.at_index(i, 0), rgb.at_index(i, 1), rgb.at_index(i, 2));
    lab.at_index(i, 0) = c.l;
    lab.at_index(i, 1) = c.a;
    lab.at_index(i, 2) = c.b;
  }
  return lab;
}

}  // namespace semmap
