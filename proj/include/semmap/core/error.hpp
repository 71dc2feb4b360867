#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace semmap {

enum class ErrorCode {
  kInvalidArgument,     // rejected input
  kUndefinedLoss,       // loss over an empty pixel set
  kBehindCamera,        // projection of a point with z <= 0
  kNotFound,            // superpixel id with no pixels
  kDegenerateRegion,    // contour too small or region with holes
  kNoData,              // fit over an empty sample list
  kDegenerateGeometry,  // polygon lifts to non-positive depth
  kFormat,              // malformed input file
  kIo,                  // filesystem failure
};

inline std::string_view ToString(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument:
      return "invalid argument";
    case ErrorCode::kUndefinedLoss:
      return "undefined loss";
    case ErrorCode::kBehindCamera:
      return "behind camera";
    case ErrorCode::kNotFound:
      return "not found";
    case ErrorCode::kDegenerateRegion:
      return "degenerate region";
    case ErrorCode::kNoData:
      return "no data";
    case ErrorCode::kDegenerateGeometry:
      return "degenerate geometry";
    case ErrorCode::kFormat:
      return "format error";
    case ErrorCode::kIo:
      return "i/o error";
  }
  return "unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(ToString(code)) + ": " + message),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace semmap
