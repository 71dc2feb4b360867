#pragma once

#include <cmath>
#include <filesystem>
#include <fstream>
#include <istream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SVD>

#include "semmap/core/camera.hpp"
#include "semmap/core/error.hpp"

namespace semmap {

inline constexpr double kPoseFileTolerance = 1e-3;

// Nearest rotation in the Frobenius sense.
inline Eigen::Matrix3d NearestRotation(const Eigen::Matrix3d& m) {
  Eigen::JacobiSVD<Eigen::Matrix3d> svd(m, Eigen::ComputeFullU |
                                               Eigen::ComputeFullV);
  Eigen::Matrix3d d = Eigen::Matrix3d::Identity();
  d(2, 2) = (svd.matrixU() * svd.matrixV().transpose()).determinant() < 0.0
                ? -1.0
                : 1.0;
  return svd.matrixU() * d * svd.matrixV().transpose();
}

// One camera-to-world pose per line: 12 reals, the row-major 3x4 [R | t].
inline std::vector<CameraPose> ParsePoses(std::istream& in,
                                          const std::string& source) {
  std::vector<CameraPose> poses;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream ls(line);
    std::vector<double> values;
    std::string token;
    while (ls >> token) {
      try {
        std::size_t used = 0;
        values.push_back(std::stod(token, &used));
        if (used != token.size()) throw std::invalid_argument(token);
      } catch (const std::exception&) {
        throw Error(ErrorCode::kFormat, source + ":" + std::to_string(line_no) +
                                            ": not a number: " + token);
      }
    }
    if (values.empty()) continue;
    if (values.size() != 12) {
      throw Error(ErrorCode::kFormat,
                  source + ":" + std::to_string(line_no) + ": expected 12 values, got " +
                      std::to_string(values.size()));
    }
    Eigen::Matrix3d r;
    Eigen::Vector3d t;
    for (int row = 0; row < 3; ++row) {
      for (int col = 0; col < 3; ++col) r(row, col) = values[row * 4 + col];
      t(row) = values[row * 4 + 3];
    }
    const double orth =
        (r.transpose() * r - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff();
    if (!r.allFinite() || !t.allFinite() || !(orth <= kPoseFileTolerance) ||
        !(std::abs(r.determinant() - 1.0) <= kPoseFileTolerance)) {
      throw Error(ErrorCode::kFormat,
                  source + ":" + std::to_string(line_no) +
                      ": rotation block is not a rotation within 1e-3");
    }
    poses.emplace_back(NearestRotation(r), t);
  }
  return poses;
}

inline std::vector<CameraPose> LoadPoses(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open pose file " + path);
  return ParsePoses(in, path);
}

// `key = value` lines; '#' starts a comment.
inline std::map<std::string, std::string> ParseKeyValues(
    std::istream& in, const std::string& source) {
  std::map<std::string, std::string> out;
  std::string line;
  int line_no = 0;
  auto trim = [](std::string s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return std::string();
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
  };
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw Error(ErrorCode::kFormat, source + ":" + std::to_string(line_no) +
                                          ": expected key = value");
    }
    const std::string key = trim(line.substr(0, eq));
    if (key.empty()) {
      throw Error(ErrorCode::kFormat,
                  source + ":" + std::to_string(line_no) + ": empty key");
    }
    out[key] = trim(line.substr(eq + 1));
  }
  return out;
}

struct FrameEntry {
  int frame_id = 0;
  std::string rgb_path;
  std::string depth_path;
  std::string label_path;
};

// Index lines `frame_id rgb_path depth_path label_path`; relative paths are
// taken relative to `base_dir`.
inline std::vector<FrameEntry> ParseFrameIndex(std::istream& in,
                                               const std::string& source,
                                               const std::filesystem::path& base_dir) {
  std::vector<FrameEntry> frames;
  std::string line;
  int line_no = 0;
  auto resolve = [&](const std::string& p) {
    const std::filesystem::path path(p);
    return (path.is_absolute() ? path : base_dir / path).string();
  };
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    std::vector<std::string> tokens;
    std::string token;
    while (ls >> token) tokens.push_back(token);
    if (tokens.empty()) continue;
    if (tokens.size() != 4) {
      throw Error(ErrorCode::kFormat, source + ":" + std::to_string(line_no) +
                                          ": expected `frame_id rgb depth labels`");
    }
    FrameEntry f;
    try {
      std::size_t used = 0;
      f.frame_id = std::stoi(tokens[0], &used);
      if (used != tokens[0].size() || f.frame_id < 0) throw std::invalid_argument("");
    } catch (const std::exception&) {
      throw Error(ErrorCode::kFormat, source + ":" + std::to_string(line_no) +
                                          ": bad frame id " + tokens[0]);
    }
    f.rgb_path = resolve(tokens[1]);
    f.depth_path = resolve(tokens[2]);
    f.label_path = resolve(tokens[3]);
    frames.push_back(std::move(f));
  }
  return frames;
}

inline std::vector<FrameEntry> LoadFrameIndex(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open frame index " + path);
  return ParseFrameIndex(in, path,
                         std::filesystem::path(path).parent_path());
}

}  // namespace semmap
