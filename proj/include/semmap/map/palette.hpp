#pragma once

#include <array>
#include <cstdint>
#include <fstream>
#include <map>
#include <sstream>
#include <string>

#include "semmap/core/error.hpp"

namespace semmap {

struct PaletteEntry {
  std::array<std::uint8_t, 3> rgb{0, 0, 0};
  std::string name;
};

class Palette {
 public:
  void Set(int class_id, PaletteEntry entry) {
    entries_[class_id] = std::move(entry);
  }

  // Unknown classes render black.
  std::array<std::uint8_t, 3> Color(int class_id) const {
    const auto it = entries_.find(class_id);
    return it == entries_.end() ? std::array<std::uint8_t, 3>{0, 0, 0}
                                : it->second.rgb;
  }

  std::string Name(int class_id) const {
    const auto it = entries_.find(class_id);
    return it == entries_.end() ? "unknown" : it->second.name;
  }

  const std::map<int, PaletteEntry>& entries() const noexcept {
    return entries_;
  }

 private:
  std::map<int, PaletteEntry> entries_;
};

// The usual 19-class urban-scene colours.
inline Palette DefaultPalette() {
  static const struct {
    int id;
    std::uint8_t r, g, b;
    const char* name;
  } kEntries[] = {
      {0, 128, 64, 128, "road"},        {1, 244, 35, 232, "sidewalk"},
      {2, 70, 70, 70, "building"},      {3, 102, 102, 156, "wall"},
      {4, 190, 153, 153, "fence"},      {5, 153, 153, 153, "pole"},
      {6, 250, 170, 30, "traffic light"}, {7, 220, 220, 0, "traffic sign"},
      {8, 107, 142, 35, "vegetation"},  {9, 152, 251, 152, "terrain"},
      {10, 70, 130, 180, "sky"},        {11, 220, 20, 60, "person"},
      {12, 255, 0, 0, "rider"},         {13, 0, 0, 142, "car"},
      {14, 0, 0, 70, "truck"},          {15, 0, 60, 100, "bus"},
      {16, 0, 80, 100, "train"},        {17, 0, 0, 230, "motorcycle"},
      {18, 119, 11, 32, "bicycle"},
  };
  Palette p;
  for (const auto& e : kEntries) p.Set(e.id, {{e.r, e.g, e.b}, e.name});
  return p;
}

// Text lines `class_id r g b name`; blank lines and '#' comments are skipped.
inline Palette ParsePalette(std::istream& in, const std::string& source) {
  Palette p;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    int id, r, g, b;
    if (!(ls >> id)) continue;
    if (!(ls >> r >> g >> b) || id < 0 || id > 255 || r < 0 || r > 255 ||
        g < 0 || g > 255 || b < 0 || b > 255) {
      throw Error(ErrorCode::kFormat, source + ":" + std::to_string(line_no) +
                                          ": expected `class_id r g b name`");
    }
    std::string name;
    std::getline(ls >> std::ws, name);
    p.Set(id, {{static_cast<std::uint8_t>(r), static_cast<std::uint8_t>(g),
                static_cast<std::uint8_t>(b)},
               name});
  }
  return p;
}

inline Palette LoadPalette(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open palette " + path);
  return ParsePalette(in, path);
}

}  // namespace semmap
