#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <unordered_set>
#include <vector>

#include "semmap/core/error.hpp"
#include "semmap/core/image_grid.hpp"
#include "semmap/snic/snic.hpp"

namespace semmap {

// Pixel-corner lattice point: corner (x, y) is the top-left corner of pixel
// (x, y), i.e. pixel coordinates (x - 0.5, y - 0.5).
struct LatticePoint {
  int x = 0;
  int y = 0;
  bool operator==(const LatticePoint&) const = default;
};

// Closed boundary of a region as lattice corners, one per boundary edge plus
// the endpoints of any hole bridges. The region lies to the left of travel
// with (u, v) read as (x, y) axes, so the shoelace area is positive and equals
// the region's pixel count.
struct BoundaryContour {
  std::vector<LatticePoint> points;
};

struct Vertex2 {
  double u = 0.0;
  double v = 0.0;
  bool operator==(const Vertex2&) const = default;
};

struct Polygon2D {
  std::vector<Vertex2> vertices;
  std::int32_t superpixel_id = -1;
};

namespace detail {

struct Step {
  int dx;
  int dy;
  bool operator==(const Step&) const = default;
};

inline Step TurnLeft(Step d) { return {-d.dy, d.dx}; }
inline Step TurnRight(Step d) { return {d.dy, -d.dx}; }

// Cells on either side of the edge leaving corner p in direction d.
inline LatticePoint CellLeft(LatticePoint p, Step d) {
  if (d.dx == 1) return {p.x, p.y};
  if (d.dy == 1) return {p.x - 1, p.y};
  if (d.dx == -1) return {p.x - 1, p.y - 1};
  return {p.x, p.y - 1};
}

inline LatticePoint CellRight(LatticePoint p, Step d) {
  if (d.dx == 1) return {p.x, p.y - 1};
  if (d.dy == 1) return {p.x, p.y};
  if (d.dx == -1) return {p.x - 1, p.y};
  return {p.x - 1, p.y - 1};
}

inline std::int64_t EdgeKey(LatticePoint p, Step d) {
  const int dir = d.dx == 1 ? 0 : d.dy == 1 ? 1 : d.dx == -1 ? 2 : 3;
  return ((static_cast<std::int64_t>(p.y) + 1) << 34) |
         ((static_cast<std::int64_t>(p.x) + 1) << 2) | dir;
}

// Follows boundary edges with the region on the left until the walk returns
// to `start` heading in `start_dir`. At a diagonal pinch it turns left, which
// keeps the region 4-connected and the background 8-connected.
template <typename Inside>
std::vector<LatticePoint> FollowCracks(const Inside& inside, LatticePoint start,
                                       Step start_dir,
                                       std::unordered_set<std::int64_t>& used) {
  std::vector<LatticePoint> loop{start};
  used.insert(EdgeKey(start, start_dir));
  LatticePoint p{start.x + start_dir.dx, start.y + start_dir.dy};
  Step d = start_dir;
  while (true) {
    if (!inside(CellLeft(p, d))) {
      d = TurnLeft(d);
    } else if (inside(CellRight(p, d))) {
      d = TurnRight(d);
    }
    if (p == start && d == start_dir) break;
    loop.push_back(p);
    used.insert(EdgeKey(p, d));
    p = {p.x + d.dx, p.y + d.dy};
  }
  return loop;
}

}  // namespace detail

// Crack-following trace of a region's boundary. `members` holds the region's
// row-major pixel indices in ascending order.
//
// The outer loop starts at the top-left corner of the first member pixel and
// runs with the region on its left. Enclosed holes (other superpixels wholly
// surrounded by this one) are traced the same way, which orients them the
// other way round, and spliced into the ring through a zero-width bridge
// running straight up a lattice line from the hole's top-left corner. Bridges
// never pass through a pixel centre.
inline BoundaryContour TraceBoundary(const AssignmentMap& assignment,
                                     std::int32_t id,
                                     std::span<const std::int64_t> members) {
  if (members.empty()) {
    throw Error(ErrorCode::kNotFound,
                "superpixel " + std::to_string(id) + " has no pixels");
  }
  const int width = assignment.width();
  auto inside = [&](LatticePoint c) {
    return assignment.contains(c.x, c.y) && assignment(c.x, c.y) == id;
  };

  std::size_t boundary_edges = 0;
  for (const std::int64_t idx : members) {
    const int u = static_cast<int>(idx % width);
    const int v = static_cast<int>(idx / width);
    boundary_edges += !inside({u + 1, v}) + !inside({u - 1, v}) +
                      !inside({u, v + 1}) + !inside({u, v - 1});
  }

  std::unordered_set<std::int64_t> used;
  const LatticePoint start{static_cast<int>(members.front() % width),
                           static_cast<int>(members.front() / width)};
  BoundaryContour contour;
  contour.points = detail::FollowCracks(inside, start, {1, 0}, used);
  if (contour.points.size() == boundary_edges) return contour;

  // Holes, found through their top edges in row-major order so each is
  // entered at its top-left corner and every hole above it is already merged.
  for (const std::int64_t idx : members) {
    const int u = static_cast<int>(idx % width);
    const int v = static_cast<int>(idx / width);
    if (inside({u, v + 1})) continue;
    const LatticePoint s{u + 1, v + 1};
    const detail::Step d{-1, 0};
    if (used.contains(detail::EdgeKey(s, d))) continue;

    std::vector<LatticePoint> hole = detail::FollowCracks(inside, s, d, used);
    // Rotate so the hole's top-left corner (u, v + 1) comes first.
    std::rotate(hole.begin(), hole.begin() + 1, hole.end());
    const LatticePoint top = hole.front();

    std::size_t anchor = contour.points.size();
    for (std::size_t i = 0; i < contour.points.size(); ++i) {
      const LatticePoint& q = contour.points[i];
      if (q.x == top.x && q.y < top.y &&
          (anchor == contour.points.size() ||
           q.y > contour.points[anchor].y)) {
        anchor = i;
      }
    }
    if (anchor == contour.points.size()) {
      throw Error(ErrorCode::kDegenerateRegion,
                  "superpixel " + std::to_string(id) +
                      ": no bridge target above hole");
    }
    std::vector<LatticePoint> spliced;
    spliced.reserve(contour.points.size() + hole.size() + 2);
    spliced.insert(spliced.end(), contour.points.begin(),
                   contour.points.begin() + anchor + 1);
    spliced.insert(spliced.end(), hole.begin(), hole.end());
    spliced.push_back(top);
    spliced.insert(spliced.end(), contour.points.begin() + anchor,
                   contour.points.end());
    contour.points = std::move(spliced);
  }
  if (used.size() != boundary_edges) {
    throw Error(ErrorCode::kDegenerateRegion,
                "superpixel " + std::to_string(id) + ": traced " +
                    std::to_string(used.size()) + " of " +
                    std::to_string(boundary_edges) + " boundary edges");
  }
  return contour;
}

inline BoundaryContour TraceBoundary(const AssignmentMap& assignment,
                                     std::int32_t id) {
  std::vector<std::int64_t> members;
  for (std::size_t i = 0; i < assignment.pixel_count(); ++i) {
    if (assignment.at_index(i) == id) members.push_back(static_cast<std::int64_t>(i));
  }
  return TraceBoundary(assignment, id, members);
}

inline BoundaryContour TraceBoundary(const SuperpixelPartition& partition,
                                     std::int32_t id) {
  return TraceBoundary(partition.assignment, id);
}

// Twice the signed area (shoelace).
inline double SignedArea(std::span<const Vertex2> poly) {
  double acc = 0.0;
  const std::size_t n = poly.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Vertex2& a = poly[i];
    const Vertex2& b = poly[(i + 1) % n];
    acc += a.u * b.v - b.u * a.v;
  }
  return 0.5 * acc;
}

inline double PointSegmentDistance(const Vertex2& p, const Vertex2& a,
                                   const Vertex2& b) {
  const double ex = b.u - a.u;
  const double ey = b.v - a.v;
  const double len_sq = ex * ex + ey * ey;
  double t = 0.0;
  if (len_sq > 0.0) {
    t = std::clamp(((p.u - a.u) * ex + (p.v - a.v) * ey) / len_sq, 0.0, 1.0);
  }
  const double dx = p.u - (a.u + t * ex);
  const double dy = p.v - (a.v + t * ey);
  return std::sqrt(dx * dx + dy * dy);
}

namespace detail {

inline double Cross(const Vertex2& o, const Vertex2& a, const Vertex2& b) {
  return (a.u - o.u) * (b.v - o.v) - (a.v - o.v) * (b.u - o.u);
}

// Drops vertices whose neighbours continue in the same direction.
inline std::vector<Vertex2> RemoveCollinear(const std::vector<Vertex2>& pts) {
  std::vector<Vertex2> cur = pts;
  bool changed = true;
  while (changed && cur.size() >= 3) {
    changed = false;
    std::vector<Vertex2> next;
    const std::size_t n = cur.size();
    for (std::size_t i = 0; i < n; ++i) {
      const Vertex2& prev = cur[(i + n - 1) % n];
      const Vertex2& p = cur[i];
      const Vertex2& nxt = cur[(i + 1) % n];
      const double cross = Cross(prev, p, nxt);
      const double dot =
          (p.u - prev.u) * (nxt.u - p.u) + (p.v - prev.v) * (nxt.v - p.v);
      const bool duplicate = p == prev;
      if (duplicate || (cross == 0.0 && dot > 0.0)) {
        changed = true;
        continue;
      }
      next.push_back(p);
    }
    cur = std::move(next);
  }
  return cur;
}

inline void DouglasPeucker(const std::vector<Vertex2>& pts, std::size_t first,
                           std::size_t last, double epsilon,
                           std::vector<bool>& keep) {
  // `last` may equal pts.size() to denote the wrap-around to index 0.
  const std::size_t n = pts.size();
  if (last <= first + 1) return;
  const Vertex2& a = pts[first % n];
  const Vertex2& b = pts[last % n];
  double worst = -1.0;
  std::size_t worst_index = first;
  for (std::size_t i = first + 1; i < last; ++i) {
    const double d = PointSegmentDistance(pts[i], a, b);
    if (d > worst) {
      worst = d;
      worst_index = i;
    }
  }
  if (worst > epsilon) {
    keep[worst_index] = true;
    DouglasPeucker(pts, first, worst_index, epsilon, keep);
    DouglasPeucker(pts, worst_index, last, epsilon, keep);
  }
}

inline bool SegmentsCross(const Vertex2& a, const Vertex2& b, const Vertex2& c,
                          const Vertex2& d) {
  const double d1 = Cross(c, d, a);
  const double d2 = Cross(c, d, b);
  const double d3 = Cross(a, b, c);
  const double d4 = Cross(a, b, d);
  if (((d1 > 0 && d2 < 0) || (d1 < 0 && d2 > 0)) &&
      ((d3 > 0 && d4 < 0) || (d3 < 0 && d4 > 0))) {
    return true;
  }
  auto on_segment = [](const Vertex2& p, const Vertex2& q, const Vertex2& r) {
    return std::min(p.u, q.u) <= r.u && r.u <= std::max(p.u, q.u) &&
           std::min(p.v, q.v) <= r.v && r.v <= std::max(p.v, q.v);
  };
  // Collinear overlap between non-adjacent edges.
  if (d1 == 0 && d2 == 0) {
    const bool overlap = (on_segment(c, d, a) && !(a == c) && !(a == d)) ||
                         (on_segment(c, d, b) && !(b == c) && !(b == d)) ||
                         (on_segment(a, b, c) && !(c == a) && !(c == b));
    return overlap;
  }
  return false;
}

}  // namespace detail

// True when no two non-adjacent edges cross or overlap. Edges may touch at a
// shared vertex (weakly simple outlines from diagonal pinches).
inline bool IsSimplePolygon(std::span<const Vertex2> poly) {
  const std::size_t n = poly.size();
  if (n < 3) return false;
  for (std::size_t i = 0; i < n; ++i) {
    const Vertex2& a = poly[i];
    const Vertex2& b = poly[(i + 1) % n];
    for (std::size_t j = i + 2; j < n; ++j) {
      if (i == 0 && j == n - 1) continue;
      const Vertex2& c = poly[j];
      const Vertex2& d = poly[(j + 1) % n];
      if (detail::SegmentsCross(a, b, c, d)) return false;
    }
  }
  return true;
}

inline std::vector<Vertex2> ContourVertices(const BoundaryContour& contour) {
  std::vector<Vertex2> pts;
  pts.reserve(contour.points.size());
  for (const LatticePoint& p : contour.points) {
    pts.push_back({p.x - 0.5, p.y - 0.5});
  }
  return pts;
}

// epsilon == 0 keeps every corner of the contour (lossless). epsilon > 0 runs
// closed-curve Ramer-Douglas-Peucker; if the result is not simple the
// tolerance is halved until it is.
inline Polygon2D ContourToPolygon(const BoundaryContour& contour, double epsilon,
                                  std::int32_t superpixel_id = -1) {
  if (!(epsilon >= 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "epsilon must be >= 0");
  }
  const std::vector<Vertex2> corners =
      detail::RemoveCollinear(ContourVertices(contour));
  if (corners.size() < 3) {
    throw Error(ErrorCode::kDegenerateRegion,
                "contour has fewer than 3 distinct corners");
  }
  Polygon2D poly;
  poly.superpixel_id = superpixel_id;
  poly.vertices = corners;
  if (epsilon == 0.0) return poly;

  // Split the closed curve at vertex 0 and the vertex farthest from it.
  const std::size_t n = corners.size();
  std::size_t far = 1;
  double far_dist = -1.0;
  for (std::size_t i = 1; i < n; ++i) {
    const double du = corners[i].u - corners[0].u;
    const double dv = corners[i].v - corners[0].v;
    const double d = du * du + dv * dv;
    if (d > far_dist) {
      far_dist = d;
      far = i;
    }
  }
  for (double eps = epsilon; eps >= 0.25; eps *= 0.5) {
    std::vector<bool> keep(n, false);
    keep[0] = true;
    keep[far] = true;
    detail::DouglasPeucker(corners, 0, far, eps, keep);
    detail::DouglasPeucker(corners, far, n, eps, keep);
    std::vector<Vertex2> simplified;
    for (std::size_t i = 0; i < n; ++i) {
      if (keep[i]) simplified.push_back(corners[i]);
    }
    simplified = detail::RemoveCollinear(simplified);
    if (simplified.size() >= 3 && IsSimplePolygon(simplified) &&
        SignedArea(simplified) > 0.0) {
      poly.vertices = std::move(simplified);
      return poly;
    }
  }
  return poly;
}

// Pixels whose centres fall inside the polygon (even-odd rule), as ascending
// row-major indices.
inline std::vector<std::int64_t> RasterizePolygon(const Polygon2D& poly,
                                                  int width, int height) {
  std::vector<std::int64_t> pixels;
  const std::size_t n = poly.vertices.size();
  if (n < 3) return pixels;
  double min_v = poly.vertices[0].v, max_v = poly.vertices[0].v;
  for (const Vertex2& p : poly.vertices) {
    min_v = std::min(min_v, p.v);
    max_v = std::max(max_v, p.v);
  }
  const int v0 = std::max(0, static_cast<int>(std::ceil(min_v)));
  const int v1 = std::min(height - 1, static_cast<int>(std::floor(max_v)));
  std::vector<double> xs;
  for (int v = v0; v <= v1; ++v) {
    const double y = v;
    xs.clear();
    for (std::size_t i = 0; i < n; ++i) {
      const Vertex2& a = poly.vertices[i];
      const Vertex2& b = poly.vertices[(i + 1) % n];
      if ((a.v <= y && y < b.v) || (b.v <= y && y < a.v)) {
        xs.push_back(a.u + (y - a.v) * (b.u - a.u) / (b.v - a.v));
      }
    }
    std::sort(xs.begin(), xs.end());
    for (std::size_t k = 0; k + 1 < xs.size(); k += 2) {
      const int ua = std::max(0, static_cast<int>(std::ceil(xs[k])));
      const int ub = std::min(width, static_cast<int>(std::ceil(xs[k + 1])));
      for (int u = ua; u < ub; ++u) {
        pixels.push_back(static_cast<std::int64_t>(v) * width + u);
      }
    }
  }
  return pixels;
}

// Border pixels of the partition: pixels with an 8-neighbour in another
// superpixel or outside the image. Superpixels are 4-connected, so their
// complement is taken with 8-adjacency.
inline std::size_t CountBoundaryPixels(const AssignmentMap& assignment) {
  std::size_t count = 0;
  for (int v = 0; v < assignment.height(); ++v) {
    for (int u = 0; u < assignment.width(); ++u) {
      const std::int32_t id = assignment(u, v);
      bool border = false;
      for (int dv = -1; dv <= 1 && !border; ++dv) {
        for (int du = -1; du <= 1 && !border; ++du) {
          border = !assignment.contains(u + du, v + dv) ||
                   assignment(u + du, v + dv) != id;
        }
      }
      count += border;
    }
  }
  return count;
}

}  // namespace semmap
