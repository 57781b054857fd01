#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "coopsim/labels.hpp"

namespace coopsim {

inline constexpr double kPi = 3.141592653589793238462643383279502884;

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  Vec2 operator+(const Vec2& o) const { return {x + o.x, y + o.y}; }
  Vec2 operator-(const Vec2& o) const { return {x - o.x, y - o.y}; }
  Vec2 operator*(double s) const { return {x * s, y * s}; }
  double dot(const Vec2& o) const { return x * o.x + y * o.y; }
  double cross(const Vec2& o) const { return x * o.y - y * o.x; }
  double norm() const;
  Vec2 rotated(double angle) const;
};

// Wrap an angle into (-pi, pi].
double normalize_angle(double angle);

struct Aabb {
  Vec2 lo;
  Vec2 hi;
  bool contains(const Vec2& p) const {
    return p.x >= lo.x && p.x <= hi.x && p.y >= lo.y && p.y <= hi.y;
  }
  double width() const { return hi.x - lo.x; }
  double height() const { return hi.y - lo.y; }
};

// Rectangle in the ground plane: center, extents along the heading axis
// (length) and across it (width), heading in radians.
struct OrientedBox {
  Vec2 center;
  double length = 0.0;
  double width = 0.0;
  double yaw = 0.0;

  std::array<Vec2, 4> corners() const;  // counter-clockwise
  double area() const { return length * width; }
  bool contains(const Vec2& p) const;   // boundary-inclusive
  Aabb bounding_box() const;
};

// Signed shoelace area; positive for counter-clockwise rings.
double polygon_area(std::span<const Vec2> ring);

// Sutherland-Hodgman: clip `subject` against a convex counter-clockwise ring.
std::vector<Vec2> clip_polygon(std::vector<Vec2> subject, std::span<const Vec2> clip);

// Intersection-over-union of two oriented boxes via exact polygon clipping.
// Throws InputError if either box has a non-positive extent.
double oriented_iou(const OrientedBox& a, const OrientedBox& b);

struct ScoredBox {
  OrientedBox box;
  double confidence = 0.0;
  ClassLabel class_label = ClassLabel::Car;
};

// Greedy per-class suppression: boxes ordered by descending confidence
// (ties keep input order); a box survives only if its IoU with every
// already-kept box of the same class is strictly below `iou_threshold`.
// Returns indices into `boxes` of the survivors, in input order.
std::vector<std::size_t> nms_keep_indices(std::span<const ScoredBox> boxes,
                                          double iou_threshold = 0.3);

using Ring = std::vector<Vec2>;

// Drivable area: union of outer rings minus the union of holes.
struct DrivableMap {
  std::vector<Ring> polygons;
  std::vector<Ring> holes;

  void validate() const;  // throws ConfigError on degenerate rings
  bool empty() const { return polygons.empty(); }
};

// Even-odd ray casting with boundary-inclusive semantics: points on an outer
// edge are drivable, points on a hole edge are drivable too (the hole only
// subtracts its strict interior).
bool in_drivable_area(const Vec2& p, const DrivableMap& map);

// Ray-casting parity over a set of rings, boundary handled separately.
bool point_on_ring_boundary(const Vec2& p, const Ring& ring, double eps = 1e-9);
bool even_odd_inside(const Vec2& p, std::span<const Ring> rings);

// Per-frame communication cost in bytes: raw cloud points are three 4-byte
// floats each; a detected box is seven 4-byte floats plus class and count bytes.
std::size_t bandwidth_early(std::size_t num_points);
std::size_t bandwidth_late(std::size_t num_objects);

}  // namespace coopsim
