#include "coopsim/geometry.hpp"

#include <algorithm>
#include <cmath>

#include "coopsim/errors.hpp"

namespace coopsim {

double Vec2::norm() const { return std::hypot(x, y); }

Vec2 Vec2::rotated(double angle) const {
  const double c = std::cos(angle);
  const double s = std::sin(angle);
  return {c * x - s * y, s * x + c * y};
}

double normalize_angle(double angle) {
  double a = std::fmod(angle, 2.0 * kPi);
  if (a <= -kPi) a += 2.0 * kPi;
  if (a > kPi) a -= 2.0 * kPi;
  return a;
}

std::array<Vec2, 4> OrientedBox::corners() const {
  const double hl = 0.5 * length;
  const double hw = 0.5 * width;
  const Vec2 ex = Vec2{1.0, 0.0}.rotated(yaw);
  const Vec2 ey = Vec2{0.0, 1.0}.rotated(yaw);
  return {center + ex * hl + ey * hw, center - ex * hl + ey * hw,
          center - ex * hl - ey * hw, center + ex * hl - ey * hw};
}

bool OrientedBox::contains(const Vec2& p) const {
  const Vec2 d = p - center;
  const Vec2 local = d.rotated(-yaw);
  return std::abs(local.x) <= 0.5 * length && std::abs(local.y) <= 0.5 * width;
}

Aabb OrientedBox::bounding_box() const {
  const auto cs = corners();
  Aabb box{cs[0], cs[0]};
  for (const Vec2& c : cs) {
    box.lo.x = std::min(box.lo.x, c.x);
    box.lo.y = std::min(box.lo.y, c.y);
    box.hi.x = std::max(box.hi.x, c.x);
    box.hi.y = std::max(box.hi.y, c.y);
  }
  return box;
}

double polygon_area(std::span<const Vec2> ring) {
  if (ring.size() < 3) return 0.0;
  double twice = 0.0;
  for (std::size_t i = 0, j = ring.size() - 1; i < ring.size(); j = i++) {
    twice += ring[j].cross(ring[i]);
  }
  return 0.5 * twice;
}

std::vector<Vec2> clip_polygon(std::vector<Vec2> subject, std::span<const Vec2> clip) {
  std::vector<Vec2> output = std::move(subject);
  std::vector<Vec2> input;
  for (std::size_t i = 0, j = clip.size() - 1; i < clip.size(); j = i++) {
    if (output.empty()) break;
    const Vec2 a = clip[j];
    const Vec2 b = clip[i];
    const Vec2 edge = b - a;
    input.swap(output);
    output.clear();
    for (std::size_t k = 0, m = input.size() - 1; k < input.size(); m = k++) {
      const Vec2& prev = input[m];
      const Vec2& cur = input[k];
      const double side_prev = edge.cross(prev - a);
      const double side_cur = edge.cross(cur - a);
      if (side_cur >= 0.0) {
        if (side_prev < 0.0) {
          const double t = side_prev / (side_prev - side_cur);
          output.push_back(prev + (cur - prev) * t);
        }
        output.push_back(cur);
      } else if (side_prev >= 0.0) {
        const double t = side_prev / (side_prev - side_cur);
        output.push_back(prev + (cur - prev) * t);
      }
    }
  }
  return output;
}

double oriented_iou(const OrientedBox& a, const OrientedBox& b) {
  if (a.length <= 0.0 || a.width <= 0.0 || b.length <= 0.0 || b.width <= 0.0) {
    throw InputError("oriented_iou: boxes must have positive extents");
  }
  const auto ca = a.corners();
  const auto cb = b.corners();
  const std::vector<Vec2> subject(ca.begin(), ca.end());
  const std::vector<Vec2> inter = clip_polygon(subject, cb);
  const double inter_area = std::max(0.0, polygon_area(inter));
  const double union_area = a.area() + b.area() - inter_area;
  if (union_area <= 0.0) return 0.0;
  return std::clamp(inter_area / union_area, 0.0, 1.0);
}

std::vector<std::size_t> nms_keep_indices(std::span<const ScoredBox> boxes,
                                          double iou_threshold) {
  std::vector<std::size_t> order(boxes.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t l, std::size_t r) {
    return boxes[l].confidence > boxes[r].confidence;
  });

  std::vector<std::size_t> kept;
  for (std::size_t idx : order) {
    bool survives = true;
    for (std::size_t k : kept) {
      if (boxes[k].class_label != boxes[idx].class_label) continue;
      if (oriented_iou(boxes[k].box, boxes[idx].box) >= iou_threshold) {
        survives = false;
        break;
      }
    }
    if (survives) kept.push_back(idx);
  }
  std::sort(kept.begin(), kept.end());
  return kept;
}

void DrivableMap::validate() const {
  auto check = [](const Ring& ring, const char* kind) {
    if (ring.size() < 3) {
      throw ConfigError(std::string("drivable map ") + kind + " needs >= 3 vertices");
    }
    if (std::abs(polygon_area(ring)) <= 0.0) {
      throw ConfigError(std::string("drivable map ") + kind + " has zero area");
    }
  };
  for (const Ring& ring : polygons) check(ring, "polygon");
  for (const Ring& ring : holes) check(ring, "hole");
}

bool point_on_ring_boundary(const Vec2& p, const Ring& ring, double eps) {
  for (std::size_t i = 0, j = ring.size() - 1; i < ring.size(); j = i++) {
    const Vec2 a = ring[j];
    const Vec2 b = ring[i];
    const Vec2 ab = b - a;
    const double len2 = ab.dot(ab);
    double t = len2 > 0.0 ? (p - a).dot(ab) / len2 : 0.0;
    t = std::clamp(t, 0.0, 1.0);
    const Vec2 closest = a + ab * t;
    if ((p - closest).norm() <= eps) return true;
  }
  return false;
}

bool even_odd_inside(const Vec2& p, std::span<const Ring> rings) {
  bool inside = false;
  for (const Ring& ring : rings) {
    for (std::size_t i = 0, j = ring.size() - 1; i < ring.size(); j = i++) {
      const Vec2& a = ring[i];
      const Vec2& b = ring[j];
      if ((a.y > p.y) != (b.y > p.y)) {
        const double x_cross = (b.x - a.x) * (p.y - a.y) / (b.y - a.y) + a.x;
        if (p.x < x_cross) inside = !inside;
      }
    }
  }
  return inside;
}

bool in_drivable_area(const Vec2& p, const DrivableMap& map) {
  for (const Ring& ring : map.polygons) {
    if (point_on_ring_boundary(p, ring)) return true;  // outer edge counts as inside
  }
  if (!even_odd_inside(p, map.polygons)) return false;
  for (const Ring& ring : map.holes) {
    if (point_on_ring_boundary(p, ring)) return true;  // hole edge still drivable
  }
  return !even_odd_inside(p, map.holes);
}

std::size_t bandwidth_early(std::size_t num_points) { return 12 * num_points; }

std::size_t bandwidth_late(std::size_t num_objects) { return 30 * num_objects; }

}  // namespace coopsim
