#pragma once

#include <optional>

#include "coopsim/geometry.hpp"
#include "coopsim/labels.hpp"

namespace coopsim {

struct BoxSize {
  double length = 0.0;  // m
  double width = 0.0;   // m
  double height = 0.0;  // m; carried for bandwidth/serialization, ignored by BEV math
};

// One object hypothesis in the shared ground frame. Positions are meters,
// velocities meters per second, timestamps milliseconds on the common clock.
struct Detection {
  Vec2 position;
  double yaw = 0.0;  // radians, normalized to (-pi, pi]
  BoxSize size;
  std::optional<Vec2> velocity;
  ClassLabel class_label = ClassLabel::Car;
  double confidence = 1.0;
  int node_id = -1;  // -1 when not attributable to a single node
  double timestamp = 0.0;

  OrientedBox box() const { return {position, size.length, size.width, yaw}; }
};

}  // namespace coopsim
