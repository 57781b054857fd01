#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "coopsim/detection.hpp"

namespace coopsim {

// Cross-node cluster merged into a single hypothesis.
struct FusedObject {
  Vec2 position;
  double yaw = 0.0;
  BoxSize size;
  std::optional<Vec2> velocity;
  ClassLabel class_label = ClassLabel::Car;
  double fused_confidence = 0.0;
  std::vector<int> contributing_nodes;  // sorted, unique
  double timestamp = 0.0;
};

enum class TrackStatus { Tentative, Confirmed, Dead };

std::string to_string(TrackStatus status);

struct Track {
  int track_id = 0;
  Vec2 position;       // state at last_update
  Vec2 velocity;       // m/s
  ClassLabel class_label = ClassLabel::Car;
  int hits = 0;
  int misses = 0;
  TrackStatus status = TrackStatus::Tentative;
  double last_update = 0.0;  // ms, time of the last measurement update
};

struct TrackerParams {
  double gate = 2.0;            // m, association radius
  double position_alpha = 0.6;  // blend weight toward the measurement
  int confirm_threshold = 3;
  int delete_threshold = 5;
  double late_penalty = 0.5;    // confidence multiplier for after-deadline data

  void validate() const;  // throws ConfigError
};

// Shift a detection along its own velocity to `target_time`. Detections
// without velocity keep their position; only the timestamp moves.
Detection motion_correct(const Detection& det, double target_time_ms);

// Greedy nearest-neighbour clustering across nodes (same class, distance <=
// gate, at most one detection per node per cluster), then confidence-weighted
// merging. Position/yaw/size are confidence-weighted means (yaw via unit
// vectors), fused confidence is the noisy-or of the members.
std::vector<FusedObject> associate_and_fuse(std::span<const std::vector<Detection>> per_node,
                                            double gate = 2.0);

// Constant-velocity alpha tracker over fused objects.
class GlobalTracker {
 public:
  explicit GlobalTracker(const TrackerParams& params = {});

  // Advance to `anchor_time` (strictly increasing across calls, else
  // SequenceError), associate, update, spawn, and age out.
  void step(std::span<const FusedObject> objects, double anchor_time);

  // After-deadline detections: confidence is multiplied by late_penalty, the
  // detection is motion-corrected to `fusion_time`, and only existing tracks
  // may be nudged. Late data never spawns a track.
  void post_fuse_late(std::span<const Detection> late, double fusion_time);

  const std::vector<Track>& tracks() const { return tracks_; }
  std::vector<Track> confirmed() const;

 private:
  Vec2 predicted_position(const Track& t, double time_ms) const;

  TrackerParams params_;
  std::vector<Track> tracks_;
  int next_id_ = 1;
  std::optional<double> last_anchor_;
};

}  // namespace coopsim
