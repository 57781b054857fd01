#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "coopsim/detection.hpp"
#include "coopsim/geometry.hpp"
#include "coopsim/rng.hpp"

namespace coopsim {

// Expected cloud points returned by a LiDAR for a class at the reference
// range; scales with the inverse square of distance beyond it.
double class_base_points(ClassLabel label);
BoxSize class_footprint(ClassLabel label);

struct Waypoint {
  Vec2 position;
  double speed = 0.0;  // m/s toward the next waypoint
};

// Piecewise constant-velocity trajectory; the object parks at the last
// waypoint once the path is exhausted.
struct SceneObject {
  int object_id = 0;
  ClassLabel class_label = ClassLabel::Car;
  std::vector<Waypoint> waypoints;
  BoxSize footprint;       // zero => class default
  double base_points = 0;  // zero => class default
};

struct ObjectState {
  Vec2 position;
  double yaw = 0.0;
  Vec2 velocity;
};

ObjectState object_state_at(const SceneObject& object, double time_ms);

struct NodeModel {
  int node_id = 0;
  Vec2 position;
  double fov_center = 0.0;          // radians
  double fov_width = 2.0 * kPi;     // >= 2*pi means full circle
  double max_range = 100.0;         // m
  double pos_noise_sigma = 0.0;     // m, isotropic position noise
  double miss_rate_base = 0.0;      // chance to drop an otherwise visible object
  double fp_rate = 0.0;             // Poisson mean of false boxes per frame
  double fp_outside_map_fraction = 0.0;  // share of false boxes forced off-map

  void validate() const;  // throws ConfigError
};

struct ObservationParams {
  double detect_threshold = 15.0;  // min cloud points to form a detection
  double reference_range = 10.0;   // m
  Aabb fp_region{{-60.0, -60.0}, {60.0, 60.0}};  // where false boxes can appear
};

struct FrameObject {
  int object_id = 0;
  ClassLabel class_label = ClassLabel::Car;
  Vec2 position;
  double yaw = 0.0;
  BoxSize size;
  Vec2 velocity;
  double base_points = 0.0;  // cloud points at the reference range

  OrientedBox box() const { return {position, size.length, size.width, yaw}; }
};

struct FrameTruth {
  double anchor_time = 0.0;
  std::vector<FrameObject> objects;
};

struct ScenarioConfig {
  std::string scenario = "custom";  // roundabout | crossing | occlusion_split | custom
  double duration = 10000.0;        // ms
  double anchor_interval = 100.0;   // ms
  std::vector<SceneObject> objects;  // empty + named scenario => generated
  std::vector<NodeModel> nodes;
  NodeModel node_defaults;  // noise/miss/fp knobs copied onto generated nodes
  ObservationParams observation;
  DrivableMap map;
  double nms_iou = 0.3;
  std::uint64_t seed = 1;

  void validate() const;  // throws ConfigError
};

// Fully materialized scene: resolved objects/nodes plus per-anchor truth.
struct Scenario {
  ScenarioConfig config;
  std::vector<FrameTruth> frames;
};

// Resolve a named scenario (layout randomized by `seed`) and sample ground
// truth at every anchor. Custom configs must already carry objects and nodes.
Scenario build_scenario(const ScenarioConfig& config, std::uint64_t seed);
std::vector<FrameTruth> generate_scene(const ScenarioConfig& config, std::uint64_t seed);

// Expected cloud points `node` collects from an object at distance `range`.
double visible_points(double base_points, double range, double reference_range);

// One node's detections for one frame: range/FOV culling, the point-budget
// detectability test, position noise, misses, and false boxes.
std::vector<Detection> observe(const FrameTruth& frame, const NodeModel& node,
                               const ObservationParams& params, const DrivableMap& map,
                               Rng& rng);

// Pool every node's cloud points before detecting: objects clear the point
// threshold jointly and position noise shrinks with the pooled evidence.
std::vector<Detection> early_fusion_detect(const FrameTruth& frame,
                                           std::span<const NodeModel> nodes,
                                           const ObservationParams& params, Rng& rng);

// Each node detects alone; box lists are concatenated and deduplicated by NMS.
// `boxes_shipped`, when given, reports the pre-suppression pool size (what the
// nodes actually sent upstream).
std::vector<Detection> late_fusion_detect(const FrameTruth& frame,
                                          std::span<const NodeModel> nodes,
                                          const ObservationParams& params,
                                          const DrivableMap& map, double nms_iou,
                                          std::uint64_t seed, std::uint64_t anchor_index,
                                          std::size_t* boxes_shipped = nullptr);

// Keep only detections whose center lies in the drivable area.
std::vector<Detection> apply_map_filter(std::span<const Detection> detections,
                                        const DrivableMap& map);

enum class FusionMode { Early, Late };

struct PipelineResult {
  std::vector<std::vector<Detection>> per_frame;  // aligned with scenario.frames
  double mean_payload_units = 0.0;  // cloud points (early) or boxes (late) per frame
};

// Run a whole scenario through one fusion mode, optionally map-filtered.
PipelineResult run_fusion_pipeline(const Scenario& scenario, FusionMode mode,
                                   bool apply_map);

}  // namespace coopsim
