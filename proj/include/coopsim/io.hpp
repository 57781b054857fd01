#pragma once

#include <span>
#include <string>
#include <vector>

#include "coopsim/detection.hpp"
#include "coopsim/fusion_tracking.hpp"
#include "coopsim/evaluation.hpp"
#include "coopsim/latency_estimator.hpp"
#include "coopsim/scenario.hpp"
#include "coopsim/sim_core.hpp"
#include "coopsim/sync_scheduler.hpp"

namespace coopsim {

// Structured config files (JSON). Unknown scenario/trigger names, missing
// rings, or out-of-range values surface as ConfigError; unreadable files as
// IoError.
SimConfig load_sim_config(const std::string& path);
ScenarioConfig load_scenario_config(const std::string& path);
DrivableMap load_drivable_map(const std::string& path);

// CSV exports. Schemas are stable and covered by tests.
void write_event_log_csv(const EventLog& log, const std::string& path);
void write_estimates_csv(std::span<const LatencyEstimate> estimates, const std::string& path);
void write_batches_csv(std::span<const AnchorBatch> batches, const std::string& path);
void write_eval_csv(const EvalReport& report, const std::string& path);

struct TrackSnapshot {
  double anchor_time = 0.0;
  Track track;
};
void write_tracks_csv(std::span<const TrackSnapshot> snapshots, const std::string& path);

// Line-delimited interchange for detections and tracks.
void write_detections_jsonl(std::span<const Detection> detections, const std::string& path);
std::vector<Detection> read_detections_jsonl(const std::string& path);
void write_tracks_jsonl(std::span<const Track> tracks, const std::string& path);
std::vector<Track> read_tracks_jsonl(const std::string& path);

}  // namespace coopsim
