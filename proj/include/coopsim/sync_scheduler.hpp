#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "coopsim/latency_estimator.hpp"
#include "coopsim/sim_core.hpp"
#include "coopsim/stats.hpp"

namespace coopsim {

// Adaptive: fuse as soon as every node reported, but never later than the
// estimated deadline. NaiveWaitAll: block until the last message regardless.
enum class SchedulerMode { Adaptive, NaiveWaitAll };

std::string to_string(SchedulerMode mode);
SchedulerMode scheduler_mode_from_string(const std::string& name);  // throws ConfigError

struct SchedulerConfig {
  double n_sigma = 4.0;  // deadline margin in estimated standard deviations
  SchedulerMode mode = SchedulerMode::Adaptive;
  EstimatorConfig estimator;

  void validate() const;  // throws ConfigError
};

// Everything the cloud decided about one anchor.
struct AnchorBatch {
  double anchor_time = 0.0;
  double deadline = 0.0;      // anchor + max_i(mu_i + n_sigma * sigma_i)
  double trigger_time = 0.0;  // when fusion actually fired
  bool full_match = false;    // one on-time message from every node
  int duplicates = 0;         // extra messages per (anchor, node); earliest kept
  std::vector<SensorMessage> normal_messages;  // arrived by the trigger
  std::vector<SensorMessage> late_messages;    // arrived after it
};

// Fusion deadline for one anchor given per-node latency estimates.
// Throws ConfigError when `estimates` is empty or n_sigma <= 0.
double compute_deadline(double anchor, std::span<const LatencyEstimate> estimates,
                        double n_sigma);

// Classify one anchor's messages (already deduplicated to <= 1 per node is NOT
// required; duplicates are dropped here, earliest arrival wins).
AnchorBatch classify_and_trigger(double anchor, double deadline,
                                 std::span<const SensorMessage> messages,
                                 SchedulerMode mode, int num_nodes);

// Replays an event log anchor by anchor. In live mode each node's estimator
// ingests the end-to-end delay of every message that has arrived before the
// anchor being closed, so deadlines only ever use information from the past.
class SyncScheduler {
 public:
  SyncScheduler(const SchedulerConfig& config, int num_nodes);

  // Pin per-node estimates (e.g. the true latency parameters) instead of
  // learning them; useful for comparing against closed-form predictions.
  void freeze_estimates(std::vector<LatencyEstimate> estimates);

  std::vector<AnchorBatch> process(const EventLog& log);

  std::vector<LatencyEstimate> estimates() const;

 private:
  SchedulerConfig config_;
  int num_nodes_ = 0;
  std::vector<LatencyEstimator> estimators_;
  std::optional<std::vector<LatencyEstimate>> frozen_;
};

// Share of anchors with a full on-time match. Throws InputError when empty.
double full_match_rate(std::span<const AnchorBatch> batches);

// trigger_time - anchor_time per batch.
std::vector<double> reaction_times(std::span<const AnchorBatch> batches);
SampleStats reaction_time_stats(std::span<const AnchorBatch> batches);

// Acquisition-time spread (max - min) per batch over kept messages. Batches
// with fewer than two messages are undefined and skipped; `skipped` reports
// how many were.
std::vector<double> min_max_delays(std::span<const AnchorBatch> batches,
                                   std::size_t* skipped = nullptr);

}  // namespace coopsim
