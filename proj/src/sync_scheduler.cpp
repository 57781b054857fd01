#include "coopsim/sync_scheduler.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "coopsim/errors.hpp"

namespace coopsim {

std::string to_string(SchedulerMode mode) {
  return mode == SchedulerMode::Adaptive ? "Adaptive" : "NaiveWaitAll";
}

SchedulerMode scheduler_mode_from_string(const std::string& name) {
  if (name == "Adaptive") return SchedulerMode::Adaptive;
  if (name == "NaiveWaitAll") return SchedulerMode::NaiveWaitAll;
  throw ConfigError("unknown scheduler mode: " + name);
}

void SchedulerConfig::validate() const {
  if (n_sigma <= 0.0) throw ConfigError("n_sigma must be > 0");
  estimator.validate();
}

double compute_deadline(double anchor, std::span<const LatencyEstimate> estimates,
                        double n_sigma) {
  if (estimates.empty()) throw ConfigError("compute_deadline: no participating nodes");
  if (n_sigma <= 0.0) throw ConfigError("compute_deadline: n_sigma must be > 0");
  double offset = 0.0;
  for (const LatencyEstimate& e : estimates) {
    offset = std::max(offset, e.mu + n_sigma * e.sigma);
  }
  return anchor + offset;
}

AnchorBatch classify_and_trigger(double anchor, double deadline,
                                 std::span<const SensorMessage> messages,
                                 SchedulerMode mode, int num_nodes) {
  AnchorBatch batch;
  batch.anchor_time = anchor;
  batch.deadline = deadline;

  // Earliest message per node wins; later copies only counted.
  std::vector<const SensorMessage*> kept(static_cast<std::size_t>(num_nodes), nullptr);
  for (const SensorMessage& m : messages) {
    if (m.node_id < 0 || m.node_id >= num_nodes) {
      throw InputError("classify_and_trigger: message from unknown node");
    }
    auto& slot = kept[static_cast<std::size_t>(m.node_id)];
    if (slot == nullptr) {
      slot = &m;
    } else if (m.arrival_time < slot->arrival_time) {
      slot = &m;
      ++batch.duplicates;
    } else {
      ++batch.duplicates;
    }
  }

  double last_arrival = anchor;
  int present = 0;
  for (const SensorMessage* m : kept) {
    if (m == nullptr) continue;
    ++present;
    last_arrival = std::max(last_arrival, m->arrival_time);
  }

  if (mode == SchedulerMode::Adaptive) {
    batch.trigger_time = (present == num_nodes) ? std::min(last_arrival, deadline) : deadline;
  } else {
    // Wait-for-all has no deadline of its own; it simply fires on the last
    // arrival, so every kept message counts as on time.
    batch.trigger_time = last_arrival;
    batch.deadline = batch.trigger_time;
  }

  for (const SensorMessage* m : kept) {
    if (m == nullptr) continue;
    if (m->arrival_time <= batch.trigger_time) {
      batch.normal_messages.push_back(*m);
    } else {
      batch.late_messages.push_back(*m);
    }
  }
  batch.full_match = batch.normal_messages.size() == static_cast<std::size_t>(num_nodes);
  return batch;
}

SyncScheduler::SyncScheduler(const SchedulerConfig& config, int num_nodes)
    : config_(config), num_nodes_(num_nodes) {
  config_.validate();
  if (num_nodes_ < 1) throw ConfigError("SyncScheduler: num_nodes must be >= 1");
  estimators_.assign(static_cast<std::size_t>(num_nodes_), LatencyEstimator(config_.estimator));
}

void SyncScheduler::freeze_estimates(std::vector<LatencyEstimate> estimates) {
  if (estimates.size() != static_cast<std::size_t>(num_nodes_)) {
    throw ConfigError("freeze_estimates: need one estimate per node");
  }
  frozen_ = std::move(estimates);
}

std::vector<LatencyEstimate> SyncScheduler::estimates() const {
  if (frozen_) return *frozen_;
  std::vector<LatencyEstimate> out;
  out.reserve(estimators_.size());
  for (const LatencyEstimator& e : estimators_) out.push_back(e.estimate());
  return out;
}

std::vector<AnchorBatch> SyncScheduler::process(const EventLog& log) {
  // Bucket messages by anchor index. Anchor values in a log come from one
  // schedule_anchors call, so nearest-match with a half-interval guard is safe.
  const std::size_t n_anchors = log.anchors.size();
  if (n_anchors == 0) throw InputError("process: log has no anchors");
  std::vector<std::vector<const SensorMessage*>> per_anchor(n_anchors);
  const double interval = n_anchors > 1 ? log.anchors[1] - log.anchors[0]
                                        : std::numeric_limits<double>::infinity();
  for (const SensorMessage& m : log.messages) {
    auto it = std::lower_bound(log.anchors.begin(), log.anchors.end(), m.anchor_time);
    std::size_t idx = static_cast<std::size_t>(it - log.anchors.begin());
    if (idx == n_anchors || (idx > 0 && m.anchor_time - log.anchors[idx - 1] <
                                            log.anchors[idx] - m.anchor_time)) {
      --idx;
    }
    if (std::abs(log.anchors[idx] - m.anchor_time) > interval * 0.5) {
      throw InputError("process: message references an unknown anchor");
    }
    per_anchor[idx].push_back(&m);
  }

  // Live estimators only ever see messages that arrived before the anchor
  // being closed; log.messages is sorted by arrival, so a cursor suffices.
  const bool live = !frozen_ && config_.mode == SchedulerMode::Adaptive;
  std::size_t cursor = 0;

  std::vector<AnchorBatch> batches;
  batches.reserve(n_anchors);
  for (std::size_t i = 0; i < n_anchors; ++i) {
    const double anchor = log.anchors[i];
    if (live) {
      for (; cursor < log.messages.size() && log.messages[cursor].arrival_time <= anchor;
           ++cursor) {
        const SensorMessage& m = log.messages[cursor];
        const double delay = std::max(0.0, m.arrival_time - m.anchor_time);
        estimators_[static_cast<std::size_t>(m.node_id)].observe(delay);
      }
    }
    const double deadline = config_.mode == SchedulerMode::Adaptive
                                ? compute_deadline(anchor, estimates(), config_.n_sigma)
                                : std::numeric_limits<double>::infinity();
    std::vector<SensorMessage> msgs;
    msgs.reserve(per_anchor[i].size());
    for (const SensorMessage* m : per_anchor[i]) msgs.push_back(*m);
    batches.push_back(classify_and_trigger(anchor, deadline, msgs, config_.mode, num_nodes_));
  }
  return batches;
}

double full_match_rate(std::span<const AnchorBatch> batches) {
  if (batches.empty()) throw InputError("full_match_rate: no batches");
  std::size_t full = 0;
  for (const AnchorBatch& b : batches) full += b.full_match ? 1 : 0;
  return static_cast<double>(full) / static_cast<double>(batches.size());
}

std::vector<double> reaction_times(std::span<const AnchorBatch> batches) {
  std::vector<double> out;
  out.reserve(batches.size());
  for (const AnchorBatch& b : batches) out.push_back(b.trigger_time - b.anchor_time);
  return out;
}

SampleStats reaction_time_stats(std::span<const AnchorBatch> batches) {
  return summarize(reaction_times(batches));
}

std::vector<double> min_max_delays(std::span<const AnchorBatch> batches,
                                   std::size_t* skipped) {
  std::vector<double> out;
  std::size_t undefined = 0;
  for (const AnchorBatch& b : batches) {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    std::size_t n = 0;
    auto scan = [&](const std::vector<SensorMessage>& msgs) {
      for (const SensorMessage& m : msgs) {
        lo = std::min(lo, m.acquisition_time);
        hi = std::max(hi, m.acquisition_time);
        ++n;
      }
    };
    scan(b.normal_messages);
    scan(b.late_messages);
    if (n < 2) {
      ++undefined;
      continue;
    }
    out.push_back(hi - lo);
  }
  if (skipped) *skipped = undefined;
  return out;
}

}  // namespace coopsim
