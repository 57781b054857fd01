#include "coopsim/sim_core.hpp"

#include <algorithm>
#include <cmath>

#include "coopsim/errors.hpp"

namespace coopsim {

namespace {
constexpr double kTriggerJitterBound = 10.0;  // ms
}

std::string to_string(TriggerMode mode) {
  return mode == TriggerMode::Synchronized ? "Synchronized" : "NaiveAsync";
}

TriggerMode trigger_mode_from_string(const std::string& name) {
  if (name == "Synchronized") return TriggerMode::Synchronized;
  if (name == "NaiveAsync") return TriggerMode::NaiveAsync;
  throw ConfigError("unknown trigger mode: " + name);
}

void SimConfig::validate() const {
  if (num_nodes < 1) throw ConfigError("num_nodes must be >= 1");
  if (anchor_interval <= 0.0) throw ConfigError("anchor_interval must be > 0");
  if (duration < anchor_interval) throw ConfigError("duration must cover at least one interval");
  if (trigger_jitter_sigma < 0.0) throw ConfigError("trigger_jitter_sigma must be >= 0");
  if (!node_profiles.empty() && node_profiles.size() != 1 &&
      node_profiles.size() != static_cast<std::size_t>(num_nodes)) {
    throw ConfigError("node_profiles must be empty, a single broadcast entry, or one per node");
  }
  for (const NodeProfile& p : node_profiles) {
    if (p.normal_sigma < 0.0 || p.abnormal_sigma < 0.0) {
      throw ConfigError("latency sigmas must be >= 0");
    }
    if (p.abnormal_prob < 0.0 || p.abnormal_prob > 1.0) {
      throw ConfigError("abnormal_prob must lie in [0, 1]");
    }
    if (p.loss_prob < 0.0 || p.loss_prob > 1.0) {
      throw ConfigError("loss_prob must lie in [0, 1]");
    }
    if (p.phase_offset && (*p.phase_offset < 0.0 || *p.phase_offset >= anchor_interval)) {
      throw ConfigError("phase_offset must lie in [0, anchor_interval)");
    }
  }
}

NodeProfile SimConfig::profile_for(int node) const {
  if (node_profiles.empty()) return NodeProfile{};
  if (node_profiles.size() == 1) return node_profiles.front();
  return node_profiles.at(static_cast<std::size_t>(node));
}

std::vector<double> schedule_anchors(double start, double duration, double interval) {
  if (interval <= 0.0) throw ConfigError("anchor interval must be > 0");
  if (duration < 0.0) throw ConfigError("duration must be >= 0");
  const auto count = static_cast<std::size_t>(std::floor(duration / interval + 1e-9)) + 1;
  std::vector<double> anchors(count);
  for (std::size_t i = 0; i < count; ++i) anchors[i] = start + static_cast<double>(i) * interval;
  return anchors;
}

double sample_acquisition(double anchor, const NodeProfile& node, TriggerMode mode,
                          double anchor_interval, double trigger_jitter_sigma,
                          double phase_offset, Rng& rng) {
  (void)node;
  if (mode == TriggerMode::Synchronized) {
    if (trigger_jitter_sigma <= 0.0) return anchor;
    return anchor + rng.truncated_normal(0.0, trigger_jitter_sigma, kTriggerJitterBound);
  }
  // Free-running sensor ticking at the anchor period: report the tick nearest
  // to the anchor, halfway ties rounding up.
  const double k = std::floor((anchor - phase_offset) / anchor_interval + 0.5);
  return phase_offset + k * anchor_interval;
}

double sample_latency(const NodeProfile& node, Rng& rng) {
  const bool abnormal = rng.uniform01() < node.abnormal_prob;
  const double raw = abnormal ? rng.normal(node.abnormal_mu, node.abnormal_sigma)
                              : rng.normal(node.normal_mu, node.normal_sigma);
  return std::max(0.0, raw);
}

EventLog run_simulation(const SimConfig& config) {
  config.validate();
  EventLog log;
  log.anchors = schedule_anchors(0.0, config.duration, config.anchor_interval);
  log.messages.reserve(log.anchors.size() * static_cast<std::size_t>(config.num_nodes));

  for (int node = 0; node < config.num_nodes; ++node) {
    const NodeProfile profile = config.profile_for(node);
    Rng rng(config.seed, static_cast<std::uint64_t>(node));
    const double phase = profile.phase_offset
                             ? *profile.phase_offset
                             : rng.uniform(0.0, config.anchor_interval);
    for (double anchor : log.anchors) {
      const bool lost = rng.uniform01() < profile.loss_prob;
      const double acquisition =
          sample_acquisition(anchor, profile, config.trigger_mode, config.anchor_interval,
                             config.trigger_jitter_sigma, phase, rng);
      const double latency = sample_latency(profile, rng);
      if (lost) continue;
      log.messages.push_back(SensorMessage{node, anchor, acquisition, acquisition + latency, {}});
    }
  }

  std::sort(log.messages.begin(), log.messages.end(),
            [](const SensorMessage& a, const SensorMessage& b) {
              if (a.arrival_time != b.arrival_time) return a.arrival_time < b.arrival_time;
              if (a.anchor_time != b.anchor_time) return a.anchor_time < b.anchor_time;
              return a.node_id < b.node_id;
            });
  return log;
}

std::vector<double> timing_errors(const EventLog& log) {
  std::vector<double> errors;
  errors.reserve(log.messages.size());
  for (const SensorMessage& m : log.messages) {
    errors.push_back(m.acquisition_time - m.anchor_time);
  }
  return errors;
}

}  // namespace coopsim
