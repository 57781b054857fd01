#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "coopsim/detection.hpp"
#include "coopsim/rng.hpp"

namespace coopsim {

// Synchronized: every node samples on the shared anchor clock, up to a small
// trigger jitter. NaiveAsync: every node free-runs at the anchor period with
// its own phase; each anchor gets the sample nearest to it.
enum class TriggerMode { Synchronized, NaiveAsync };

std::string to_string(TriggerMode mode);
TriggerMode trigger_mode_from_string(const std::string& name);  // throws ConfigError

struct NodeProfile {
  double normal_mu = 50.0;      // ms, uplink latency of a healthy transfer
  double normal_sigma = 10.0;   // ms
  double abnormal_mu = 200.0;   // ms, congested / retransmitted transfer
  double abnormal_sigma = 20.0; // ms
  double abnormal_prob = 0.0;   // mixture weight of the abnormal component
  double loss_prob = 0.0;       // message never arrives at all
  std::optional<double> phase_offset;  // ms in [0, interval); drawn per run when unset
};

struct SimConfig {
  int num_nodes = 8;
  double anchor_interval = 100.0;  // ms
  double duration = 1000.0;        // ms of simulated time
  TriggerMode trigger_mode = TriggerMode::Synchronized;
  double trigger_jitter_sigma = 1.7;  // ms, truncated at +/-10
  std::vector<NodeProfile> node_profiles;  // empty => defaults; one => broadcast
  std::uint64_t seed = 1;

  void validate() const;  // throws ConfigError
  NodeProfile profile_for(int node) const;
};

struct SensorMessage {
  int node_id = 0;
  double anchor_time = 0.0;       // ms, anchor this sample answers
  double acquisition_time = 0.0;  // ms, when the sensor actually sampled
  double arrival_time = 0.0;      // ms, when the cloud received it
  std::vector<Detection> payload;
};

struct EventLog {
  std::vector<double> anchors;           // ascending
  std::vector<SensorMessage> messages;   // sorted by arrival_time
};

// Anchors start .. start + duration inclusive, spaced by interval.
std::vector<double> schedule_anchors(double start, double duration, double interval);

// Acquisition timestamp of `node`'s sample for one anchor.
double sample_acquisition(double anchor, const NodeProfile& node, TriggerMode mode,
                          double anchor_interval, double trigger_jitter_sigma,
                          double phase_offset, Rng& rng);

// One uplink latency draw from the two-component mixture, clamped at zero.
double sample_latency(const NodeProfile& node, Rng& rng);

EventLog run_simulation(const SimConfig& config);

// Per-message sensor-clock error: acquisition_time - anchor_time.
std::vector<double> timing_errors(const EventLog& log);

}  // namespace coopsim
