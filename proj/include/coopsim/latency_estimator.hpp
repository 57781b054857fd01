#pragma once

#include <cstddef>
#include <deque>

namespace coopsim {

struct LatencyEstimate {
  double mu = 0.0;     // ms
  double sigma = 0.0;  // ms
  std::size_t sample_count = 0;
};

struct EstimatorConfig {
  std::size_t window_size = 100;
  std::size_t bootstrap_min = 10;  // below this, estimate() reports the prior
  double prior_mu = 100.0;         // ms
  double prior_sigma = 50.0;       // ms
  double outlier_k = 6.0;          // reject samples above mu + k*sigma
  double sigma_floor = 1.0;        // ms, keeps the deadline margin non-degenerate

  void validate() const;  // throws ConfigError
};

// Sliding-window mean/stddev of one node's end-to-end latency. Outliers are
// gated against the current estimate so a burst of congested transfers cannot
// inflate the window; a pessimistic prior covers the bootstrap phase.
class LatencyEstimator {
 public:
  LatencyEstimator() = default;
  explicit LatencyEstimator(const EstimatorConfig& config);

  // Returns true if the sample entered the window, false if the outlier gate
  // rejected it. Throws InputError on negative samples.
  bool observe(double latency_ms);

  LatencyEstimate estimate() const;

  std::size_t sample_count() const { return window_.size(); }
  const EstimatorConfig& config() const { return config_; }

 private:
  double window_mean() const;
  double window_stddev(double mean) const;

  EstimatorConfig config_{};
  std::deque<double> window_;
};

}  // namespace coopsim
