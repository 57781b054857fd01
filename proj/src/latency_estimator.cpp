#include "coopsim/latency_estimator.hpp"

#include <algorithm>
#include <cmath>

#include "coopsim/errors.hpp"

namespace coopsim {

void EstimatorConfig::validate() const {
  if (window_size < 1) throw ConfigError("window_size must be >= 1");
  if (bootstrap_min < 1) throw ConfigError("bootstrap_min must be >= 1");
  if (bootstrap_min > window_size) {
    throw ConfigError("bootstrap_min cannot exceed window_size");
  }
  if (prior_mu < 0.0 || prior_sigma < 0.0) throw ConfigError("prior must be non-negative");
  if (outlier_k <= 0.0) throw ConfigError("outlier_k must be > 0");
  if (sigma_floor < 0.0) throw ConfigError("sigma_floor must be >= 0");
}

LatencyEstimator::LatencyEstimator(const EstimatorConfig& config) : config_(config) {
  config_.validate();
}

bool LatencyEstimator::observe(double latency_ms) {
  if (latency_ms < 0.0) throw InputError("latency sample must be >= 0");
  if (window_.size() >= config_.bootstrap_min) {
    const LatencyEstimate current = estimate();
    if (latency_ms > current.mu + config_.outlier_k * current.sigma) return false;
  }
  window_.push_back(latency_ms);
  if (window_.size() > config_.window_size) window_.pop_front();
  return true;
}

LatencyEstimate LatencyEstimator::estimate() const {
  if (window_.size() < config_.bootstrap_min) {
    return {config_.prior_mu, config_.prior_sigma, window_.size()};
  }
  const double mean = window_mean();
  const double sigma = std::max(config_.sigma_floor, window_stddev(mean));
  return {mean, sigma, window_.size()};
}

double LatencyEstimator::window_mean() const {
  double sum = 0.0;
  for (double v : window_) sum += v;
  return sum / static_cast<double>(window_.size());
}

double LatencyEstimator::window_stddev(double mean) const {
  if (window_.size() < 2) return 0.0;
  double sq = 0.0;
  for (double v : window_) sq += (v - mean) * (v - mean);
  return std::sqrt(sq / static_cast<double>(window_.size() - 1));
}

}  // namespace coopsim
