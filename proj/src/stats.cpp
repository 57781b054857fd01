#include "coopsim/stats.hpp"

#include <algorithm>
#include <cmath>

#include "coopsim/errors.hpp"

namespace coopsim {

double sample_mean(std::span<const double> values) {
  if (values.empty()) throw InputError("sample_mean: empty sample");
  double sum = 0.0;
  for (double v : values) sum += v;
  return sum / static_cast<double>(values.size());
}

double sample_stddev(std::span<const double> values) {
  if (values.size() < 2) throw InputError("sample_stddev: need >= 2 values");
  const double mean = sample_mean(values);
  double sq = 0.0;
  for (double v : values) sq += (v - mean) * (v - mean);
  return std::sqrt(sq / static_cast<double>(values.size() - 1));
}

double percentile(std::span<const double> values, double p) {
  if (values.empty()) throw InputError("percentile: empty sample");
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  const double rank = std::ceil(p * static_cast<double>(sorted.size()));
  const auto idx = static_cast<std::size_t>(std::max(1.0, rank)) - 1;
  return sorted[std::min(idx, sorted.size() - 1)];
}

SampleStats summarize(std::span<const double> values) {
  if (values.empty()) throw InputError("summarize: empty sample");
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  auto rank = [&](double p) {
    const double r = std::ceil(p * static_cast<double>(sorted.size()));
    const auto idx = static_cast<std::size_t>(std::max(1.0, r)) - 1;
    return sorted[std::min(idx, sorted.size() - 1)];
  };
  SampleStats stats;
  stats.count = sorted.size();
  stats.mean = sample_mean(sorted);
  stats.p50 = rank(0.50);
  stats.p99 = rank(0.99);
  stats.max = sorted.back();
  return stats;
}

std::vector<HistogramBin> histogram(std::span<const double> values, double lo, double hi,
                                    int num_bins) {
  if (num_bins < 1 || hi <= lo) throw InputError("histogram: bad bin layout");
  const double width = (hi - lo) / num_bins;
  std::vector<HistogramBin> bins(static_cast<std::size_t>(num_bins));
  for (std::size_t i = 0; i < bins.size(); ++i) {
    bins[i].low = lo + width * static_cast<double>(i);
    bins[i].high = lo + width * static_cast<double>(i + 1);
  }
  for (double v : values) {
    auto idx = static_cast<long long>(std::floor((v - lo) / width));
    idx = std::clamp(idx, 0LL, static_cast<long long>(num_bins) - 1);
    ++bins[static_cast<std::size_t>(idx)].count;
  }
  return bins;
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

double ks_distance_uniform(std::span<const double> values, double lo, double hi) {
  if (values.empty()) throw InputError("ks_distance_uniform: empty sample");
  if (hi <= lo) throw InputError("ks_distance_uniform: bad support");
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  const auto n = static_cast<double>(sorted.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    const double cdf = std::clamp((sorted[i] - lo) / (hi - lo), 0.0, 1.0);
    const double below = static_cast<double>(i) / n;
    const double above = static_cast<double>(i + 1) / n;
    d = std::max({d, std::abs(cdf - below), std::abs(cdf - above)});
  }
  return d;
}

}  // namespace coopsim
