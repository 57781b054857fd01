#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace coopsim {

struct SampleStats {
  double mean = 0.0;
  double p50 = 0.0;
  double p99 = 0.0;
  double max = 0.0;
  std::size_t count = 0;
};

// Mean plus nearest-rank percentiles. Throws InputError on an empty span.
SampleStats summarize(std::span<const double> values);

double sample_mean(std::span<const double> values);
double sample_stddev(std::span<const double> values);

// Nearest-rank percentile of an unsorted sample, p in [0, 1].
double percentile(std::span<const double> values, double p);

struct HistogramBin {
  double low = 0.0;
  double high = 0.0;
  long long count = 0;
};

// Fixed bins over [lo, hi); out-of-range values clamp into the edge bins so
// counts always sum to the sample size.
std::vector<HistogramBin> histogram(std::span<const double> values, double lo, double hi,
                                    int num_bins);

// Standard normal CDF.
double normal_cdf(double x);

// Kolmogorov-Smirnov distance between the sample and the uniform distribution
// on (lo, hi].
double ks_distance_uniform(std::span<const double> values, double lo, double hi);

}  // namespace coopsim
