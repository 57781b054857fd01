// Sliding-window latency estimator: prior fallback, outlier gate, and
// long-run consistency under contaminated traffic.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "coopsim/errors.hpp"
#include "coopsim/latency_estimator.hpp"
#include "coopsim/rng.hpp"
#include "coopsim/sim_core.hpp"

using namespace coopsim;

TEST_CASE("config validation") {
  EstimatorConfig ok;
  CHECK_NOTHROW(ok.validate());

  EstimatorConfig bad = ok;
  bad.window_size = 0;
  CHECK_THROWS_AS(bad.validate(), ConfigError);

  bad = ok;
  bad.bootstrap_min = 0;
  CHECK_THROWS_AS(bad.validate(), ConfigError);

  bad = ok;
  bad.bootstrap_min = bad.window_size + 1;
  CHECK_THROWS_AS(bad.validate(), ConfigError);

  bad = ok;
  bad.outlier_k = 0.0;
  CHECK_THROWS_AS(bad.validate(), ConfigError);

  bad = ok;
  bad.sigma_floor = -1.0;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
}

TEST_CASE("empty estimator reports the prior") {
  LatencyEstimator est;
  const LatencyEstimate e = est.estimate();
  CHECK(e.mu == 100.0);
  CHECK(e.sigma == 50.0);
  CHECK(e.sample_count == 0);
}

TEST_CASE("estimates stay on the prior until the bootstrap minimum") {
  EstimatorConfig cfg;
  cfg.bootstrap_min = 5;
  LatencyEstimator est(cfg);
  for (int i = 0; i < 4; ++i) est.observe(50.0);
  CHECK(est.estimate().mu == 100.0);
  est.observe(50.0);
  CHECK(est.estimate().mu == 50.0);
}

TEST_CASE("constant samples floor the deviation") {
  EstimatorConfig cfg;
  cfg.bootstrap_min = 3;
  LatencyEstimator est(cfg);
  for (int i = 0; i < 3; ++i) est.observe(50.0);
  const LatencyEstimate e = est.estimate();
  CHECK(e.mu == 50.0);
  CHECK(e.sigma == cfg.sigma_floor);
  CHECK(e.sample_count == 3);
}

TEST_CASE("three-sample window matches the textbook standard deviation") {
  EstimatorConfig cfg;
  cfg.bootstrap_min = 3;
  LatencyEstimator est(cfg);
  est.observe(40.0);
  est.observe(50.0);
  est.observe(60.0);
  const LatencyEstimate e = est.estimate();
  CHECK(e.mu == doctest::Approx(50.0));
  CHECK(e.sigma == doctest::Approx(10.0));
}

TEST_CASE("single sample with bootstrap_min=1 is already an estimate") {
  EstimatorConfig cfg;
  cfg.bootstrap_min = 1;
  LatencyEstimator est(cfg);
  est.observe(42.0);
  const LatencyEstimate e = est.estimate();
  CHECK(e.mu == 42.0);
  CHECK(e.sigma == cfg.sigma_floor);
}

TEST_CASE("outlier gate rejects samples beyond mu + k sigma") {
  EstimatorConfig cfg;
  cfg.bootstrap_min = 2;
  LatencyEstimator est(cfg);
  CHECK(est.observe(50.0));
  CHECK(est.observe(50.0));  // estimate now (50, sigma_floor=1)
  CHECK_FALSE(est.observe(56.1));  // 56.1 > 50 + 6*1
  CHECK(est.estimate().sample_count == 2);
  CHECK(est.observe(56.0));  // exactly on the gate is accepted
  CHECK(est.estimate().sample_count == 3);
}

TEST_CASE("gate uses the live estimate, not the prior width") {
  // With 20 healthy samples at (50, ~10) the 500 ms burst is rejected.
  EstimatorConfig cfg;
  cfg.bootstrap_min = 10;
  LatencyEstimator est(cfg);
  Rng rng(8);
  for (int i = 0; i < 20; ++i) est.observe(std::max(0.0, rng.normal(50.0, 10.0)));
  const double mu_before = est.estimate().mu;
  CHECK_FALSE(est.observe(500.0));
  CHECK(est.estimate().mu == mu_before);
}

TEST_CASE("gate is inert during bootstrap") {
  LatencyEstimator est;  // bootstrap_min 10
  CHECK(est.observe(1000.0));  // would be an outlier later; accepted now
  CHECK(est.sample_count() == 1);
}

TEST_CASE("window evicts the oldest sample") {
  EstimatorConfig cfg;
  cfg.window_size = 3;
  cfg.bootstrap_min = 1;
  LatencyEstimator est(cfg);
  for (double v : {1.0, 2.0, 3.0, 4.0}) est.observe(v);
  const LatencyEstimate e = est.estimate();
  CHECK(e.sample_count == 3);
  CHECK(e.mu == doctest::Approx(3.0));  // window is [2, 3, 4]
}

TEST_CASE("negative samples are an input error") {
  LatencyEstimator est;
  CHECK_THROWS_AS(est.observe(-0.1), InputError);
}

TEST_CASE("long-run consistency on clean gaussian traffic") {
  EstimatorConfig cfg;
  cfg.window_size = 10000;
  LatencyEstimator est(cfg);
  Rng rng(21);
  for (int i = 0; i < 10000; ++i) est.observe(std::max(0.0, rng.normal(50.0, 10.0)));
  const LatencyEstimate e = est.estimate();
  CHECK(std::abs(e.mu - 50.0) < 0.5);
  CHECK(std::abs(e.sigma - 10.0) < 0.5);
}

TEST_CASE("contaminated traffic converges onto the healthy component") {
  // 5% of samples come from the slow component at 200 ms. The outlier gate
  // must keep the window estimate pinned to the 50 ms component once the
  // bootstrap phase has washed out.
  NodeProfile node;
  node.abnormal_prob = 0.05;
  for (std::uint64_t seed : {1ULL, 2ULL, 3ULL, 4ULL}) {
    LatencyEstimator est;  // defaults: window 100, k=6
    Rng rng(seed);
    for (int i = 0; i < 10000; ++i) est.observe(sample_latency(node, rng));
    const LatencyEstimate e = est.estimate();
    INFO("seed ", seed, " mu ", e.mu, " sigma ", e.sigma);
    CHECK(std::abs(e.mu - 50.0) < 2.0);
    CHECK(e.sigma < 15.0);
  }
}
