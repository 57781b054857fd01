// Event-log simulator: anchor scheduling, trigger models, the latency
// mixture, and the determinism contract.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <set>
#include <vector>

#include "coopsim/errors.hpp"
#include "coopsim/sim_core.hpp"
#include "coopsim/stats.hpp"

using namespace coopsim;

TEST_CASE("anchor schedule covers start..start+duration inclusive") {
  CHECK(schedule_anchors(400, 200, 100) == std::vector<double>{400, 500, 600});
  CHECK(schedule_anchors(0, 0, 100) == std::vector<double>{0});
  CHECK(schedule_anchors(0, 1000, 100).size() == 11);
  // Non-divisible duration floors to the last anchor that still fits.
  CHECK(schedule_anchors(0, 250, 100) == std::vector<double>{0, 100, 200});
  CHECK_THROWS_AS(schedule_anchors(0, 100, 0), ConfigError);
  CHECK_THROWS_AS(schedule_anchors(0, 100, -5), ConfigError);
}

TEST_CASE("trigger mode names round-trip") {
  CHECK(to_string(TriggerMode::Synchronized) == "Synchronized");
  CHECK(to_string(TriggerMode::NaiveAsync) == "NaiveAsync");
  CHECK(trigger_mode_from_string("Synchronized") == TriggerMode::Synchronized);
  CHECK(trigger_mode_from_string("NaiveAsync") == TriggerMode::NaiveAsync);
  CHECK_THROWS_AS(trigger_mode_from_string("sometimes"), ConfigError);
}

TEST_CASE("config validation rejects out-of-range values") {
  SimConfig ok;
  CHECK_NOTHROW(ok.validate());

  SimConfig bad = ok;
  bad.num_nodes = 0;
  CHECK_THROWS_AS(bad.validate(), ConfigError);

  bad = ok;
  bad.anchor_interval = 0.0;
  CHECK_THROWS_AS(bad.validate(), ConfigError);

  bad = ok;
  bad.duration = 50.0;  // shorter than one interval
  CHECK_THROWS_AS(bad.validate(), ConfigError);

  bad = ok;
  bad.trigger_jitter_sigma = -1.0;
  CHECK_THROWS_AS(bad.validate(), ConfigError);

  bad = ok;
  bad.node_profiles.resize(1);
  bad.node_profiles[0].abnormal_prob = 1.5;
  CHECK_THROWS_AS(bad.validate(), ConfigError);

  bad = ok;
  bad.node_profiles.resize(1);
  bad.node_profiles[0].phase_offset = 150.0;  // must be < interval
  CHECK_THROWS_AS(bad.validate(), ConfigError);

  bad = ok;
  bad.node_profiles.resize(3);  // neither 1 nor num_nodes
  CHECK_THROWS_AS(bad.validate(), ConfigError);
}

TEST_CASE("profile lists broadcast: empty, one, or per-node") {
  SimConfig cfg;
  cfg.num_nodes = 4;
  CHECK(cfg.profile_for(2).normal_mu == 50.0);  // defaults

  NodeProfile slow;
  slow.normal_mu = 80.0;
  cfg.node_profiles = {slow};
  CHECK(cfg.profile_for(0).normal_mu == 80.0);
  CHECK(cfg.profile_for(3).normal_mu == 80.0);

  cfg.node_profiles.assign(4, NodeProfile{});
  cfg.node_profiles[2].normal_mu = 65.0;
  CHECK(cfg.profile_for(2).normal_mu == 65.0);
  CHECK(cfg.profile_for(1).normal_mu == 50.0);
}

TEST_CASE("synchronized trigger with zero jitter hits the anchor exactly") {
  NodeProfile node;
  Rng rng(1);
  const double t = sample_acquisition(500, node, TriggerMode::Synchronized, 100, 0.0, 0.0, rng);
  CHECK(t == 500.0);
}

TEST_CASE("synchronized trigger jitter is truncated at +/-10 ms") {
  NodeProfile node;
  Rng rng(2);
  for (int i = 0; i < 20000; ++i) {
    const double t =
        sample_acquisition(500, node, TriggerMode::Synchronized, 100, 1.7, 0.0, rng);
    REQUIRE(std::abs(t - 500.0) <= 10.0);
  }
}

TEST_CASE("free-running trigger picks the nearest tick") {
  NodeProfile node;
  Rng rng(3);
  // Ticks at 30, 130, 230, ...; anchor 500 is nearest to 530.
  CHECK(sample_acquisition(500, node, TriggerMode::NaiveAsync, 100, 0.0, 30.0, rng) == 530.0);
  // Phase 80: anchor 500 is nearest to 480.
  CHECK(sample_acquisition(500, node, TriggerMode::NaiveAsync, 100, 0.0, 80.0, rng) == 480.0);
  // Exact tie at half an interval resolves upward: error is +50, never -50.
  CHECK(sample_acquisition(100, node, TriggerMode::NaiveAsync, 100, 0.0, 50.0, rng) == 150.0);
}

TEST_CASE("free-running timing error stays within half an interval") {
  NodeProfile node;
  for (int run = 0; run < 500; ++run) {
    Rng rng(derive_seed(17, run));
    const double phase = rng.uniform(0.0, 100.0);
    for (double anchor : {0.0, 100.0, 700.0}) {
      const double t =
          sample_acquisition(anchor, node, TriggerMode::NaiveAsync, 100, 0.0, phase, rng);
      const double err = t - anchor;
      REQUIRE(err > -50.0);
      REQUIRE(err <= 50.0);
    }
  }
}

TEST_CASE("latency mixture selects the configured component") {
  NodeProfile node;  // defaults: N(50,10^2) normal, N(200,20^2) abnormal

  SUBCASE("pure normal traffic") {
    node.abnormal_prob = 0.0;
    Rng rng(4);
    std::vector<double> xs(50000);
    for (double& x : xs) x = sample_latency(node, rng);
    CHECK(sample_mean(xs) == doctest::Approx(50.0).epsilon(0.005));
    CHECK(sample_stddev(xs) == doctest::Approx(10.0).epsilon(0.02));
  }

  SUBCASE("pure abnormal traffic") {
    node.abnormal_prob = 1.0;
    Rng rng(5);
    std::vector<double> xs(50000);
    for (double& x : xs) x = sample_latency(node, rng);
    CHECK(sample_mean(xs) == doctest::Approx(200.0).epsilon(0.005));
    CHECK(sample_stddev(xs) == doctest::Approx(20.0).epsilon(0.02));
  }

  SUBCASE("degenerate mixture produces only the two means") {
    node.normal_sigma = 0.0;
    node.abnormal_sigma = 0.0;
    node.abnormal_prob = 0.5;
    Rng rng(6);
    std::set<double> values;
    for (int i = 0; i < 1000; ++i) values.insert(sample_latency(node, rng));
    CHECK(values == std::set<double>{50.0, 200.0});
  }

  SUBCASE("draws clamp at zero") {
    node.normal_mu = 1.0;
    node.normal_sigma = 10.0;
    Rng rng(7);
    double min_seen = 1e9;
    for (int i = 0; i < 20000; ++i) min_seen = std::min(min_seen, sample_latency(node, rng));
    CHECK(min_seen == 0.0);
  }
}

TEST_CASE("one message per node per anchor when nothing is lost") {
  SimConfig cfg;
  cfg.num_nodes = 8;
  cfg.duration = 100.0;  // anchors at 0 and 100
  const EventLog log = run_simulation(cfg);
  CHECK(log.anchors.size() == 2);
  CHECK(log.messages.size() == 16);
  CHECK(std::is_sorted(log.messages.begin(), log.messages.end(),
                       [](const SensorMessage& a, const SensorMessage& b) {
                         return a.arrival_time < b.arrival_time;
                       }));
  for (const SensorMessage& m : log.messages) {
    CHECK(m.arrival_time >= m.acquisition_time);
  }
}

TEST_CASE("loss probability removes messages") {
  SimConfig cfg;
  cfg.num_nodes = 4;
  cfg.duration = 10000.0;
  cfg.node_profiles.resize(1);

  cfg.node_profiles[0].loss_prob = 1.0;
  CHECK(run_simulation(cfg).messages.empty());

  cfg.node_profiles[0].loss_prob = 0.5;
  const EventLog log = run_simulation(cfg);
  const double kept =
      static_cast<double>(log.messages.size()) / (4.0 * static_cast<double>(log.anchors.size()));
  CHECK(kept == doctest::Approx(0.5).epsilon(0.1));
}

TEST_CASE("identical config and seed give identical logs") {
  SimConfig cfg;
  cfg.seed = 99;
  cfg.duration = 2000.0;
  cfg.node_profiles.resize(1);
  cfg.node_profiles[0].abnormal_prob = 0.05;
  const EventLog a = run_simulation(cfg);
  const EventLog b = run_simulation(cfg);
  REQUIRE(a.messages.size() == b.messages.size());
  for (std::size_t i = 0; i < a.messages.size(); ++i) {
    CHECK(a.messages[i].node_id == b.messages[i].node_id);
    CHECK(a.messages[i].anchor_time == b.messages[i].anchor_time);
    CHECK(a.messages[i].acquisition_time == b.messages[i].acquisition_time);
    CHECK(a.messages[i].arrival_time == b.messages[i].arrival_time);
  }

  SimConfig other = cfg;
  other.seed = 100;
  const EventLog c = run_simulation(other);
  bool same = a.messages.size() == c.messages.size();
  if (same) {
    same = std::equal(a.messages.begin(), a.messages.end(), c.messages.begin(),
                      [](const SensorMessage& x, const SensorMessage& y) {
                        return x.arrival_time == y.arrival_time;
                      });
  }
  CHECK_FALSE(same);
}

TEST_CASE("timing errors report acquisition minus anchor") {
  SimConfig cfg;
  cfg.num_nodes = 2;
  cfg.duration = 100.0;
  cfg.trigger_jitter_sigma = 0.0;
  const EventLog log = run_simulation(cfg);
  for (double e : timing_errors(log)) CHECK(e == 0.0);

  cfg.trigger_mode = TriggerMode::NaiveAsync;
  cfg.node_profiles.resize(1);
  cfg.node_profiles[0].phase_offset = 30.0;
  const EventLog log2 = run_simulation(cfg);
  for (double e : timing_errors(log2)) CHECK(e == doctest::Approx(30.0));
}
