#include "coopsim/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <future>
#include <set>
#include <thread>

#include <nlohmann/json.hpp>

#include "coopsim/csv.hpp"
#include "coopsim/errors.hpp"
#include "coopsim/evaluation.hpp"
#include "coopsim/fusion_tracking.hpp"
#include "coopsim/io.hpp"
#include "coopsim/stats.hpp"
#include "coopsim/sync_scheduler.hpp"

namespace coopsim {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kVersion = "0.1.0";

ExperimentKind kind_from_index(std::size_t i) { return static_cast<ExperimentKind>(i); }

const std::vector<std::string>& experiment_names() {
  static const std::vector<std::string> names = {
      "timing_hist", "minmax_delay", "sweep_nsigma", "sweep_drop", "sweep_nodes",
      "fusion_bench"};
  return names;
}

double parse_double(const std::string& key, const std::string& value) {
  std::size_t consumed = 0;
  double parsed = 0.0;
  try {
    parsed = std::stod(value, &consumed);
  } catch (const std::exception&) {
    throw ConfigError("override " + key + ": '" + value + "' is not a number");
  }
  if (consumed != value.size()) {
    throw ConfigError("override " + key + ": '" + value + "' is not a number");
  }
  return parsed;
}

void require_keys(const std::map<std::string, std::string>& overrides,
                  const std::set<std::string>& allowed) {
  for (const auto& [key, value] : overrides) {
    (void)value;
    if (!allowed.count(key)) {
      throw ConfigError("override '" + key + "' is not valid for this experiment");
    }
  }
}

// ---------------------------------------------------------------------------
// Synchronization experiments
// ---------------------------------------------------------------------------

struct SyncSetup {
  SimConfig sim;
  double n_sigma = 4.0;
  EstimatorConfig estimator;
  bool oracle_estimates = true;
};

const std::set<std::string> kSimKeys = {
    "num_nodes",     "anchor_interval", "trigger_jitter_sigma",
    "normal_mu",     "normal_sigma",    "abnormal_mu",
    "abnormal_sigma", "abnormal_prob",  "loss_prob"};

const std::set<std::string> kEstimatorKeys = {
    "window_size", "bootstrap_min", "prior_mu", "prior_sigma", "outlier_k", "sigma_floor"};

// Applies one key to the sync setup; returns false when the key is unknown.
bool apply_sync_override(SyncSetup& setup, const std::string& key, const std::string& value) {
  NodeProfile profile =
      setup.sim.node_profiles.empty() ? NodeProfile{} : setup.sim.node_profiles.front();
  bool profile_touched = true;
  if (key == "normal_mu") {
    profile.normal_mu = parse_double(key, value);
  } else if (key == "normal_sigma") {
    profile.normal_sigma = parse_double(key, value);
  } else if (key == "abnormal_mu") {
    profile.abnormal_mu = parse_double(key, value);
  } else if (key == "abnormal_sigma") {
    profile.abnormal_sigma = parse_double(key, value);
  } else if (key == "abnormal_prob") {
    profile.abnormal_prob = parse_double(key, value);
  } else if (key == "loss_prob") {
    profile.loss_prob = parse_double(key, value);
  } else {
    profile_touched = false;
  }
  if (profile_touched) {
    setup.sim.node_profiles.assign(1, profile);
    return true;
  }

  if (key == "num_nodes") {
    setup.sim.num_nodes = static_cast<int>(parse_double(key, value));
  } else if (key == "anchor_interval") {
    setup.sim.anchor_interval = parse_double(key, value);
  } else if (key == "trigger_jitter_sigma") {
    setup.sim.trigger_jitter_sigma = parse_double(key, value);
  } else if (key == "n_sigma") {
    setup.n_sigma = parse_double(key, value);
  } else if (key == "oracle_estimates") {
    setup.oracle_estimates = parse_double(key, value) != 0.0;
  } else if (key == "window_size") {
    setup.estimator.window_size = static_cast<std::size_t>(parse_double(key, value));
  } else if (key == "bootstrap_min") {
    setup.estimator.bootstrap_min = static_cast<std::size_t>(parse_double(key, value));
  } else if (key == "prior_mu") {
    setup.estimator.prior_mu = parse_double(key, value);
  } else if (key == "prior_sigma") {
    setup.estimator.prior_sigma = parse_double(key, value);
  } else if (key == "outlier_k") {
    setup.estimator.outlier_k = parse_double(key, value);
  } else if (key == "sigma_floor") {
    setup.estimator.sigma_floor = parse_double(key, value);
  } else {
    return false;
  }
  return true;
}

SyncSetup make_sync_setup(const ExperimentSpec& spec, const std::set<std::string>& allowed,
                          bool sweep_defaults) {
  require_keys(spec.overrides, allowed);
  SyncSetup setup;
  if (spec.config_path) setup.sim = load_sim_config(*spec.config_path);
  if (sweep_defaults && !spec.config_path) {
    // Sweeps compare against closed forms that assume acquisition exactly on
    // the anchor; jitter stays available through --set / config files.
    setup.sim.trigger_jitter_sigma = 0.0;
  }
  for (const auto& [key, value] : spec.overrides) {
    if (!apply_sync_override(setup, key, value)) {
      throw ConfigError("override '" + key + "' is not valid for this experiment");
    }
  }
  return setup;
}

std::vector<LatencyEstimate> oracle_estimates_for(const SimConfig& sim) {
  std::vector<LatencyEstimate> estimates;
  estimates.reserve(static_cast<std::size_t>(sim.num_nodes));
  for (int n = 0; n < sim.num_nodes; ++n) {
    const NodeProfile p = sim.profile_for(n);
    estimates.push_back({p.normal_mu, p.normal_sigma, 0});
  }
  return estimates;
}

struct SweepRow {
  double param = 0.0;
  double full_match = 0.0;
  double theory = 0.0;
  SampleStats reaction;
  double deadline_offset_max = 0.0;
  double naive_mean = 0.0;
};

SweepRow run_sync_point(SimConfig sim, double n_sigma, const EstimatorConfig& estimator,
                        bool oracle, double param, double theory) {
  sim.validate();
  const EventLog log = run_simulation(sim);

  SchedulerConfig adaptive_cfg;
  adaptive_cfg.mode = SchedulerMode::Adaptive;
  adaptive_cfg.n_sigma = n_sigma;
  adaptive_cfg.estimator = estimator;
  SyncScheduler adaptive(adaptive_cfg, sim.num_nodes);
  if (oracle) adaptive.freeze_estimates(oracle_estimates_for(sim));
  const std::vector<AnchorBatch> batches = adaptive.process(log);

  SchedulerConfig naive_cfg;
  naive_cfg.mode = SchedulerMode::NaiveWaitAll;
  naive_cfg.n_sigma = n_sigma;
  naive_cfg.estimator = estimator;
  SyncScheduler naive(naive_cfg, sim.num_nodes);
  const std::vector<AnchorBatch> naive_batches = naive.process(log);

  SweepRow row;
  row.param = param;
  row.theory = theory;
  row.full_match = full_match_rate(batches);
  row.reaction = reaction_time_stats(batches);
  for (const AnchorBatch& b : batches) {
    row.deadline_offset_max = std::max(row.deadline_offset_max, b.deadline - b.anchor_time);
  }
  row.naive_mean = reaction_time_stats(naive_batches).mean;
  return row;
}

// Bounded fan-out across sweep points; results keep parameter order.
std::vector<SweepRow> run_sweep_points(const std::vector<std::function<SweepRow()>>& points) {
  std::vector<SweepRow> rows(points.size());
  const std::size_t workers = std::max(1u, std::thread::hardware_concurrency());
  std::size_t next = 0;
  while (next < points.size()) {
    const std::size_t chunk = std::min(workers, points.size() - next);
    std::vector<std::future<SweepRow>> futures;
    futures.reserve(chunk);
    for (std::size_t i = 0; i < chunk; ++i) {
      futures.push_back(std::async(std::launch::async, points[next + i]));
    }
    for (std::size_t i = 0; i < chunk; ++i) {
      rows[next + i] = futures[i].get();
    }
    next += chunk;
  }
  return rows;
}

void write_sweep_csv(const std::string& path, const std::string& param_name,
                     const std::string& theory_name, std::span<const SweepRow> rows) {
  CsvTable table({param_name, "full_match_rate", theory_name, "reaction_mean_ms",
                  "reaction_p50_ms", "reaction_p99_ms", "reaction_max_ms",
                  "deadline_offset_max_ms", "naive_reaction_mean_ms"});
  for (const SweepRow& r : rows) {
    table.add_row({csv_number(r.param), csv_number(r.full_match), csv_number(r.theory),
                   csv_number(r.reaction.mean), csv_number(r.reaction.p50),
                   csv_number(r.reaction.p99), csv_number(r.reaction.max),
                   csv_number(r.deadline_offset_max), csv_number(r.naive_mean)});
  }
  table.write(path);
}

long long sweep_iterations(const ExperimentSpec& spec) {
  const long long iters = spec.iterations > 0 ? spec.iterations : 100000;
  if (iters < 2) throw ConfigError("sweep experiments need iterations >= 2");
  return iters;
}

double abnormal_prob_of(const SimConfig& sim) {
  double p = 0.0;
  for (int n = 0; n < sim.num_nodes; ++n) p = std::max(p, sim.profile_for(n).abnormal_prob);
  return p;
}

std::vector<std::string> run_sweep_nsigma(const ExperimentSpec& spec, const fs::path& dir) {
  std::set<std::string> allowed = kSimKeys;
  allowed.insert(kEstimatorKeys.begin(), kEstimatorKeys.end());
  allowed.insert("oracle_estimates");
  SyncSetup setup = make_sync_setup(spec, allowed, true);
  const long long iters = sweep_iterations(spec);
  setup.sim.duration = static_cast<double>(iters - 1) * setup.sim.anchor_interval;

  const double p = abnormal_prob_of(setup.sim);
  std::vector<std::function<SweepRow()>> points;
  for (int i = 0; i < 5; ++i) {
    const double n_sigma = 2.0 + static_cast<double>(i);
    SimConfig sim = setup.sim;
    sim.seed = derive_seed(spec.seed, static_cast<std::uint64_t>(i));
    const double per_node = (1.0 - p) * normal_cdf(n_sigma);
    const double theory = std::pow(per_node, sim.num_nodes);
    points.push_back([sim, n_sigma, est = setup.estimator, oracle = setup.oracle_estimates,
                      theory] {
      return run_sync_point(sim, n_sigma, est, oracle, n_sigma, theory);
    });
  }
  const std::vector<SweepRow> rows = run_sweep_points(points);
  write_sweep_csv((dir / "sweep_nsigma.csv").string(), "n_sigma", "theory_full_match", rows);
  return {"sweep_nsigma.csv"};
}

std::vector<std::string> run_sweep_drop(const ExperimentSpec& spec, const fs::path& dir) {
  std::set<std::string> allowed = kSimKeys;
  allowed.insert(kEstimatorKeys.begin(), kEstimatorKeys.end());
  allowed.insert({"oracle_estimates", "n_sigma"});
  allowed.erase("abnormal_prob");
  SyncSetup setup = make_sync_setup(spec, allowed, true);
  const long long iters = sweep_iterations(spec);
  setup.sim.duration = static_cast<double>(iters - 1) * setup.sim.anchor_interval;

  std::vector<std::function<SweepRow()>> points;
  for (int i = 0; i <= 5; ++i) {
    const double drop = 0.01 * static_cast<double>(i);
    SimConfig sim = setup.sim;
    NodeProfile profile = sim.node_profiles.empty() ? NodeProfile{} : sim.node_profiles.front();
    profile.abnormal_prob = drop;
    sim.node_profiles.assign(1, profile);
    sim.seed = derive_seed(spec.seed, static_cast<std::uint64_t>(i));
    const double theory = std::pow(1.0 - drop, sim.num_nodes);
    points.push_back([sim, n_sigma = setup.n_sigma, est = setup.estimator,
                      oracle = setup.oracle_estimates, drop, theory] {
      return run_sync_point(sim, n_sigma, est, oracle, drop, theory);
    });
  }
  const std::vector<SweepRow> rows = run_sweep_points(points);
  write_sweep_csv((dir / "sweep_drop.csv").string(), "drop_rate", "theory_full_match", rows);
  return {"sweep_drop.csv"};
}

std::vector<std::string> run_sweep_nodes(const ExperimentSpec& spec, const fs::path& dir) {
  std::set<std::string> allowed = kSimKeys;
  allowed.insert(kEstimatorKeys.begin(), kEstimatorKeys.end());
  allowed.insert({"oracle_estimates", "n_sigma"});
  allowed.erase("num_nodes");
  SyncSetup setup = make_sync_setup(spec, allowed, true);
  if (!spec.overrides.count("abnormal_prob") && !spec.config_path) {
    NodeProfile profile =
        setup.sim.node_profiles.empty() ? NodeProfile{} : setup.sim.node_profiles.front();
    profile.abnormal_prob = 0.01;
    setup.sim.node_profiles.assign(1, profile);
  }
  const long long iters = sweep_iterations(spec);
  setup.sim.duration = static_cast<double>(iters - 1) * setup.sim.anchor_interval;

  const double p = abnormal_prob_of(setup.sim);
  std::vector<std::function<SweepRow()>> points;
  for (int n = 4; n <= 14; ++n) {
    SimConfig sim = setup.sim;
    sim.num_nodes = n;
    sim.seed = derive_seed(spec.seed, static_cast<std::uint64_t>(n));
    const double theory = std::pow(1.0 - p, n);
    points.push_back([sim, n_sigma = setup.n_sigma, est = setup.estimator,
                      oracle = setup.oracle_estimates, n, theory] {
      return run_sync_point(sim, n_sigma, est, oracle, static_cast<double>(n), theory);
    });
  }
  const std::vector<SweepRow> rows = run_sweep_points(points);
  write_sweep_csv((dir / "sweep_nodes.csv").string(), "num_nodes", "theory_full_match", rows);
  return {"sweep_nodes.csv"};
}

// ---------------------------------------------------------------------------
// Timing / min-max experiments: many short runs so NaiveAsync re-draws its
// phase every run instead of repeating a single offset.
// ---------------------------------------------------------------------------

void write_histogram_csv(const std::string& path, std::span<const HistogramBin> bins) {
  CsvTable table({"bin_low_ms", "bin_high_ms", "count"});
  for (const HistogramBin& b : bins) {
    table.add_row({csv_number(b.low), csv_number(b.high), csv_int(b.count)});
  }
  table.write(path);
}

std::vector<std::string> run_timing_hist(const ExperimentSpec& spec, const fs::path& dir) {
  std::set<std::string> allowed = kSimKeys;
  SyncSetup setup = make_sync_setup(spec, allowed, false);
  const long long runs = spec.iterations > 0 ? spec.iterations : 12500;

  CsvTable summary({"mode", "num_samples", "std_ms", "frac_within_5ms", "ks_uniform"});
  std::vector<std::string> outputs;
  const TriggerMode modes[] = {TriggerMode::Synchronized, TriggerMode::NaiveAsync};
  for (std::size_t m = 0; m < 2; ++m) {
    std::vector<double> errors;
    for (long long run = 0; run < runs; ++run) {
      SimConfig sim = setup.sim;
      sim.trigger_mode = modes[m];
      sim.duration = sim.anchor_interval;
      sim.seed = derive_seed(spec.seed, m, static_cast<std::uint64_t>(run));
      const std::vector<double> errs = timing_errors(run_simulation(sim));
      errors.insert(errors.end(), errs.begin(), errs.end());
    }
    const std::string name = std::string("timing_errors_") +
                             (m == 0 ? "synchronized" : "naive_async") + ".csv";
    write_histogram_csv((dir / name).string(), histogram(errors, -60.0, 60.0, 120));
    outputs.push_back(name);

    std::size_t within = 0;
    for (double e : errors) {
      if (std::abs(e) <= 5.0) ++within;
    }
    const double half = setup.sim.anchor_interval / 2.0;
    summary.add_row({to_string(modes[m]), csv_int(static_cast<long long>(errors.size())),
                     csv_number(errors.size() > 1 ? sample_stddev(errors) : 0.0),
                     csv_number(static_cast<double>(within) / static_cast<double>(errors.size())),
                     csv_number(ks_distance_uniform(errors, -half, half))});
  }
  summary.write((dir / "timing_summary.csv").string());
  outputs.push_back("timing_summary.csv");
  return outputs;
}

std::vector<std::string> run_minmax_delay(const ExperimentSpec& spec, const fs::path& dir) {
  std::set<std::string> allowed = kSimKeys;
  SyncSetup setup = make_sync_setup(spec, allowed, false);
  const long long runs = spec.iterations > 0 ? spec.iterations : 5000;

  CsvTable summary({"mode", "num_anchors", "mean_ms", "p50_ms", "p99_ms", "max_ms"});
  std::vector<std::string> outputs;
  const TriggerMode modes[] = {TriggerMode::Synchronized, TriggerMode::NaiveAsync};
  for (std::size_t m = 0; m < 2; ++m) {
    std::vector<double> spreads;
    SchedulerConfig naive_cfg;
    naive_cfg.mode = SchedulerMode::NaiveWaitAll;
    for (long long run = 0; run < runs; ++run) {
      SimConfig sim = setup.sim;
      sim.trigger_mode = modes[m];
      sim.duration = sim.anchor_interval;
      sim.seed = derive_seed(spec.seed, m, static_cast<std::uint64_t>(run));
      const EventLog log = run_simulation(sim);
      SyncScheduler scheduler(naive_cfg, sim.num_nodes);
      const std::vector<AnchorBatch> batches = scheduler.process(log);
      const std::vector<double> vals = min_max_delays(batches);
      spreads.insert(spreads.end(), vals.begin(), vals.end());
    }
    const std::string name =
        std::string("minmax_") + (m == 0 ? "synchronized" : "naive_async") + ".csv";
    write_histogram_csv((dir / name).string(), histogram(spreads, 0.0, 130.0, 65));
    outputs.push_back(name);

    const SampleStats stats = summarize(spreads);
    summary.add_row({to_string(modes[m]), csv_int(static_cast<long long>(stats.count)),
                     csv_number(stats.mean), csv_number(stats.p50), csv_number(stats.p99),
                     csv_number(stats.max)});
  }
  summary.write((dir / "minmax_summary.csv").string());
  outputs.push_back("minmax_summary.csv");
  return outputs;
}

// ---------------------------------------------------------------------------
// Fusion benchmark
// ---------------------------------------------------------------------------

struct FusionSetup {
  ScenarioConfig scenario;
  double eval_iou = 0.5;
};

FusionSetup make_fusion_setup(const ExperimentSpec& spec) {
  const std::set<std::string> allowed = {
      "scenario",       "duration",        "anchor_interval",
      "detect_threshold", "reference_range", "nms_iou",
      "eval_iou",       "pos_noise_sigma", "miss_rate_base",
      "fp_rate",        "fp_outside_map_fraction"};
  require_keys(spec.overrides, allowed);

  FusionSetup setup;
  if (spec.config_path) {
    setup.scenario = load_scenario_config(*spec.config_path);
  } else {
    setup.scenario.scenario = "roundabout";
    setup.scenario.duration = 3000.0;
    setup.scenario.node_defaults.pos_noise_sigma = 0.2;
    setup.scenario.node_defaults.miss_rate_base = 0.05;
    setup.scenario.node_defaults.fp_rate = 0.3;
    setup.scenario.node_defaults.fp_outside_map_fraction = 0.5;
  }
  for (const auto& [key, value] : spec.overrides) {
    if (key == "scenario") {
      setup.scenario.scenario = value;
    } else if (key == "duration") {
      setup.scenario.duration = parse_double(key, value);
    } else if (key == "anchor_interval") {
      setup.scenario.anchor_interval = parse_double(key, value);
    } else if (key == "detect_threshold") {
      setup.scenario.observation.detect_threshold = parse_double(key, value);
    } else if (key == "reference_range") {
      setup.scenario.observation.reference_range = parse_double(key, value);
    } else if (key == "nms_iou") {
      setup.scenario.nms_iou = parse_double(key, value);
    } else if (key == "eval_iou") {
      setup.eval_iou = parse_double(key, value);
    } else if (key == "pos_noise_sigma") {
      setup.scenario.node_defaults.pos_noise_sigma = parse_double(key, value);
    } else if (key == "miss_rate_base") {
      setup.scenario.node_defaults.miss_rate_base = parse_double(key, value);
    } else if (key == "fp_rate") {
      setup.scenario.node_defaults.fp_rate = parse_double(key, value);
    } else if (key == "fp_outside_map_fraction") {
      setup.scenario.node_defaults.fp_outside_map_fraction = parse_double(key, value);
    }
  }
  return setup;
}

struct FusionConfigId {
  FusionMode mode;
  bool map_filter;
  const char* name;
};

std::vector<std::string> run_fusion_bench(const ExperimentSpec& spec, const fs::path& dir) {
  const FusionSetup setup = make_fusion_setup(spec);
  const long long scenes = spec.iterations > 0 ? spec.iterations : 20;

  const FusionConfigId configs[] = {
      {FusionMode::Early, false, "early_fusion"},
      {FusionMode::Early, true, "early_fusion_hd"},
      {FusionMode::Late, false, "late_fusion"},
      {FusionMode::Late, true, "late_fusion_hd"},
  };

  std::vector<FrameTruth> truths;
  std::vector<std::vector<std::vector<Detection>>> predictions(4);
  double payload_units[4] = {0.0, 0.0, 0.0, 0.0};

  std::vector<TrackSnapshot> track_rows;
  for (long long s = 0; s < scenes; ++s) {
    const Scenario scenario =
        build_scenario(setup.scenario, derive_seed(spec.seed, static_cast<std::uint64_t>(s)));
    truths.insert(truths.end(), scenario.frames.begin(), scenario.frames.end());
    for (std::size_t c = 0; c < 4; ++c) {
      PipelineResult result =
          run_fusion_pipeline(scenario, configs[c].mode, configs[c].map_filter);
      payload_units[c] += result.mean_payload_units;
      for (auto& frame : result.per_frame) {
        predictions[c].push_back(std::move(frame));
      }
    }
    if (s == 0) {
      // Demonstration track log: cluster per-node detections and track them
      // through the first scene.
      GlobalTracker tracker;
      const ScenarioConfig& cfg = scenario.config;
      for (std::size_t f = 0; f < scenario.frames.size(); ++f) {
        std::vector<std::vector<Detection>> per_node;
        for (const NodeModel& node : cfg.nodes) {
          Rng rng(cfg.seed, f, static_cast<std::uint64_t>(node.node_id));
          per_node.push_back(observe(scenario.frames[f], node, cfg.observation, cfg.map, rng));
        }
        const std::vector<FusedObject> fused = associate_and_fuse(per_node);
        tracker.step(fused, scenario.frames[f].anchor_time);
        for (const Track& t : tracker.tracks()) {
          if (t.status != TrackStatus::Dead) {
            track_rows.push_back({scenario.frames[f].anchor_time, t});
          }
        }
      }
    }
  }

  std::vector<std::string> outputs;
  CsvTable combined({"config", "class", "ap", "num_gt", "num_pred",
                     "bandwidth_bytes_per_frame"});
  for (std::size_t c = 0; c < 4; ++c) {
    const EvalReport report = evaluate_map(predictions[c], truths, setup.eval_iou);
    const double mean_units = payload_units[c] / static_cast<double>(scenes);
    const std::size_t units = static_cast<std::size_t>(std::llround(mean_units));
    const std::size_t bytes = configs[c].mode == FusionMode::Early ? bandwidth_early(units)
                                                                   : bandwidth_late(units);
    const std::string eval_name = std::string("eval_") + configs[c].name + ".csv";
    write_eval_csv(report, (dir / eval_name).string());
    outputs.push_back(eval_name);

    for (const ClassAp& row : report.per_class) {
      combined.add_row({configs[c].name, to_string(row.class_label), csv_number(row.ap),
                        csv_int(static_cast<long long>(row.num_gt)),
                        csv_int(static_cast<long long>(row.num_pred)),
                        csv_int(static_cast<long long>(bytes))});
    }
    combined.add_row({configs[c].name, "all", csv_number(report.mean_ap), "", "",
                      csv_int(static_cast<long long>(bytes))});

    std::vector<Detection> flat;
    for (const auto& frame : predictions[c]) flat.insert(flat.end(), frame.begin(), frame.end());
    const std::string pred_name = std::string("predictions_") + configs[c].name + ".jsonl";
    write_detections_jsonl(flat, (dir / pred_name).string());
    outputs.push_back(pred_name);
  }
  combined.write((dir / "fusion_bench.csv").string());
  outputs.push_back("fusion_bench.csv");

  std::vector<Detection> gt_flat;
  for (const FrameTruth& frame : truths) {
    for (const FrameObject& obj : frame.objects) {
      Detection d;
      d.position = obj.position;
      d.yaw = obj.yaw;
      d.size = obj.size;
      d.velocity = obj.velocity;
      d.class_label = obj.class_label;
      d.confidence = 1.0;
      d.node_id = -1;
      d.timestamp = frame.anchor_time;
      gt_flat.push_back(d);
    }
  }
  write_detections_jsonl(gt_flat, (dir / "ground_truth.jsonl").string());
  outputs.push_back("ground_truth.jsonl");

  write_tracks_csv(track_rows, (dir / "tracks.csv").string());
  outputs.push_back("tracks.csv");
  return outputs;
}

}  // namespace

ExperimentKind experiment_from_string(const std::string& name) {
  const auto& names = experiment_names();
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (names[i] == name) return kind_from_index(i);
  }
  throw InputError("unknown experiment: " + name);
}

std::string to_string(ExperimentKind kind) {
  return experiment_names().at(static_cast<std::size_t>(kind));
}

void run_experiment(const ExperimentSpec& spec) {
  if (spec.iterations < 0) throw ConfigError("iterations must be >= 1");

  fs::path dir(spec.output_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory: " + spec.output_dir);

  std::vector<std::string> outputs;
  switch (spec.kind) {
    case ExperimentKind::TimingHist: outputs = run_timing_hist(spec, dir); break;
    case ExperimentKind::MinmaxDelay: outputs = run_minmax_delay(spec, dir); break;
    case ExperimentKind::SweepNsigma: outputs = run_sweep_nsigma(spec, dir); break;
    case ExperimentKind::SweepDrop: outputs = run_sweep_drop(spec, dir); break;
    case ExperimentKind::SweepNodes: outputs = run_sweep_nodes(spec, dir); break;
    case ExperimentKind::FusionBench: outputs = run_fusion_bench(spec, dir); break;
  }

  json manifest;
  manifest["experiment"] = to_string(spec.kind);
  manifest["seed"] = spec.seed;
  manifest["iterations"] = spec.iterations;
  manifest["overrides"] = json::object();
  for (const auto& [key, value] : spec.overrides) manifest["overrides"][key] = value;
  manifest["config"] = spec.config_path ? json(*spec.config_path) : json(nullptr);
  std::sort(outputs.begin(), outputs.end());
  manifest["outputs"] = outputs;
  manifest["version"] = kVersion;

  std::ofstream file(dir / "manifest.json", std::ios::binary | std::ios::trunc);
  if (!file) throw IoError("cannot write manifest.json in " + spec.output_dir);
  file << manifest.dump(2) << '\n';
  if (!file) throw IoError("write failed: manifest.json");
}

}  // namespace coopsim
