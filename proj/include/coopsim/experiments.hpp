#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "coopsim/scenario.hpp"
#include "coopsim/sim_core.hpp"

namespace coopsim {

enum class ExperimentKind {
  TimingHist,    // sensor-clock error histograms, both trigger modes
  MinmaxDelay,   // per-anchor acquisition spread, both trigger modes
  SweepNsigma,   // full-match rate and reaction time vs deadline margin
  SweepDrop,     // ... vs message-drop probability
  SweepNodes,    // ... vs fleet size
  FusionBench,   // Table-style mAP/bandwidth comparison of fusion configs
};

// Throws InputError for names outside the experiment enum (CLI usage error).
ExperimentKind experiment_from_string(const std::string& name);
std::string to_string(ExperimentKind kind);

struct ExperimentSpec {
  ExperimentKind kind = ExperimentKind::TimingHist;
  std::uint64_t seed = 1;
  long long iterations = 0;  // 0 => per-experiment default
  std::string output_dir = "out";
  std::map<std::string, std::string> overrides;       // from --set key=value
  std::optional<std::string> config_path;             // experiment-specific JSON
};

// Runs one experiment end to end: builds configs (defaults -> config file ->
// overrides, validated against the experiment's key list), simulates, and
// writes the CSV outputs plus a manifest.json into `output_dir`. Identical
// specs produce byte-identical outputs.
void run_experiment(const ExperimentSpec& spec);

}  // namespace coopsim
