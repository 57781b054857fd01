// Command-line front end: runs one named experiment and writes its CSV
// outputs plus a manifest into the output directory.
//
//   coopsim <experiment> [--config file.json] [--seed N] [--iterations N]
//           [--out DIR] [--set key=value ...]
//
// Exit codes: 0 success, 2 usage error (unknown experiment, bad flags),
// 3 I/O error (unwritable output, unreadable config), 4 invalid
// configuration or overrides.

#include <cstdio>
#include <exception>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "coopsim/errors.hpp"
#include "coopsim/experiments.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitIo = 3;
constexpr int kExitConfig = 4;

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Delay-aware sensor network synchronization and fusion experiments"};
  app.require_subcommand(0);

  std::string experiment;
  std::string config_path;
  std::string out_dir = "out";
  std::uint64_t seed = 1;
  long long iterations = 0;
  std::vector<std::string> set_args;

  app.add_option("experiment", experiment,
                 "One of: timing_hist, minmax_delay, sweep_nsigma, sweep_drop, "
                 "sweep_nodes, fusion_bench")
      ->required();
  app.add_option("--config", config_path, "JSON config file for the experiment");
  app.add_option("--seed", seed, "Master random seed");
  app.add_option("--iterations", iterations, "Per-experiment sample count (0 = default)");
  app.add_option("--out", out_dir, "Output directory");
  app.add_option("--set", set_args, "Config override, key=value; repeatable");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  coopsim::ExperimentSpec spec;
  spec.seed = seed;
  spec.iterations = iterations;
  spec.output_dir = out_dir;
  if (!config_path.empty()) spec.config_path = config_path;

  try {
    spec.kind = coopsim::experiment_from_string(experiment);
    for (const std::string& kv : set_args) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos || eq == 0) {
        throw coopsim::ConfigError("--set expects key=value, got '" + kv + "'");
      }
      spec.overrides[kv.substr(0, eq)] = kv.substr(eq + 1);
    }
    coopsim::run_experiment(spec);
  } catch (const coopsim::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kExitConfig;
  } catch (const coopsim::IoError& e) {
    std::fprintf(stderr, "io error: %s\n", e.what());
    return kExitIo;
  } catch (const coopsim::InputError& e) {
    std::fprintf(stderr, "usage error: %s\n", e.what());
    return kExitUsage;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return kExitOk;
}
