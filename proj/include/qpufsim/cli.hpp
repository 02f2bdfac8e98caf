#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "qpufsim/rng.hpp"

namespace qpufsim {

struct Metric {
  double value = 0.0;
  std::optional<double> std_err;
};

/// A fully resolved run request: command, flat typed parameter map (defaults
/// filled, config file and flags merged), and the seeding/execution knobs.
struct Scenario {
  std::string command;
  nlohmann::json params;  // flat key -> value echo, includes every resolved knob
  std::uint64_t seed = 0;
  std::uint64_t stream_id = 0;
  int trials = 0;
  int threads = 1;
  bool verbose = false;
  std::string output_format = "json";
  std::vector<std::string> warnings;

  RngStream stream() const { return RngStream{seed, stream_id}; }
};

struct Report {
  Scenario scenario;
  std::map<std::string, Metric> metrics;  // stable documented names
  nlohmann::json per_trial;               // optional detail, only with --verbose
  double wall_time_seconds = 0.0;
  std::string version;

  nlohmann::json to_json() const;
  std::string to_csv() const;
  std::string to_human() const;
  std::string render() const;  // honors scenario.output_format
};

// Thrown after --help/--version output has been printed; maps to exit 0.
struct HelpRequested {};

// args excludes the program name: {command, flags...}. Flag values override
// config-file values; unknown config keys are rejected by name.
Scenario parse_scenario(const std::vector<std::string>& args);

// Dispatches to the owning module. Identical scenarios (same seed, any thread
// count) produce identical metrics.
Report execute(const Scenario& scenario);

// Parse + execute + print; maps errors to the documented exit codes
// (2=config, 3=budget, 4=numeric, 5=refusal, 1=unexpected).
int run_cli(int argc, const char* const* argv);

}  // namespace qpufsim
