#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "lrlf/harness.hpp"
#include "lrlf/trainer.hpp"

namespace lrlf {

enum class Command { train, evaluate, compare, reproduce_paper };

std::string to_string(Command c);
Command command_from_string(const std::string& s);

struct ScenarioConfig {
  std::string preset = "nominal";  // nominal, r0.1, missing0.5, truncated_gaussian, uniform, exponential
  int trials = 500;
  int horizon = 100;
  double exponential_rate = 0.04;
};

struct EvaluateConfig {
  std::string policy;  // policy metadata file written by `train`; empty: <out>/policy.json
  std::vector<std::string> estimators{"EKF", "UKF", "PF1000", "PF10000", "LRLF"};
  int threads = 0;     // 0: LRLF_THREADS or hardware concurrency
};

struct ReproduceConfig {
  int policies = 10;                   // pendulum policies trained before selection
  int trials = 500;                    // Monte Carlo trials per comparison cell
  int bearing_trials = 100;
  long vehicle_steps = 300'000;
  long bearing_steps = 300'000;
  std::vector<int> particles{1000, 10000};
  double exponential_rate = 0.04;
  int quick_factor = 10;               // --quick divides policies, trials and steps by this
};

/// Everything one CLI invocation needs. Serialises to nested JSON sections
/// {command, system, seed, out, train{…}, scenario{…}, evaluate{…}, reproduce{…}}.
struct RunConfig {
  Command command = Command::train;
  std::string system = "pendulum";
  std::uint64_t seed = 0;
  std::string out = "out";
  TrainConfig train;
  ScenarioConfig scenario;
  EvaluateConfig evaluate;
  ReproduceConfig reproduce;

  /// Throws ConfigError naming the offending key.
  void validate() const;
};

/// Parses JSON text. Absent keys keep their defaults; unknown keys and type mismatches throw
/// ConfigError naming the key.
RunConfig parse_config(const std::string& json_text);
RunConfig load_config(const std::string& path);

/// Fully resolved config as pretty-printed JSON (every key present).
std::string to_json(const RunConfig& cfg);

/// Scenario for `system` selected by preset name.
Scenario scenario_from_config(const std::string& system, const ScenarioConfig& sc);

/// "KF", "EKF", "UKF", "PF<particles>" or "LRLF" (the latter needs a learned estimator).
EstimatorSpec estimator_from_name(const std::string& name, std::shared_ptr<const LearnedEstimator> learned = nullptr);

}  // namespace lrlf
