#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <vector>

#include "lrlf/estimator.hpp"
#include "lrlf/losses.hpp"
#include "lrlf/nn/optim.hpp"
#include "lrlf/problem.hpp"

namespace lrlf {

/// Training hyperparameters. Defaults follow the pendulum/vehicle table of the method.
struct TrainConfig {
  double gamma = 0.995;
  double tau = 0.005;
  double actor_lr = 1e-4;
  double critic_lr = 3e-4;    // temperature rate when alpha_autotune is on
  double lyapunov_lr = 3e-4;  // Lyapunov critic θ
  double lambda_lr = 3e-4;
  double beta = 0.1;
  double delta_slack = 0.0;
  double alpha_init = 0.05;
  bool alpha_autotune = false;
  std::optional<double> target_entropy;  // required when alpha_autotune is on
  double lambda_init = 1.0;
  int batch_size = 256;
  int horizon = 100;
  long capacity = 1'000'000;
  long total_steps = 300'000;
  long warmup_steps = 1'000;         // environment steps collected before the first update
  double action_bound = 0.0;         // 0: use the problem's bound
  double initial_log_std = -2.0;     // bias of the policy's log-std output at initialisation
  std::optional<double> divergence_stop;  // end a training episode once ‖x̃‖ exceeds this; unset: the problem's, 0: never
  std::vector<int> actor_hidden{32, 16};
  std::vector<int> critic_hidden{64, 32};
  int critic_features = 16;
  bool critic_observation = true;    // critic reads the policy observation next to (x̃, a)
  ObservationMode observation_mode = ObservationMode::deployable;
  nn::OptimizerKind optimizer = nn::OptimizerKind::adam;
  std::uint64_t seed = 0;
  int snapshot_count = 20;

  /// Throws ConfigError naming the offending field.
  void validate() const;
};

/// Per-update diagnostic row.
struct UpdateRecord {
  long step = 0;
  double lambda = 0, alpha = 0, critic_loss = 0, actor_loss = 0, constraint = 0, episode_cost = 0;
};

struct AgentSnapshot {
  long step = 0;
  nn::Mlp<double> actor;
  nn::Mlp<double> critic;
};

struct TrainResult {
  LearnedEstimator estimator;  // φ*
  nn::Mlp<double> critic;      // θ*
  nn::LyapunovCritic<double> critic_head;
  double lambda = 0;
  double alpha = 0;
  std::vector<UpdateRecord> diagnostics;
  std::vector<double> episode_costs;
  std::vector<AgentSnapshot> snapshots;
  long skipped_updates = 0;
};

/// Builds the freshly initialised agent (θ̄ = θ) for a problem.
Agent<double> init_agent(const TrainConfig& cfg, const EstimationProblem& problem, Rng& rng);

/// Runs the Lyapunov-constrained actor-critic loop: collect K-step episodes with the stochastic
/// policy, then per environment step one critic, actor, temperature, multiplier and target update.
TrainResult train(const TrainConfig& cfg, const EstimationProblem& problem);

/// CSV with columns step,lambda,alpha,critic_loss,actor_loss,episode_cost; every `stride`-th row.
void write_diagnostics_csv(std::ostream& out, const std::vector<UpdateRecord>& rows, long stride = 1);

/// Mean critic value per snapshot on a fixed probe set, evaluated at each snapshot's mean action.
struct ImprovementReport {
  std::vector<long> steps;
  std::vector<double> mean_values;
  std::vector<double> smoothed;
  double non_increasing_fraction = 1.0;  // over consecutive smoothed pairs
};

struct ProbeSet {
  Eigen::MatrixXd error_states;   // n × P
  Eigen::MatrixXd observations;   // obs_dim × P
};

ImprovementReport empirical_policy_improvement(const ProbeSet& probes, const std::vector<AgentSnapshot>& history,
                                               const nn::PolicyHead<double>& head,
                                               const nn::LyapunovCritic<double>& critic_head, int smoothing_window = 3);

}  // namespace lrlf
