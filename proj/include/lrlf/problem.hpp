#pragma once

#include <functional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "lrlf/random.hpp"
#include "lrlf/systems.hpp"

namespace lrlf {

/// Draws a (true initial state, initial estimate) pair.
using InitialSampler = std::function<std::pair<Eigen::VectorXd, Eigen::VectorXd>(Rng&)>;

/// A benchmark estimation task: the system plus everything needed to start,
/// score, and normalise an estimator on it.
struct EstimationProblem {
  SystemModel system;
  InitialSampler sample_initial;
  Eigen::MatrixXd initial_covariance;  // prior covariance handed to the Bayesian filters
  Eigen::VectorXd state_scale;         // typical state magnitude (network input scaling)
  Eigen::VectorXd innovation_scale;    // typical innovation magnitude
  Eigen::VectorXd error_scale;         // typical estimate-error magnitude
  std::vector<int> periodic_states;    // angle-valued state entries
  Eigen::MatrixXd state_angles;        // rows × n; each row is an angle-valued functional of the estimate
  double action_bound = 2.0;           // bound on every gain entry
  Eigen::MatrixXd gain_bound;          // n × m per-entry bounds; empty: action_bound everywhere
  double error_unit = 1.0;             // training measures x̃ (and so its cost) in this unit
  std::vector<int> divergence_components;  // entries of x̃ checked against the threshold
  double divergence_threshold = 10.0;
  double training_stop = 0.0;  // training episodes end once ‖x̃‖ exceeds this (0: never)
};

EstimationProblem pendulum_problem(const PendulumParams& p = {});
EstimationProblem vehicle_problem(const VehicleParams& p = {});
EstimationProblem bearing_problem(const BearingTrackerParams& p = {});

/// Looks up "pendulum", "vehicle" or "bearing"; throws ConfigError otherwise.
EstimationProblem make_problem(const std::string& system_id);

}  // namespace lrlf
