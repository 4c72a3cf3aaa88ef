#pragma once

#include <Eigen/Dense>

#include "lrlf/nn/policy.hpp"
#include "lrlf/systems.hpp"

namespace lrlf {

/// What the policy conditions on. Deployable: (x̂_k, e_{k+1}); oracle-error: x̃_k (simulation only).
enum class ObservationMode { deployable, oracle_error };

std::string to_string(ObservationMode mode);
ObservationMode observation_mode_from_string(const std::string& s);

/// Concatenation (x̂_k, e_{k+1}).
Eigen::VectorXd build_observation(const Eigen::VectorXd& estimate, const Eigen::VectorXd& innovation);
/// Oracle-mode observation x − x̂.
Eigen::VectorXd build_oracle_observation(const Eigen::VectorXd& true_state, const Eigen::VectorXd& estimate);

/// e_{k+1} = y_{k+1} − g(f(x̂_k)).
Eigen::VectorXd innovation(const SystemModel& model, const Eigen::VectorXd& estimate, const Eigen::VectorXd& y);

/// Row-major n × m gain from a flat action vector.
Eigen::MatrixXd gain_from_action(const Eigen::VectorXd& action, int state_dim, int meas_dim);

/// Learned gain filter x̂_{k+1} = f(x̂_k) + G(o_k)·e_{k+1}, G from the policy mean.
struct LearnedEstimator {
  nn::Mlp<double> policy;
  nn::PolicyHead<double> head;
  SystemModel system;
  ObservationMode mode = ObservationMode::deployable;

  int observation_dim() const {
    return mode == ObservationMode::deployable ? system.state_dim + system.meas_dim : system.state_dim;
  }
  int action_dim() const { return system.state_dim * system.meas_dim; }
};

/// Deployable update: reads only the previous estimate and the new measurement.
Eigen::VectorXd estimator_step(const LearnedEstimator& est, const Eigen::VectorXd& estimate, const Eigen::VectorXd& y);

/// Oracle-error update (simulation only): the gain is conditioned on x̃_k = x_k − x̂_k.
Eigen::VectorXd estimator_step_oracle(const LearnedEstimator& est, const Eigen::VectorXd& estimate,
                                      const Eigen::VectorXd& y, const Eigen::VectorXd& true_state);

/// x̂_{k+1} = f(x̂_k) + G·e_{k+1} for an explicit gain.
Eigen::VectorXd gain_update(const SystemModel& model, const Eigen::VectorXd& estimate, const Eigen::VectorXd& y,
                            const Eigen::MatrixXd& gain);

}  // namespace lrlf
