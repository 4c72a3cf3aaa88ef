#pragma once

#include <cstddef>

#include <Eigen/Dense>

#include "lrlf/random.hpp"

namespace lrlf {

/// One step of the estimate-error MDP. `cost` is x̃ᵀx̃ of `error_state`.
struct Transition {
  Eigen::VectorXd error_state;
  Eigen::VectorXd observation;
  Eigen::VectorXd action;
  double cost = 0.0;
  Eigen::VectorXd next_error_state;
  Eigen::VectorXd next_observation;
  bool terminal = false;
  double terminal_value = 0.0;  // continuation cost standing in for the bootstrap on terminal records
};

/// Builds a transition with its cost computed from the error state.
Transition make_transition(Eigen::VectorXd error_state, Eigen::VectorXd observation, Eigen::VectorXd action,
                           Eigen::VectorXd next_error_state, Eigen::VectorXd next_observation, bool terminal = false);

/// Column-major minibatch; column b is one transition.
struct TransitionBatch {
  Eigen::MatrixXd error_states;
  Eigen::MatrixXd observations;
  Eigen::MatrixXd actions;
  Eigen::RowVectorXd costs;
  Eigen::MatrixXd next_error_states;
  Eigen::MatrixXd next_observations;
  Eigen::RowVectorXd continuing;  // 0 for terminal transitions, 1 otherwise
  Eigen::RowVectorXd terminal_values;

  Eigen::Index size() const { return costs.size(); }
};

/// Fixed-capacity ring buffer; once full, the oldest record is overwritten.
class ReplayBuffer {
 public:
  ReplayBuffer(std::size_t capacity, int state_dim, int obs_dim, int action_dim);

  /// Throws ConfigError on shape mismatch or when cost ≠ x̃ᵀx̃ (1e-12 relative).
  void push(const Transition& t);
  std::size_t size() const { return size_; }
  std::size_t capacity() const { return capacity_; }
  Transition at(std::size_t i) const;

  /// Uniform sampling with replacement; exactly `batch` records.
  TransitionBatch sample(std::size_t batch, Rng& rng) const;
  TransitionBatch gather(const std::vector<std::size_t>& indices) const;

 private:
  std::size_t capacity_;
  std::size_t size_ = 0;
  std::size_t head_ = 0;
  Eigen::MatrixXd error_states_, observations_, actions_, next_error_states_, next_observations_;
  Eigen::RowVectorXd costs_, continuing_, terminal_values_;
};

}  // namespace lrlf
