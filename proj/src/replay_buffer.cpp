#include "lrlf/replay_buffer.hpp"

#include <cmath>

#include "lrlf/errors.hpp"

namespace lrlf {

Transition make_transition(Eigen::VectorXd error_state, Eigen::VectorXd observation, Eigen::VectorXd action,
                           Eigen::VectorXd next_error_state, Eigen::VectorXd next_observation, bool terminal) {
  Transition t;
  t.cost = error_state.squaredNorm();
  t.error_state = std::move(error_state);
  t.observation = std::move(observation);
  t.action = std::move(action);
  t.next_error_state = std::move(next_error_state);
  t.next_observation = std::move(next_observation);
  t.terminal = terminal;
  return t;
}

ReplayBuffer::ReplayBuffer(std::size_t capacity, int state_dim, int obs_dim, int action_dim) : capacity_(capacity) {
  if (capacity < 1 || state_dim < 1 || obs_dim < 1 || action_dim < 1) throw ConfigError("replay buffer: capacity and dimensions must be positive");
  const auto cap = static_cast<Eigen::Index>(capacity);
  error_states_.resize(state_dim, cap);
  observations_.resize(obs_dim, cap);
  actions_.resize(action_dim, cap);
  next_error_states_.resize(state_dim, cap);
  next_observations_.resize(obs_dim, cap);
  costs_.resize(cap);
  continuing_.resize(cap);
  terminal_values_.resize(cap);
}

void ReplayBuffer::push(const Transition& t) {
  if (t.error_state.size() != error_states_.rows() || t.next_error_state.size() != error_states_.rows() ||
      t.observation.size() != observations_.rows() || t.next_observation.size() != observations_.rows() ||
      t.action.size() != actions_.rows())
    throw ConfigError("replay buffer: transition shape mismatch");
  const double expected = t.error_state.squaredNorm();
  if (!(std::abs(t.cost - expected) <= 1e-12 * std::max(1.0, expected)))
    throw ConfigError("replay buffer: cost does not equal the squared error norm");
  if (!(t.terminal_value >= 0.0) || (!t.terminal && t.terminal_value != 0.0))
    throw ConfigError("replay buffer: terminal value must be nonnegative and only set on terminal records");
  const auto i = static_cast<Eigen::Index>(head_);
  error_states_.col(i) = t.error_state;
  observations_.col(i) = t.observation;
  actions_.col(i) = t.action;
  costs_[i] = t.cost;
  next_error_states_.col(i) = t.next_error_state;
  next_observations_.col(i) = t.next_observation;
  continuing_[i] = t.terminal ? 0.0 : 1.0;
  terminal_values_[i] = t.terminal_value;
  head_ = (head_ + 1) % capacity_;
  if (size_ < capacity_) ++size_;
}

Transition ReplayBuffer::at(std::size_t i) const {
  if (i >= size_) throw ConfigError("replay buffer: index out of range");
  const auto c = static_cast<Eigen::Index>(i);
  Transition t;
  t.error_state = error_states_.col(c);
  t.observation = observations_.col(c);
  t.action = actions_.col(c);
  t.cost = costs_[c];
  t.next_error_state = next_error_states_.col(c);
  t.next_observation = next_observations_.col(c);
  t.terminal = continuing_[c] == 0.0;
  t.terminal_value = terminal_values_[c];
  return t;
}

TransitionBatch ReplayBuffer::gather(const std::vector<std::size_t>& indices) const {
  const auto b = static_cast<Eigen::Index>(indices.size());
  TransitionBatch out;
  out.error_states.resize(error_states_.rows(), b);
  out.observations.resize(observations_.rows(), b);
  out.actions.resize(actions_.rows(), b);
  out.costs.resize(b);
  out.next_error_states.resize(error_states_.rows(), b);
  out.next_observations.resize(observations_.rows(), b);
  out.continuing.resize(b);
  out.terminal_values.resize(b);
  for (Eigen::Index j = 0; j < b; ++j) {
    const std::size_t src = indices[static_cast<std::size_t>(j)];
    if (src >= size_) throw ConfigError("replay buffer: index out of range");
    const auto c = static_cast<Eigen::Index>(src);
    out.error_states.col(j) = error_states_.col(c);
    out.observations.col(j) = observations_.col(c);
    out.actions.col(j) = actions_.col(c);
    out.costs[j] = costs_[c];
    out.next_error_states.col(j) = next_error_states_.col(c);
    out.next_observations.col(j) = next_observations_.col(c);
    out.continuing[j] = continuing_[c];
    out.terminal_values[j] = terminal_values_[c];
  }
  return out;
}

TransitionBatch ReplayBuffer::sample(std::size_t batch, Rng& rng) const {
  if (size_ == 0) throw ConfigError("replay buffer: cannot sample from an empty buffer");
  std::vector<std::size_t> idx(batch);
  for (auto& i : idx) i = rng.index(size_);
  return gather(idx);
}

}  // namespace lrlf
