#pragma once

#include <algorithm>
#include <cmath>

#include "lrlf/nn/lyapunov_critic.hpp"
#include "lrlf/nn/policy.hpp"
#include "lrlf/replay_buffer.hpp"

namespace lrlf {

template <typename Scalar>
using RowVec = Eigen::Matrix<Scalar, 1, Eigen::Dynamic>;

/// Policy π_φ, Lyapunov critic L_θ and its target copy L_θ̄.
template <typename Scalar>
struct Agent {
  nn::Mlp<Scalar> actor;
  nn::PolicyHead<Scalar> head;
  nn::Mlp<Scalar> critic;
  nn::Mlp<Scalar> target_critic;
  nn::LyapunovCritic<Scalar> critic_head;
};

/// Minibatch in the training scalar type.
template <typename Scalar>
struct Batch {
  nn::Matrix<Scalar> error_states, observations, actions, next_error_states, next_observations;
  RowVec<Scalar> costs, continuing, terminal_values;

  Eigen::Index size() const { return costs.size(); }

  static Batch from(const TransitionBatch& b) {
    return Batch{b.error_states.cast<Scalar>(),      b.observations.cast<Scalar>(),
                 b.actions.cast<Scalar>(),           b.next_error_states.cast<Scalar>(),
                 b.next_observations.cast<Scalar>(), b.costs.cast<Scalar>(),
                 b.continuing.cast<Scalar>(),        b.terminal_values.cast<Scalar>()};
  }
};

template <typename Scalar>
struct CriticLossResult {
  Scalar loss = 0;
  nn::LayerStack<Scalar> grads;
  RowVec<Scalar> values;   // L_θ(x̃_k, a_k)
  RowVec<Scalar> targets;  // gradient-stopped Bellman targets
};

/// Bellman residual ½·mean(L_θ(x̃, a) − y)² with
/// y = c + γ·(L_θ̄(x̃', a′) + α·log π(a′|o′)), a′ = reparameterised draw with noise `next_noise`.
template <typename Scalar>
CriticLossResult<Scalar> critic_loss(const Agent<Scalar>& agent, const Batch<Scalar>& batch, Scalar alpha, Scalar gamma,
                                     const nn::Matrix<Scalar>& next_noise) {
  const Eigen::Index b = batch.size();
  const auto next = nn::policy_sample(agent.actor, agent.head, batch.next_observations, next_noise);
  const auto boot = nn::lyapunov_eval(agent.target_critic, agent.critic_head, batch.next_error_states,
                                      batch.next_observations, next.action);

  CriticLossResult<Scalar> r;
  r.targets = batch.costs + gamma * (batch.continuing.cwiseProduct(boot.value + alpha * next.log_prob) + batch.terminal_values);
  const auto cur = nn::lyapunov_eval(agent.critic, agent.critic_head, batch.error_states, batch.observations, batch.actions);
  r.values = cur.value;
  const RowVec<Scalar> residual = r.values - r.targets;
  r.loss = Scalar(0.5) * residual.squaredNorm() / static_cast<Scalar>(b);
  const RowVec<Scalar> grad_value = residual / static_cast<Scalar>(b);
  nn::lyapunov_backward<Scalar>(agent.critic, agent.critic_head, cur, grad_value, &r.grads, nullptr);
  return r;
}

template <typename Scalar>
struct ActorLossResult {
  Scalar loss = 0;
  nn::LayerStack<Scalar> grads;
  Scalar constraint = 0;      // batch estimate of L(k+1) − L(k) + β·x̃ᵀx̃ − δ
  Scalar mean_log_prob = 0;   // at the current observations
};

/// Lagrangian policy objective
///   mean[α·log π(a|o) + L_θ(x̃, a)] + λ·mean[L_θ(x̃', a″) − L_θ(x̃, a_k) + β·c − δ]
/// with a, a″ reparameterised at o and o′ (the critic also reads o, o′ when configured to).
/// L_θ(x̃, a_k) uses the stored action and carries no policy gradient; `current_values` may
/// supply it to skip a critic pass.
template <typename Scalar>
ActorLossResult<Scalar> actor_loss(const Agent<Scalar>& agent, const Batch<Scalar>& batch, Scalar lambda, Scalar alpha,
                                   Scalar beta, Scalar delta_slack, const nn::Matrix<Scalar>& noise,
                                   const nn::Matrix<Scalar>& next_noise, const RowVec<Scalar>* current_values = nullptr) {
  const Eigen::Index b = batch.size();
  const auto inv_b = Scalar(1) / static_cast<Scalar>(b);

  // One actor pass over [o, o′] and one critic pass over [(x̃, a), (x̃′, a″)].
  nn::Matrix<Scalar> obs(batch.observations.rows(), 2 * b);
  obs << batch.observations, batch.next_observations;
  nn::Matrix<Scalar> eps(noise.rows(), 2 * b);
  eps << noise, next_noise;
  const auto s = nn::policy_sample(agent.actor, agent.head, obs, eps);
  nn::Matrix<Scalar> states(batch.error_states.rows(), 2 * b);
  states << batch.error_states, batch.next_error_states;
  const auto lv = nn::lyapunov_eval(agent.critic, agent.critic_head, states, obs, s.action);

  RowVec<Scalar> stored;
  if (current_values != nullptr) {
    stored = *current_values;
  } else {
    stored = nn::lyapunov_eval(agent.critic, agent.critic_head, batch.error_states, batch.observations, batch.actions).value;
  }

  const RowVec<Scalar> value_now = lv.value.leftCols(b);
  const RowVec<Scalar> value_next = lv.value.rightCols(b).cwiseProduct(batch.continuing) + batch.terminal_values;
  const RowVec<Scalar> log_prob = s.log_prob.leftCols(b);

  ActorLossResult<Scalar> r;
  r.mean_log_prob = log_prob.mean();
  r.constraint = (value_next - stored + beta * batch.costs).mean() - delta_slack;
  r.loss = alpha * r.mean_log_prob + value_now.mean() + lambda * r.constraint;

  RowVec<Scalar> grad_value(2 * b);
  grad_value.leftCols(b).setConstant(inv_b);
  grad_value.rightCols(b) = (lambda * inv_b) * batch.continuing;
  nn::Matrix<Scalar> grad_action;
  nn::lyapunov_backward<Scalar>(agent.critic, agent.critic_head, lv, grad_value, nullptr, &grad_action);

  RowVec<Scalar> grad_log_prob(2 * b);
  grad_log_prob.leftCols(b).setConstant(alpha * inv_b);
  grad_log_prob.rightCols(b).setZero();
  const auto cot = nn::policy_output_cotangent(agent.head, s, grad_action, grad_log_prob);
  agent.actor.backward(s.tape, cot, &r.grads, nullptr);
  return r;
}

/// Projected ascent on the Lagrange multiplier: λ ← max(0, λ + rate·Ĵ).
template <typename Scalar>
Scalar lambda_update(Scalar lambda, Scalar constraint_estimate, Scalar rate) {
  return std::max(Scalar(0), lambda + rate * constraint_estimate);
}

/// Temperature objective J_α = −α·(mean log π + H̄) and its derivative in α.
template <typename Scalar>
Scalar alpha_objective(Scalar alpha, Scalar mean_log_prob, Scalar target_entropy) {
  return -alpha * (mean_log_prob + target_entropy);
}
template <typename Scalar>
Scalar alpha_gradient(Scalar mean_log_prob, Scalar target_entropy) {
  return -(mean_log_prob + target_entropy);
}

/// Descent in log α on −log α·(mean log π + H̄), which shares the sign and fixed point of J_α
/// and keeps α positive.
template <typename Scalar>
Scalar alpha_update(Scalar alpha, Scalar mean_log_prob, Scalar target_entropy, Scalar rate) {
  const Scalar log_alpha = std::log(alpha) - rate * alpha_gradient(mean_log_prob, target_entropy);
  return std::exp(log_alpha);
}

}  // namespace lrlf
