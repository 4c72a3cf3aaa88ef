#pragma once

#include <Eigen/Dense>

#include "fd.hpp"
#include "lrlf/losses.hpp"

namespace lrlf::testing {

inline constexpr int kState = 2, kMeas = 1, kAction = 2, kObs = 3;

/// Small actor/critic pair with random weights and biases. Observation entry 0 is an angle; the critic
/// sees (x̃, o, a) with the same embedding.
inline Agent<double> small_agent(Rng& rng) {
  Agent<double> a;
  a.head.action_dim = kAction;
  a.head.action_bound = Eigen::VectorXd::Constant(kAction, 1.5);
  a.head.input = {Eigen::VectorXd::Constant(kObs + 1, 0.7), {0}, {}};
  a.actor = nn::Mlp<double>({kObs + 1, {6, 5}, 2 * kAction}, rng);
  const int critic_in = kState + kObs + kAction + 1;
  a.critic = nn::Mlp<double>({critic_in, {7, 5}, 4}, rng);
  a.target_critic = nn::Mlp<double>({critic_in, {7, 5}, 4}, rng);
  a.critic_head.with_observation = true;
  a.critic_head.input = {Eigen::VectorXd::Constant(critic_in, 0.9), {kState}, {}};
  for (auto* net : {&a.actor, &a.critic, &a.target_critic}) randomize_biases(*net, rng);
  return a;
}

inline Batch<double> random_batch(Rng& rng, int size, bool with_terminal) {
  Batch<double> b;
  b.error_states = Eigen::MatrixXd(kState, size);
  b.observations = Eigen::MatrixXd(kObs, size);
  b.actions = Eigen::MatrixXd(kAction, size);
  b.next_error_states = Eigen::MatrixXd(kState, size);
  b.next_observations = Eigen::MatrixXd(kObs, size);
  for (auto* m : {&b.error_states, &b.observations, &b.next_error_states, &b.next_observations}) rng.fill_normal(*m);
  for (Eigen::Index i = 0; i < b.actions.size(); ++i) b.actions.data()[i] = rng.uniform(-1.4, 1.4);
  b.costs = b.error_states.colwise().squaredNorm();
  b.continuing = Eigen::RowVectorXd::Ones(size);
  b.terminal_values = Eigen::RowVectorXd::Zero(size);
  if (with_terminal) {
    b.continuing[0] = 0.0;
    b.terminal_values[0] = rng.uniform(0.0, 3.0);
  }
  return b;
}

inline Eigen::MatrixXd action_noise(Rng& rng, int size) {
  Eigen::MatrixXd e(kAction, size);
  rng.fill_normal(e);
  return e;
}

/// Worst relative errors of the four training gradients against central differences over `seeds` random instances.
struct GradientErrors {
  double critic = 0.0;
  double actor = 0.0;
  double lambda = 0.0;
  double alpha = 0.0;
};

inline GradientErrors gradient_errors(int seeds, double h = 1e-6) {
  GradientErrors g;
  auto rel = [](double a, double b) { return std::abs(a - b) / std::max(1e-12, std::max(std::abs(a), std::abs(b))); };
  for (int seed = 0; seed < seeds; ++seed) {
    Rng rng(derive_seed(4242, static_cast<std::uint64_t>(seed)));
    auto agent = small_agent(rng);
    const auto batch = random_batch(rng, 4, seed % 2 == 0);
    const Eigen::MatrixXd e = action_noise(rng, 4), e_next = action_noise(rng, 4);
    const double alpha = rng.uniform(0.05, 0.5), gamma = 0.9, lambda = rng.uniform(0.1, 2.0);
    const double beta = 0.1, delta = rng.uniform(0.0, 0.1);

    const auto c = critic_loss(agent, batch, alpha, gamma, e_next);
    const auto c_fd = numeric_gradient(agent.critic, [&] { return critic_loss(agent, batch, alpha, gamma, e_next).loss; });
    g.critic = std::max(g.critic, stack_relative_error(c.grads, c_fd));

    const auto a = actor_loss(agent, batch, lambda, alpha, beta, delta, e, e_next);
    const auto a_fd = numeric_gradient(agent.actor, [&] { return actor_loss(agent, batch, lambda, alpha, beta, delta, e, e_next).loss; });
    g.actor = std::max(g.actor, stack_relative_error(a.grads, a_fd));

    const double up = actor_loss(agent, batch, lambda + h, alpha, beta, delta, e, e_next).loss;
    const double down = actor_loss(agent, batch, lambda - h, alpha, beta, delta, e, e_next).loss;
    g.lambda = std::max(g.lambda, rel((up - down) / (2 * h), a.constraint));

    const double target = -static_cast<double>(kAction) * rng.uniform(0.5, 1.5);
    const double ja = (alpha_objective(alpha + h, a.mean_log_prob, target) - alpha_objective(alpha - h, a.mean_log_prob, target)) / (2 * h);
    g.alpha = std::max(g.alpha, rel(ja, alpha_gradient(a.mean_log_prob, target)));
  }
  return g;
}

}  // namespace lrlf::testing
