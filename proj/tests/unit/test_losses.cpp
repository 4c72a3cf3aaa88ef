#include "doctest.h"
#include "loss_fixtures.hpp"

using namespace lrlf;
using Eigen::MatrixXd;
using Eigen::VectorXd;

using testing::action_noise;
using testing::kAction;
using testing::kObs;
using testing::kState;
using testing::random_batch;
using testing::small_agent;

TEST_CASE("critic loss gradient matches central differences") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Rng rng(seed);
    auto agent = small_agent(rng);
    const auto batch = random_batch(rng, 4, seed % 2 == 0);
    const MatrixXd next = action_noise(rng, 4);
    const double alpha = rng.uniform(0.01, 0.5), gamma = 0.9;
    const auto r = critic_loss(agent, batch, alpha, gamma, next);
    const auto fd = testing::numeric_gradient(agent.critic, [&] { return critic_loss(agent, batch, alpha, gamma, next).loss; });
    CHECK(testing::stack_relative_error(r.grads, fd) < 1e-4);
  }
}

TEST_CASE("actor loss gradient matches central differences, including the critic action path") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Rng rng(100 + seed);
    auto agent = small_agent(rng);
    const auto batch = random_batch(rng, 2, seed % 3 == 0);
    const MatrixXd e = action_noise(rng, 2), e_next = action_noise(rng, 2);
    const double lambda = rng.uniform(0.0, 2.0), alpha = rng.uniform(0.0, 0.5), beta = 0.1, delta = 0.05;
    auto loss = [&] { return actor_loss(agent, batch, lambda, alpha, beta, delta, e, e_next).loss; };
    const auto r = actor_loss(agent, batch, lambda, alpha, beta, delta, e, e_next);
    const auto fd = testing::numeric_gradient(agent.actor, loss);
    CHECK(testing::stack_relative_error(r.grads, fd) < 1e-4);
  }
}

TEST_CASE("multiplier and temperature gradients match central differences") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Rng rng(200 + seed);
    auto agent = small_agent(rng);
    const auto batch = random_batch(rng, 5, false);
    const MatrixXd e = action_noise(rng, 5), e_next = action_noise(rng, 5);
    const double lambda = rng.uniform(0.1, 2.0), alpha = rng.uniform(0.05, 0.5), h = 1e-6;
    const auto r = actor_loss(agent, batch, lambda, alpha, 0.1, 0.0, e, e_next);
    // J(λ) is linear in λ with slope equal to the constraint estimate.
    const double up = actor_loss(agent, batch, lambda + h, alpha, 0.1, 0.0, e, e_next).loss;
    const double down = actor_loss(agent, batch, lambda - h, alpha, 0.1, 0.0, e, e_next).loss;
    CHECK((up - down) / (2 * h) == doctest::Approx(r.constraint).epsilon(1e-6));

    const double target = -static_cast<double>(kAction) * rng.uniform(0.5, 1.5);
    const double ja = (alpha_objective(alpha + h, r.mean_log_prob, target) - alpha_objective(alpha - h, r.mean_log_prob, target)) / (2 * h);
    CHECK(ja == doctest::Approx(alpha_gradient(r.mean_log_prob, target)).epsilon(1e-8));
  }
}

TEST_CASE("critic target drops to the cost when gamma is zero") {
  Rng rng(7);
  auto agent = small_agent(rng);
  const auto batch = random_batch(rng, 6, false);
  const auto r = critic_loss(agent, batch, 0.3, 0.0, action_noise(rng, 6));
  CHECK((r.targets - batch.costs).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("critic target on a hand-set transition") {
  Rng rng(8);
  auto agent = small_agent(rng);
  // Target critic with constant output (√2, 0, 0, 0), so L_target ≡ 2.
  agent.target_critic = nn::Mlp<double>::zeros({kState + kObs + kAction + 1, {3}, 4});
  agent.target_critic.layers().back()(0, 3) = std::sqrt(2.0);  // bias column
  auto batch = random_batch(rng, 1, false);
  batch.error_states << 1.0, 0.0;
  batch.costs << 1.0;
  const MatrixXd next = action_noise(rng, 1);
  const double log_prob = nn::policy_sample(agent.actor, agent.head, batch.next_observations, next).log_prob[0];
  REQUIRE(log_prob != 0.0);
  const double alpha = -0.3 / log_prob;
  const auto r = critic_loss(agent, batch, alpha, 0.5, next);
  CHECK(r.targets[0] == doctest::Approx(1.85).epsilon(1e-12));
}

TEST_CASE("terminal transitions replace the bootstrap term with the terminal value") {
  Rng rng(9);
  auto agent = small_agent(rng);
  auto batch = random_batch(rng, 3, true);
  const auto r = critic_loss(agent, batch, 0.2, 0.99, action_noise(rng, 3));
  CHECK(r.targets[0] == doctest::Approx(batch.costs[0] + 0.99 * batch.terminal_values[0]).epsilon(1e-15));
  batch.terminal_values[0] = 0.0;
  CHECK(critic_loss(agent, batch, 0.2, 0.99, action_noise(rng, 3)).targets[0] == batch.costs[0]);
  CHECK(r.targets[1] != batch.costs[1]);
}

TEST_CASE("critic loss vanishes when the critic already equals its target") {
  Rng rng(10);
  auto agent = small_agent(rng);
  auto batch = random_batch(rng, 4, false);
  // With γ = 0 the target is c = x̃ᵀx̃; a critic whose first features reproduce x̃ matches it exactly.
  agent.critic = nn::Mlp<double>::zeros({kState + kAction, {4}, 2});
  agent.critic_head = {nn::FeatureMap<double>::scaled(VectorXd::Ones(kState + kAction)), false};
  auto& hidden = agent.critic.layers()[0];
  hidden(0, 0) = 1; hidden(1, 0) = -1; hidden(2, 1) = 1; hidden(3, 1) = -1;
  auto& out = agent.critic.layers()[1];
  out(0, 0) = 1; out(0, 1) = -1; out(1, 2) = 1; out(1, 3) = -1;
  agent.target_critic = agent.critic;
  const auto r = critic_loss(agent, batch, 0.2, 0.0, action_noise(rng, 4));
  CHECK(r.loss == doctest::Approx(0.0).epsilon(1e-24));
  for (const auto& g : r.grads) CHECK(g.cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("actor loss with no multiplier or temperature is the mean critic value") {
  Rng rng(11);
  auto agent = small_agent(rng);
  const auto batch = random_batch(rng, 5, false);
  const MatrixXd e = action_noise(rng, 5), e_next = action_noise(rng, 5);
  const auto r = actor_loss(agent, batch, 0.0, 0.0, 0.1, 0.0, e, e_next);
  const auto a = nn::policy_sample(agent.actor, agent.head, batch.observations, e).action;
  const double mean_value =
      nn::lyapunov_eval(agent.critic, agent.critic_head, batch.error_states, batch.observations, a).value.mean();
  CHECK(r.loss == doctest::Approx(mean_value).epsilon(1e-14));
}

TEST_CASE("an exactly tight constraint adds nothing to the actor loss") {
  Rng rng(12);
  auto agent = small_agent(rng);
  auto batch = random_batch(rng, 3, false);
  const MatrixXd e = action_noise(rng, 3), e_next = action_noise(rng, 3);
  const auto base = actor_loss(agent, batch, 0.0, 0.2, 0.1, 0.0, e, e_next);
  // Shift the slack so the batch constraint is exactly zero.
  const auto tight = actor_loss(agent, batch, 3.0, 0.2, 0.1, base.constraint, e, e_next);
  CHECK(tight.loss == doctest::Approx(base.loss).epsilon(1e-12));
}

TEST_CASE("multiplier ascent is projected onto the nonnegative half-line") {
  CHECK(lambda_update(1.0, -0.5, 0.1) < 1.0);
  CHECK(lambda_update(1.0, 0.5, 0.1) > 1.0);
  CHECK(lambda_update(1.0, 0.0, 0.1) == 1.0);
  CHECK(lambda_update(0.01, -10.0, 0.1) == 0.0);
}

TEST_CASE("temperature moves against the entropy gap") {
  // Entropy above target (mean log π below −H̄): α decreases.
  CHECK(alpha_update(0.2, -3.0, 2.0, 1e-2) < 0.2);
  CHECK(alpha_update(0.2, -1.0, 2.0, 1e-2) > 0.2);
  CHECK(alpha_update(0.2, -2.0, 2.0, 1e-2) == 0.2);
}
