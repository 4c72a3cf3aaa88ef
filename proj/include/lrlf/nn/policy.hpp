#pragma once

#include <cmath>
#include <numbers>

#include "lrlf/nn/features.hpp"
#include "lrlf/nn/mlp.hpp"

namespace lrlf::nn {

/// Squashed Gaussian head: the network emits [mean; log_std] (2·d_a rows);
/// actions are bound ⊙ tanh(mean + std ⊙ ε).
template <typename Scalar>
struct PolicyHead {
  int action_dim = 1;
  Vector<Scalar> action_bound;  // per action dimension, > 0
  FeatureMap<Scalar> input;     // observation → network features
  Scalar log_std_min = Scalar(-20);
  Scalar log_std_max = Scalar(2);

  void validate(const MlpSpec& spec) const {
    if (spec.output_dim != 2 * action_dim) throw ConfigError("policy network must output 2 × action_dim values");
    if (action_bound.size() != action_dim || !(action_bound.array() > Scalar(0)).all())
      throw ConfigError("policy action bound must be positive per action dimension");
    if (input.feature_dim() != spec.input_dim) throw ConfigError("policy feature map does not match the network input");
    input.validate();
  }
};

/// Everything a reparameterised draw needs for its backward pass.
template <typename Scalar>
struct PolicySample {
  MlpTape<Scalar> tape;
  Matrix<Scalar> noise;      // ε
  Matrix<Scalar> log_std;    // after clamping
  Matrix<Scalar> std_dev;
  Matrix<Scalar> squashed;   // tanh(u)
  Matrix<Scalar> action;     // bound ⊙ tanh(u)
  Matrix<Scalar> clamp_mask; // 1 where log_std was inside the clamp range
  Eigen::Matrix<Scalar, 1, Eigen::Dynamic> log_prob;
};

namespace detail {
template <typename Scalar>
Scalar softplus(Scalar x) {
  return x > Scalar(0) ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}
}  // namespace detail

/// Reparameterised sample for every column of `obs` given standard-normal noise (d_a × B).
/// A zero noise matrix gives the deterministic action bound ⊙ tanh(mean) with its density at ε = 0.
template <typename Scalar>
PolicySample<Scalar> policy_sample(const Mlp<Scalar>& net, const PolicyHead<Scalar>& head, const Matrix<Scalar>& obs,
                                   const Matrix<Scalar>& noise) {
  const int d = head.action_dim;
  const Eigen::Index batch = obs.cols();
  if (noise.rows() != d || noise.cols() != batch) throw ConfigError("policy sample: noise shape mismatch");
  PolicySample<Scalar> s;
  s.tape = net.forward_tape(head.input(obs));
  const auto& out = s.tape.output;
  const Matrix<Scalar> raw_log_std = out.bottomRows(d);
  s.log_std = raw_log_std.cwiseMax(head.log_std_min).cwiseMin(head.log_std_max);
  s.clamp_mask = ((raw_log_std.array() >= head.log_std_min) && (raw_log_std.array() <= head.log_std_max)).template cast<Scalar>();
  s.std_dev = s.log_std.array().exp();
  s.noise = noise;
  const Matrix<Scalar> pre = out.topRows(d) + s.std_dev.cwiseProduct(noise);
  s.squashed = pre.array().tanh();
  s.action = head.action_bound.asDiagonal() * s.squashed;

  const Scalar half_log_2pi = Scalar(0.5) * std::log(Scalar(2) * std::numbers::pi_v<Scalar>);
  const Scalar log_bound_sum = head.action_bound.array().log().sum();
  s.log_prob.resize(batch);
  for (Eigen::Index j = 0; j < batch; ++j) {
    Scalar lp = -log_bound_sum;
    for (int i = 0; i < d; ++i) {
      const Scalar u = pre(i, j);
      // log(1 - tanh²u) = 2(log 2 - u - softplus(-2u))
      const Scalar log_jac = Scalar(2) * (std::numbers::ln2_v<Scalar> - u - detail::softplus(Scalar(-2) * u));
      lp += Scalar(-0.5) * noise(i, j) * noise(i, j) - s.log_std(i, j) - half_log_2pi - log_jac;
    }
    s.log_prob[j] = lp;
  }
  return s;
}

/// Deterministic (mean) action bound ⊙ tanh(mean(obs)).
template <typename Scalar>
Matrix<Scalar> policy_mean_action(const Mlp<Scalar>& net, const PolicyHead<Scalar>& head, const Matrix<Scalar>& obs) {
  const Matrix<Scalar> out = net.forward(head.input(obs));
  return head.action_bound.asDiagonal() * Matrix<Scalar>(out.topRows(head.action_dim).array().tanh());
}

/// Cotangent on the network output [mean; log_std] given d(loss)/d(action) (d_a × B)
/// and d(loss)/d(log_prob) (1 × B), with ε held fixed.
template <typename Scalar>
Matrix<Scalar> policy_output_cotangent(const PolicyHead<Scalar>& head, const PolicySample<Scalar>& s,
                                       const Matrix<Scalar>& grad_action,
                                       const Eigen::Matrix<Scalar, 1, Eigen::Dynamic>& grad_log_prob) {
  const int d = head.action_dim;
  const Eigen::Index batch = s.action.cols();
  Matrix<Scalar> cot(2 * d, batch);
  for (Eigen::Index j = 0; j < batch; ++j) {
    for (int i = 0; i < d; ++i) {
      const Scalar t = s.squashed(i, j);
      // d/du of log_prob through the tanh Jacobian term is 2 tanh(u).
      const Scalar du = grad_action(i, j) * head.action_bound[i] * (Scalar(1) - t * t) + grad_log_prob[j] * Scalar(2) * t;
      cot(i, j) = du;
      const Scalar dlog_std = du * s.std_dev(i, j) * s.noise(i, j) - grad_log_prob[j];
      cot(d + i, j) = dlog_std * s.clamp_mask(i, j);
    }
  }
  return cot;
}

}  // namespace lrlf::nn
