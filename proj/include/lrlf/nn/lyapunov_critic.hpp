#pragma once

#include "lrlf/nn/features.hpp"
#include "lrlf/nn/mlp.hpp"

namespace lrlf::nn {

/// L(x̃, o, a) = Q(·)ᵀ Q(·) where Q is an MLP over features of the raw concatenation [x̃; o; a].
/// With `with_observation` false the observation block is left out and L depends on (x̃, a) only.
template <typename Scalar>
struct LyapunovCritic {
  FeatureMap<Scalar> input;
  bool with_observation = false;

  Matrix<Scalar> raw_input(const Matrix<Scalar>& error_states, const Matrix<Scalar>& observations,
                           const Matrix<Scalar>& actions) const {
    const Eigen::Index obs_rows = with_observation ? observations.rows() : 0;
    Matrix<Scalar> raw(error_states.rows() + obs_rows + actions.rows(), error_states.cols());
    raw.topRows(error_states.rows()) = error_states;
    if (with_observation) raw.middleRows(error_states.rows(), obs_rows) = observations;
    raw.bottomRows(actions.rows()) = actions;
    return raw;
  }
};

template <typename Scalar>
struct CriticEval {
  Matrix<Scalar> raw;
  MlpTape<Scalar> tape;
  Eigen::Matrix<Scalar, 1, Eigen::Dynamic> value;
  Eigen::Index action_rows = 0;
};

template <typename Scalar>
CriticEval<Scalar> lyapunov_eval(const Mlp<Scalar>& net, const LyapunovCritic<Scalar>& critic, const Matrix<Scalar>& error_states,
                                 const Matrix<Scalar>& observations, const Matrix<Scalar>& actions) {
  if (critic.input.feature_dim() != net.spec().input_dim) throw ConfigError("critic feature map does not match the network input");
  CriticEval<Scalar> e;
  e.raw = critic.raw_input(error_states, observations, actions);
  e.tape = net.forward_tape(critic.input(e.raw));
  e.value = e.tape.output.colwise().squaredNorm();
  e.action_rows = actions.rows();
  return e;
}

/// Nonnegative Lyapunov value of a single (x̃, o, a) triple.
template <typename Scalar>
Scalar lyapunov_value(const Mlp<Scalar>& net, const LyapunovCritic<Scalar>& critic, const Vector<Scalar>& error_state,
                      const Vector<Scalar>& observation, const Vector<Scalar>& action) {
  return lyapunov_eval(net, critic, Matrix<Scalar>(error_state), Matrix<Scalar>(observation), Matrix<Scalar>(action)).value[0];
}

/// Backward through the square over columns [col_begin, col_begin + B) given dLoss/dL (1 × B).
/// Writes the parameter gradient and/or dL/da in unscaled action coordinates.
template <typename Scalar>
void lyapunov_backward(const Mlp<Scalar>& net, const LyapunovCritic<Scalar>& critic, const CriticEval<Scalar>& e,
                       const Eigen::Matrix<Scalar, 1, Eigen::Dynamic>& grad_value, LayerStack<Scalar>* param_grads,
                       Matrix<Scalar>* action_grad, Eigen::Index col_begin = 0) {
  const Eigen::Index b = grad_value.cols();
  const Matrix<Scalar> cot = Scalar(2) * e.tape.output.middleCols(col_begin, b) * grad_value.asDiagonal();
  if (action_grad == nullptr) {
    net.backward(e.tape, cot, param_grads, nullptr, col_begin);
    return;
  }
  Matrix<Scalar> feature_grad;
  net.backward(e.tape, cot, param_grads, &feature_grad, col_begin);
  *action_grad = critic.input.backward(e.raw.middleCols(col_begin, b), feature_grad).bottomRows(e.action_rows);
}

}  // namespace lrlf::nn
