#pragma once

#include <cmath>
#include <string>

#include "lrlf/errors.hpp"
#include "lrlf/nn/mlp.hpp"

namespace lrlf::nn {

enum class OptimizerKind { adam, sgd };

struct AdamSettings {
  OptimizerKind kind = OptimizerKind::adam;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

/// Network weights together with their optimizer moments.
template <typename Scalar>
struct NetworkParams {
  Mlp<Scalar> net;
  LayerStack<Scalar> first_moment;
  LayerStack<Scalar> second_moment;
  long step = 0;

  NetworkParams() = default;
  explicit NetworkParams(Mlp<Scalar> m)
      : net(std::move(m)), first_moment(zeros_like(net.layers())), second_moment(zeros_like(net.layers())) {}
};

/// One Adam (or plain SGD) descent step. Returns false and leaves `params` untouched
/// when any gradient entry is non-finite.
template <typename Scalar>
bool optimizer_step(NetworkParams<Scalar>& params, const LayerStack<Scalar>& grads, double learning_rate,
                    const AdamSettings& settings = {}) {
  auto& layers = params.net.layers();
  if (grads.size() != layers.size()) throw ConfigError("optimizer step: gradient layer count mismatch");
  for (std::size_t l = 0; l < layers.size(); ++l)
    if (grads[l].rows() != layers[l].rows() || grads[l].cols() != layers[l].cols())
      throw ConfigError("optimizer step: gradient shape mismatch");
  if (!all_finite(grads)) return false;

  if (settings.kind == OptimizerKind::sgd) {
    for (std::size_t l = 0; l < layers.size(); ++l) layers[l] -= static_cast<Scalar>(learning_rate) * grads[l];
    ++params.step;
    return true;
  }
  ++params.step;
  const auto t = static_cast<double>(params.step);
  const auto b1 = static_cast<Scalar>(settings.beta1), b2 = static_cast<Scalar>(settings.beta2);
  // Bias corrections folded into the step size.
  const auto step_size = static_cast<Scalar>(learning_rate * std::sqrt(1.0 - std::pow(settings.beta2, t)) /
                                             (1.0 - std::pow(settings.beta1, t)));
  const auto eps_hat = static_cast<Scalar>(settings.epsilon * std::sqrt(1.0 - std::pow(settings.beta2, t)));
  for (std::size_t l = 0; l < layers.size(); ++l) {
    auto& m = params.first_moment[l];
    auto& v = params.second_moment[l];
    m = b1 * m + (Scalar(1) - b1) * grads[l];
    v = b2 * v + (Scalar(1) - b2) * grads[l].cwiseAbs2();
    layers[l].array() -= step_size * m.array() / (v.array().sqrt() + eps_hat);
  }
  return true;
}

/// target ← τ·online + (1 − τ)·target.
template <typename Scalar>
void polyak_update(Mlp<Scalar>& target, const Mlp<Scalar>& online, double tau) {
  if (!(tau >= 0.0 && tau <= 1.0)) throw ConfigError("polyak tau must lie in [0,1]");
  if (!(target.spec() == online.spec())) throw ConfigError("polyak update: network shapes differ");
  const auto t = static_cast<Scalar>(tau);
  for (std::size_t l = 0; l < target.layer_count(); ++l)
    target.layers()[l] = t * online.layers()[l] + (Scalar(1) - t) * target.layers()[l];
}

}  // namespace lrlf::nn
