#pragma once

#include <cmath>
#include <vector>

#include <Eigen/Dense>

#include "lrlf/errors.hpp"
#include "lrlf/random.hpp"

namespace lrlf::nn {

/// Layer widths of a fully connected ReLU network. No activation on the output layer.
struct MlpSpec {
  int input_dim = 1;
  std::vector<int> hidden_dims;
  int output_dim = 1;

  std::vector<int> layer_dims() const {
    std::vector<int> d{input_dim};
    d.insert(d.end(), hidden_dims.begin(), hidden_dims.end());
    d.push_back(output_dim);
    return d;
  }
  void validate() const {
    for (int d : layer_dims())
      if (d < 1) throw ConfigError("MLP dimensions must all be at least 1");
  }
  bool operator==(const MlpSpec&) const = default;
};

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

/// Per-layer matrices W_l of shape out × (in + 1); the last column multiplies the constant 1.
template <typename Scalar>
using LayerStack = std::vector<Matrix<Scalar>>;

/// Activations recorded by a forward pass; one column per sample.
template <typename Scalar>
struct MlpTape {
  std::vector<Matrix<Scalar>> inputs;  // inputs[l] feeds layer l (post-ReLU for l > 0)
  Matrix<Scalar> output;
};

template <typename Scalar>
class Mlp {
 public:
  Mlp() = default;

  /// Weights uniform in ±1/√fan_in, biases zero.
  Mlp(MlpSpec spec, Rng& rng) : spec_(std::move(spec)) {
    spec_.validate();
    const auto dims = spec_.layer_dims();
    for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
      const Scalar bound = Scalar(1) / std::sqrt(static_cast<Scalar>(dims[l]));
      Matrix<Scalar> w(dims[l + 1], dims[l] + 1);
      for (Eigen::Index j = 0; j < dims[l]; ++j)
        for (Eigen::Index i = 0; i < w.rows(); ++i) w(i, j) = static_cast<Scalar>(rng.uniform(-bound, bound));
      w.col(dims[l]).setZero();
      layers_.push_back(std::move(w));
    }
  }

  /// All-zero network of the given shape.
  static Mlp zeros(MlpSpec spec) {
    spec.validate();
    Mlp m;
    m.spec_ = std::move(spec);
    const auto dims = m.spec_.layer_dims();
    for (std::size_t l = 0; l + 1 < dims.size(); ++l) m.layers_.push_back(Matrix<Scalar>::Zero(dims[l + 1], dims[l] + 1));
    return m;
  }

  const MlpSpec& spec() const { return spec_; }
  const LayerStack<Scalar>& layers() const { return layers_; }
  LayerStack<Scalar>& layers() { return layers_; }
  std::size_t layer_count() const { return layers_.size(); }

  Eigen::Index parameter_count() const {
    Eigen::Index n = 0;
    for (const auto& w : layers_) n += w.size();
    return n;
  }

  template <typename Other>
  Mlp<Other> cast() const {
    Mlp<Other> out = Mlp<Other>::zeros(spec_);
    for (std::size_t l = 0; l < layers_.size(); ++l) out.layers()[l] = layers_[l].template cast<Other>();
    return out;
  }

  /// Batched forward pass (input_dim × B) recording activations for backward().
  MlpTape<Scalar> forward_tape(const Matrix<Scalar>& input) const {
    check_input(input);
    MlpTape<Scalar> tape;
    tape.inputs.reserve(layers_.size());
    tape.inputs.push_back(input);
    for (std::size_t l = 0; l < layers_.size(); ++l) {
      const auto& w = layers_[l];
      const Eigen::Index in = w.cols() - 1;
      Matrix<Scalar> z = w.leftCols(in) * tape.inputs.back();
      z.colwise() += w.col(in);
      if (l + 1 < layers_.size()) {
        tape.inputs.push_back(z.cwiseMax(Scalar(0)));
      } else {
        tape.output = std::move(z);
      }
    }
    return tape;
  }

  Matrix<Scalar> forward(const Matrix<Scalar>& input) const { return forward_tape(input).output; }

  Vector<Scalar> forward(const Vector<Scalar>& input) const {
    return forward(Matrix<Scalar>(input));
  }

  /// Reverse-mode pass over columns [col_begin, col_begin + cotangent.cols()) of the tape.
  /// `param_grads` (sized like layers()) receives the summed parameter gradient when non-null;
  /// `input_grad` receives d/d(input) for those columns when non-null.
  void backward(const MlpTape<Scalar>& tape, const Matrix<Scalar>& cotangent, LayerStack<Scalar>* param_grads,
                Matrix<Scalar>* input_grad, Eigen::Index col_begin = 0) const {
    const Eigen::Index cols = cotangent.cols();
    if (cotangent.rows() != spec_.output_dim || col_begin < 0 || col_begin + cols > tape.output.cols())
      throw ConfigError("MLP backward: cotangent shape does not match the tape");
    if (param_grads != nullptr) {
      param_grads->resize(layers_.size());
    }
    Matrix<Scalar> delta = cotangent;
    for (std::size_t l = layers_.size(); l-- > 0;) {
      const auto& w = layers_[l];
      const Eigen::Index in = w.cols() - 1;
      const auto a = tape.inputs[l].middleCols(col_begin, cols);
      if (param_grads != nullptr) {
        auto& g = (*param_grads)[l];
        g.resize(w.rows(), w.cols());
        g.leftCols(in).noalias() = delta * a.transpose();
        g.col(in) = delta.rowwise().sum();
      }
      if (l == 0 && input_grad == nullptr) break;
      Matrix<Scalar> upstream = w.leftCols(in).transpose() * delta;
      if (l == 0) {
        *input_grad = std::move(upstream);
      } else {
        // ReLU mask: the layer input is the post-activation of layer l-1.
        delta = (a.array() > Scalar(0)).select(upstream, Scalar(0));
      }
    }
  }

 private:
  void check_input(const Matrix<Scalar>& input) const {
    if (input.rows() != spec_.input_dim) throw ConfigError("MLP forward: input has wrong dimension");
    if (!input.allFinite()) throw NumericalError("MLP forward: non-finite input");
  }

  MlpSpec spec_;
  LayerStack<Scalar> layers_;
};

template <typename Scalar>
LayerStack<Scalar> zeros_like(const LayerStack<Scalar>& layers) {
  LayerStack<Scalar> out;
  out.reserve(layers.size());
  for (const auto& w : layers) out.push_back(Matrix<Scalar>::Zero(w.rows(), w.cols()));
  return out;
}

template <typename Scalar>
void accumulate(LayerStack<Scalar>& into, const LayerStack<Scalar>& g, Scalar scale = Scalar(1)) {
  for (std::size_t l = 0; l < into.size(); ++l) into[l] += scale * g[l];
}

template <typename Scalar>
bool all_finite(const LayerStack<Scalar>& layers) {
  for (const auto& w : layers)
    if (!w.allFinite()) return false;
  return true;
}

}  // namespace lrlf::nn
