#pragma once

#include <vector>

#include "lrlf/errors.hpp"
#include "lrlf/nn/mlp.hpp"

namespace lrlf::nn {

/// Fixed map from a raw input vector to network features. Periodic raw entries become sin in place
/// with their cos appended; each row p of `angles` appends sin(p·raw) and cos(p·raw); then every
/// feature is scaled elementwise. Feature layout:
///   [raw (periodic → sin) | cos(periodic) | sin(angles·raw) | cos(angles·raw)]
template <typename Scalar>
struct FeatureMap {
  Vector<Scalar> scale;       // one entry per feature
  std::vector<int> periodic;  // raw entries treated as angles
  Matrix<Scalar> angles;      // extra angle-valued linear functionals of the raw input (rows × raw_dim)

  Eigen::Index extra_dim() const { return static_cast<Eigen::Index>(periodic.size()) + 2 * angles.rows(); }
  Eigen::Index raw_dim() const { return scale.size() - extra_dim(); }
  Eigen::Index feature_dim() const { return scale.size(); }

  Matrix<Scalar> operator()(const Matrix<Scalar>& raw) const {
    if (raw.rows() != raw_dim()) throw ConfigError("feature map: input has wrong dimension");
    const Eigen::Index r = raw.rows(), p = static_cast<Eigen::Index>(periodic.size()), a = angles.rows();
    Matrix<Scalar> f(scale.size(), raw.cols());
    f.topRows(r) = raw;
    for (Eigen::Index j = 0; j < p; ++j) {
      const auto i = periodic[static_cast<std::size_t>(j)];
      f.row(i) = raw.row(i).array().sin();
      f.row(r + j) = raw.row(i).array().cos();
    }
    if (a > 0) {
      const Matrix<Scalar> theta = angles * raw;
      f.middleRows(r + p, a) = theta.array().sin();
      f.middleRows(r + p + a, a) = theta.array().cos();
    }
    return scale.asDiagonal() * f;
  }

  /// Pulls d(loss)/d(features) back to d(loss)/d(raw).
  Matrix<Scalar> backward(const Matrix<Scalar>& raw, const Matrix<Scalar>& feature_grad) const {
    const Eigen::Index r = raw.rows(), p = static_cast<Eigen::Index>(periodic.size()), a = angles.rows();
    const Matrix<Scalar> g = scale.asDiagonal() * feature_grad;
    Matrix<Scalar> out = g.topRows(r);
    for (Eigen::Index j = 0; j < p; ++j) {
      const auto i = periodic[static_cast<std::size_t>(j)];
      out.row(i) = g.row(i).cwiseProduct(raw.row(i).array().cos().matrix()) -
                   g.row(r + j).cwiseProduct(raw.row(i).array().sin().matrix());
    }
    if (a > 0) {
      const Matrix<Scalar> theta = angles * raw;
      const Matrix<Scalar> dtheta = g.middleRows(r + p, a).cwiseProduct(Matrix<Scalar>(theta.array().cos())) -
                                    g.middleRows(r + p + a, a).cwiseProduct(Matrix<Scalar>(theta.array().sin()));
      out += angles.transpose() * dtheta;
    }
    return out;
  }

  void validate() const {
    if (raw_dim() < 0) throw ConfigError("feature map: more derived features than scale entries");
    for (int i : periodic)
      if (i < 0 || i >= raw_dim()) throw ConfigError("feature map: periodic index out of range");
    if (angles.rows() > 0 && angles.cols() != raw_dim()) throw ConfigError("feature map: angle rows must span the raw input");
  }

  /// Plain elementwise scaling with no periodic entries.
  static FeatureMap scaled(Vector<Scalar> s) { return FeatureMap{std::move(s), {}, {}}; }
};

}  // namespace lrlf::nn
