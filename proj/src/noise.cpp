#include "lrlf/noise.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "lrlf/errors.hpp"

namespace lrlf {

namespace {

constexpr double kJitter = 1e-10;
constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double std_normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

// One-sided tail draw from N(0,1) restricted to [a, inf), a > 0 (exponential proposal).
double tail_normal(Rng& rng, double a) {
  const double rate = 0.5 * (a + std::sqrt(a * a + 4.0));
  for (;;) {
    const double z = a - std::log(1.0 - rng.uniform()) / rate;
    const double d = z - rate;
    if (rng.uniform() <= std::exp(-0.5 * d * d)) return z;
  }
}

// N(0,1) restricted to [a, b]: plain rejection when the interval holds enough
// mass, otherwise a uniform or exponential-tail proposal.
double truncated_std_normal(Rng& rng, double a, double b) {
  if (b <= 0.0) return -truncated_std_normal(rng, -b, -a);
  if (std_normal_cdf(b) - std_normal_cdf(a) > 0.3) {
    for (;;) {
      const double z = rng.normal();
      if (z >= a && z <= b) return z;
    }
  }
  if (a > 0.5 && (b - a) * a > 1.0) {
    for (;;) {
      const double z = tail_normal(rng, a);
      if (z <= b) return z;
    }
  }
  // Bounded interval close to its mode: uniform proposal.
  const double peak = a > 0.0 ? a * a : 0.0;
  for (;;) {
    const double z = rng.uniform(a, b);
    if (rng.uniform() <= std::exp(0.5 * (peak - z * z))) return z;
  }
}

}  // namespace

std::string to_string(NoiseKind kind) {
  switch (kind) {
    case NoiseKind::gaussian: return "gaussian";
    case NoiseKind::truncated_gaussian: return "truncated_gaussian";
    case NoiseKind::exponential: return "exponential";
    case NoiseKind::uniform: return "uniform";
    case NoiseKind::zero: return "zero";
  }
  return "unknown";
}

double sample_truncated_normal(Rng& rng, double mean, double sd, double lower, double upper) {
  if (!(sd > 0.0) || !(lower < upper)) throw ConfigError("truncated normal needs sd > 0 and lower < upper");
  const double z = truncated_std_normal(rng, (lower - mean) / sd, (upper - mean) / sd);
  return std::clamp(mean + sd * z, lower, upper);
}

NoiseSpec NoiseSpec::gaussian(Eigen::VectorXd mean, Eigen::MatrixXd covariance) {
  const auto d = mean.size();
  if (d < 1 || covariance.rows() != d || covariance.cols() != d)
    throw ConfigError("gaussian noise: mean/covariance dimension mismatch");
  if (!covariance.allFinite() || !mean.allFinite()) throw ConfigError("gaussian noise: non-finite parameters");
  if ((covariance - covariance.transpose()).cwiseAbs().maxCoeff() > 1e-12 * std::max(1.0, covariance.cwiseAbs().maxCoeff()))
    throw ConfigError("gaussian noise: covariance is not symmetric");
  Eigen::LLT<Eigen::MatrixXd> jittered(covariance + kJitter * Eigen::MatrixXd::Identity(d, d));
  if (jittered.info() != Eigen::Success) throw ConfigError("gaussian noise: covariance is not positive semidefinite");

  NoiseSpec s;
  s.kind_ = NoiseKind::gaussian;
  s.dim_ = static_cast<int>(d);
  s.location_ = std::move(mean);
  s.cov_ = std::move(covariance);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(s.cov_);
  s.sqrt_cov_ = eig.eigenvectors() * eig.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal();
  Eigen::LLT<Eigen::MatrixXd> llt(s.cov_);
  const double min_eig = eig.eigenvalues().minCoeff();
  if (llt.info() == Eigen::Success && min_eig > 1e-14 * std::max(1.0, eig.eigenvalues().maxCoeff())) {
    const Eigen::MatrixXd L = llt.matrixL();
    s.precision_factor_ = L.triangularView<Eigen::Lower>().solve(Eigen::MatrixXd::Identity(d, d));
    s.log_norm_ = -0.5 * static_cast<double>(d) * std::log(2.0 * std::numbers::pi) - L.diagonal().array().log().sum();
  }
  return s;
}

NoiseSpec NoiseSpec::truncated_gaussian(double mean, double variance, double lower, double upper) {
  if (!(variance > 0.0) || !(lower < upper)) throw ConfigError("truncated gaussian noise: need variance > 0 and lower < upper");
  NoiseSpec s;
  s.kind_ = NoiseKind::truncated_gaussian;
  s.dim_ = 1;
  s.location_ = Eigen::VectorXd::Constant(1, mean);
  s.variance_ = variance;
  s.lower_ = Eigen::VectorXd::Constant(1, lower);
  s.upper_ = Eigen::VectorXd::Constant(1, upper);
  const double sd = std::sqrt(variance);
  const double z = std_normal_cdf((upper - mean) / sd) - std_normal_cdf((lower - mean) / sd);
  if (!(z > 0.0)) throw ConfigError("truncated gaussian noise: interval carries no probability mass");
  s.log_norm_ = -0.5 * std::log(2.0 * std::numbers::pi * variance) - std::log(z);
  return s;
}

NoiseSpec NoiseSpec::exponential(double rate) {
  if (!(rate > 0.0) || !std::isfinite(rate)) throw ConfigError("exponential noise: rate must be positive");
  NoiseSpec s;
  s.kind_ = NoiseKind::exponential;
  s.dim_ = 1;
  s.rate_ = rate;
  return s;
}

NoiseSpec NoiseSpec::uniform(Eigen::VectorXd lower, Eigen::VectorXd upper) {
  if (lower.size() < 1 || lower.size() != upper.size()) throw ConfigError("uniform noise: bound dimension mismatch");
  if (!((upper - lower).array() > 0.0).all()) throw ConfigError("uniform noise: need lower < upper in every dimension");
  NoiseSpec s;
  s.kind_ = NoiseKind::uniform;
  s.dim_ = static_cast<int>(lower.size());
  s.log_norm_ = -(upper - lower).array().log().sum();
  s.lower_ = std::move(lower);
  s.upper_ = std::move(upper);
  return s;
}

NoiseSpec NoiseSpec::zero(int dim) {
  if (dim < 1) throw ConfigError("zero noise: dimension must be positive");
  NoiseSpec s;
  s.kind_ = NoiseKind::zero;
  s.dim_ = dim;
  return s;
}

Eigen::VectorXd NoiseSpec::sample(Rng& rng) const {
  Eigen::VectorXd v(dim_);
  sample_into(rng, v);
  return v;
}

void NoiseSpec::sample_into(Rng& rng, Eigen::Ref<Eigen::MatrixXd> out) const {
  if (out.rows() != dim_) throw ConfigError("noise sample: output has wrong row count");
  switch (kind_) {
    case NoiseKind::zero:
      out.setZero();
      return;
    case NoiseKind::gaussian: {
      Eigen::MatrixXd z(dim_, out.cols());
      rng.fill_normal(z);
      out.noalias() = sqrt_cov_ * z;
      out.colwise() += location_;
      return;
    }
    case NoiseKind::truncated_gaussian: {
      const double sd = std::sqrt(variance_);
      for (Eigen::Index j = 0; j < out.cols(); ++j)
        out(0, j) = sample_truncated_normal(rng, location_[0], sd, lower_[0], upper_[0]);
      return;
    }
    case NoiseKind::exponential:
      for (Eigen::Index j = 0; j < out.cols(); ++j) out(0, j) = -std::log(1.0 - rng.uniform()) / rate_;
      return;
    case NoiseKind::uniform:
      for (Eigen::Index j = 0; j < out.cols(); ++j)
        for (int i = 0; i < dim_; ++i) out(i, j) = rng.uniform(lower_[i], upper_[i]);
      return;
  }
}

Eigen::VectorXd NoiseSpec::mean() const {
  switch (kind_) {
    case NoiseKind::gaussian: return location_;
    case NoiseKind::truncated_gaussian: {
      const double sd = std::sqrt(variance_);
      const double a = (lower_[0] - location_[0]) / sd, b = (upper_[0] - location_[0]) / sd;
      const double z = std_normal_cdf(b) - std_normal_cdf(a);
      const double pa = std::exp(-0.5 * a * a) / std::sqrt(2.0 * std::numbers::pi);
      const double pb = std::exp(-0.5 * b * b) / std::sqrt(2.0 * std::numbers::pi);
      return Eigen::VectorXd::Constant(1, location_[0] + sd * (pa - pb) / z);
    }
    case NoiseKind::exponential: return Eigen::VectorXd::Constant(1, 1.0 / rate_);
    case NoiseKind::uniform: return 0.5 * (lower_ + upper_);
    case NoiseKind::zero: return Eigen::VectorXd::Zero(dim_);
  }
  return {};
}

Eigen::MatrixXd NoiseSpec::covariance() const {
  switch (kind_) {
    case NoiseKind::gaussian: return cov_;
    case NoiseKind::truncated_gaussian: {
      const double sd = std::sqrt(variance_);
      const double a = (lower_[0] - location_[0]) / sd, b = (upper_[0] - location_[0]) / sd;
      const double z = std_normal_cdf(b) - std_normal_cdf(a);
      const double pa = std::exp(-0.5 * a * a) / std::sqrt(2.0 * std::numbers::pi);
      const double pb = std::exp(-0.5 * b * b) / std::sqrt(2.0 * std::numbers::pi);
      const double r = (pa - pb) / z;
      const double ta = std::isfinite(a) ? a * pa : 0.0;
      const double tb = std::isfinite(b) ? b * pb : 0.0;
      return Eigen::MatrixXd::Constant(1, 1, variance_ * (1.0 + (ta - tb) / z - r * r));
    }
    case NoiseKind::exponential: return Eigen::MatrixXd::Constant(1, 1, 1.0 / (rate_ * rate_));
    case NoiseKind::uniform: return ((upper_ - lower_).array().square() / 12.0).matrix().asDiagonal();
    case NoiseKind::zero: return Eigen::MatrixXd::Zero(dim_, dim_);
  }
  return {};
}

bool NoiseSpec::has_density() const {
  if (kind_ == NoiseKind::zero) return false;
  if (kind_ == NoiseKind::gaussian) return precision_factor_.size() > 0;
  return true;
}

Eigen::VectorXd NoiseSpec::log_density(const Eigen::MatrixXd& v) const {
  if (v.rows() != dim_) throw ConfigError("noise density: argument has wrong row count");
  if (!has_density()) throw ConfigError("noise density: " + to_string(kind_) + " law has no density (degenerate covariance)");
  const Eigen::Index n = v.cols();
  Eigen::VectorXd out(n);
  switch (kind_) {
    case NoiseKind::gaussian: {
      const Eigen::MatrixXd white = precision_factor_ * (v.colwise() - location_);
      out = (log_norm_ - 0.5 * white.colwise().squaredNorm().array()).transpose();
      break;
    }
    case NoiseKind::truncated_gaussian:
      for (Eigen::Index j = 0; j < n; ++j) {
        const double x = v(0, j);
        out[j] = (x < lower_[0] || x > upper_[0]) ? kNegInf : log_norm_ - 0.5 * (x - location_[0]) * (x - location_[0]) / variance_;
      }
      break;
    case NoiseKind::exponential:
      for (Eigen::Index j = 0; j < n; ++j) out[j] = v(0, j) < 0.0 ? kNegInf : std::log(rate_) - rate_ * v(0, j);
      break;
    case NoiseKind::uniform:
      for (Eigen::Index j = 0; j < n; ++j) {
        const bool inside = ((v.col(j) - lower_).array() >= 0.0).all() && ((upper_ - v.col(j)).array() >= 0.0).all();
        out[j] = inside ? log_norm_ : kNegInf;
      }
      break;
    case NoiseKind::zero: break;
  }
  return out;
}

bool MeasurementChannel::transmit(Eigen::Ref<Eigen::VectorXd> y, Rng& rng) const {
  if (missing_prob <= 0.0) return false;
  if (rng.bernoulli(missing_prob)) {
    y.setZero();
    return true;
  }
  return false;
}

}  // namespace lrlf
