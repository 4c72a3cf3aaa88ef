#pragma once

#include <string>

#include <Eigen/Dense>

#include "lrlf/random.hpp"

namespace lrlf {

enum class NoiseKind { gaussian, truncated_gaussian, exponential, uniform, zero };

std::string to_string(NoiseKind kind);

/// Additive noise law over R^d. Truncated Gaussian and exponential laws are scalar.
class NoiseSpec {
 public:
  static NoiseSpec gaussian(Eigen::VectorXd mean, Eigen::MatrixXd covariance);
  static NoiseSpec truncated_gaussian(double mean, double variance, double lower, double upper);
  static NoiseSpec exponential(double rate);
  static NoiseSpec uniform(Eigen::VectorXd lower, Eigen::VectorXd upper);
  static NoiseSpec zero(int dim);

  NoiseKind kind() const { return kind_; }
  int dim() const { return dim_; }

  Eigen::VectorXd sample(Rng& rng) const;
  /// Fills every column of `out` (dim × N) with an independent draw.
  void sample_into(Rng& rng, Eigen::Ref<Eigen::MatrixXd> out) const;

  /// Analytic first and second moments.
  Eigen::VectorXd mean() const;
  Eigen::MatrixXd covariance() const;

  /// Log density per column of `v`; -inf outside the support.
  /// Throws ConfigError for laws without a density (zero noise, singular Gaussian).
  Eigen::VectorXd log_density(const Eigen::MatrixXd& v) const;
  bool has_density() const;

  // Raw parameters, used for serialization and reporting.
  const Eigen::VectorXd& location() const { return location_; }
  const Eigen::MatrixXd& gaussian_covariance() const { return cov_; }
  const Eigen::VectorXd& lower() const { return lower_; }
  const Eigen::VectorXd& upper() const { return upper_; }
  double scalar_variance() const { return variance_; }
  double rate() const { return rate_; }

 private:
  NoiseSpec() = default;

  NoiseKind kind_ = NoiseKind::zero;
  int dim_ = 1;
  Eigen::VectorXd location_;  // gaussian mean, or truncated-gaussian centre (size 1)
  Eigen::MatrixXd cov_;
  Eigen::MatrixXd sqrt_cov_;  // any factor S with S Sᵀ = cov_ (handles semidefinite)
  Eigen::MatrixXd precision_factor_;  // Lᵀ⁻¹ rows, empty when cov_ is singular
  double log_norm_ = 0.0;
  double variance_ = 0.0;
  double rate_ = 0.0;
  Eigen::VectorXd lower_, upper_;
};

/// Draws from N(mean, sd²) restricted to [lower, upper]; exact rejection sampler.
double sample_truncated_normal(Rng& rng, double mean, double sd, double lower, double upper);

/// Bernoulli packet loss on the measurement link. A lost measurement is replaced by zeros.
struct MeasurementChannel {
  double missing_prob = 0.0;

  /// Returns true when the measurement was dropped (and zero-filled).
  bool transmit(Eigen::Ref<Eigen::VectorXd> y, Rng& rng) const;
};

}  // namespace lrlf
