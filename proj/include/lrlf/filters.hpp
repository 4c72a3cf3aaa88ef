#pragma once

#include <Eigen/Dense>

#include "lrlf/random.hpp"
#include "lrlf/systems.hpp"

namespace lrlf {

/// Mean and covariance of a Kalman-family posterior.
struct GaussianBelief {
  Eigen::VectorXd mean;
  Eigen::MatrixXd covariance;
};

/// Weighted particle set. Particles are stored one per column (n × N).
struct ParticleBelief {
  Eigen::MatrixXd particles;
  Eigen::VectorXd weights;
  bool degenerate = false;  // set when the last update underflowed and weights were reset

  Eigen::VectorXd mean() const { return particles * weights; }
  double effective_sample_size() const { return 1.0 / weights.squaredNorm(); }
  Eigen::Index size() const { return particles.cols(); }
};

/// Unscented-transform scaling (alpha, beta, kappa).
struct UkfParams {
  double alpha = 1e-3;
  double beta = 2.0;
  double kappa = 0.0;
};

/// Linear Kalman filter predict + update. Uses the model's (constant) Jacobians as F and H.
GaussianBelief kf_step(const GaussianBelief& belief, const Eigen::VectorXd& y, const SystemModel& model);

/// Extended Kalman filter: propagate through f and g, linearise at the prior and predicted means.
GaussianBelief ekf_step(const GaussianBelief& belief, const Eigen::VectorXd& y, const SystemModel& model);

/// Unscented Kalman filter with 2n+1 sigma points (additive noise).
GaussianBelief ukf_step(const GaussianBelief& belief, const Eigen::VectorXd& y, const SystemModel& model,
                        const UkfParams& params = {});

/// Sigma-point weights (mean weights, covariance weights) for dimension n.
std::pair<Eigen::VectorXd, Eigen::VectorXd> unscented_weights(int n, const UkfParams& params);

/// Bootstrap particle filter step: propagate, weight by the measurement likelihood,
/// systematic resampling when ESS < N/2.
ParticleBelief pf_step(const ParticleBelief& belief, const Eigen::VectorXd& y, const SystemModel& model, Rng& rng);

/// Draws N particles from N(mean, cov) with uniform weights.
ParticleBelief make_particle_belief(const GaussianBelief& prior, Eigen::Index count, Rng& rng);

/// Systematic resampling; returns the selected column indices.
std::vector<Eigen::Index> systematic_resample(const Eigen::VectorXd& weights, Rng& rng);

/// (P + Pᵀ)/2.
inline Eigen::MatrixXd symmetrize(const Eigen::MatrixXd& p) { return 0.5 * (p + p.transpose()); }

}  // namespace lrlf
