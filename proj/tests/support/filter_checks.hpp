#pragma once

#include <algorithm>
#include <vector>

#include <Eigen/Dense>

#include "lrlf/filters.hpp"
#include "lrlf/problem.hpp"

namespace lrlf::testing {

/// Simulated measurement record y_1..y_K of one vehicle trajectory plus the initial estimate.
struct Recording {
  Eigen::VectorXd initial_estimate;
  std::vector<Eigen::VectorXd> measurements;
};

inline Recording record(const EstimationProblem& p, int steps, std::uint64_t seed) {
  Rng rng(seed);
  auto [x, xh] = p.sample_initial(rng);
  Recording r{xh, {}};
  for (int k = 0; k < steps; ++k) {
    const auto s = step(p.system, x, rng);
    x = s.state;
    r.measurements.push_back(s.measurement);
  }
  return r;
}

/// Largest per-step deviation of EKF and UKF means and covariances from the KF on one recording.
/// `ekf`/`ukf` scale each entry by max(1, |KF entry|); the `_abs` fields are unscaled.
struct LinearAgreement {
  double ekf = 0.0;
  double ukf = 0.0;
  double ekf_abs = 0.0;
  double ukf_abs = 0.0;
};

inline double scaled_deviation(const Eigen::MatrixXd& a, const Eigen::MatrixXd& ref) {
  return ((a - ref).array().abs() / ref.array().abs().max(1.0)).maxCoeff();
}

inline LinearAgreement linear_agreement(const EstimationProblem& p, const Recording& rec) {
  GaussianBelief kf{rec.initial_estimate, p.initial_covariance}, ekf = kf, ukf = kf;
  LinearAgreement a;
  for (const auto& y : rec.measurements) {
    kf = kf_step(kf, y, p.system);
    ekf = ekf_step(ekf, y, p.system);
    ukf = ukf_step(ukf, y, p.system);
    a.ekf = std::max({a.ekf, scaled_deviation(ekf.mean, kf.mean), scaled_deviation(ekf.covariance, kf.covariance)});
    a.ukf = std::max({a.ukf, scaled_deviation(ukf.mean, kf.mean), scaled_deviation(ukf.covariance, kf.covariance)});
    a.ekf_abs = std::max({a.ekf_abs, (ekf.mean - kf.mean).cwiseAbs().maxCoeff(), (ekf.covariance - kf.covariance).cwiseAbs().maxCoeff()});
    a.ukf_abs = std::max({a.ukf_abs, (ukf.mean - kf.mean).cwiseAbs().maxCoeff(), (ukf.covariance - kf.covariance).cwiseAbs().maxCoeff()});
  }
  return a;
}

/// Final posterior mean of a particle filter and the KF on one recording, with the Monte Carlo
/// standard error of the particle estimate taken from independent replicate runs.
struct ParticleAgreement {
  Eigen::VectorXd kf_mean;
  Eigen::VectorXd pf_mean;
  Eigen::VectorXd standard_error;
  Eigen::VectorXd z() const { return (pf_mean - kf_mean).cwiseQuotient(standard_error); }
  bool within(double k) const { return (z().cwiseAbs().array() <= k).all(); }
};

inline Eigen::VectorXd run_pf(const EstimationProblem& p, const Recording& rec, int particles, std::uint64_t seed) {
  Rng rng(seed);
  auto b = make_particle_belief({rec.initial_estimate, p.initial_covariance}, particles, rng);
  for (const auto& y : rec.measurements) b = pf_step(b, y, p.system, rng);
  return b.mean();
}

inline ParticleAgreement particle_agreement(const EstimationProblem& p, const Recording& rec, int particles, int replicates,
                                            std::uint64_t seed) {
  GaussianBelief kf{rec.initial_estimate, p.initial_covariance};
  for (const auto& y : rec.measurements) kf = kf_step(kf, y, p.system);
  ParticleAgreement a;
  a.kf_mean = kf.mean;
  a.pf_mean = run_pf(p, rec, particles, derive_seed(seed, 0));
  Eigen::MatrixXd reps(kf.mean.size(), replicates);
  for (int r = 0; r < replicates; ++r) reps.col(r) = run_pf(p, rec, particles, derive_seed(seed, 1 + r));
  const Eigen::MatrixXd c = reps.colwise() - reps.rowwise().mean();
  a.standard_error = (c.rowwise().squaredNorm() / (replicates - 1)).cwiseSqrt();
  return a;
}

}  // namespace lrlf::testing
