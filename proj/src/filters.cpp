#include "lrlf/filters.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "lrlf/errors.hpp"

namespace lrlf {

namespace {

void check_belief(const GaussianBelief& b, const SystemModel& model, const Eigen::VectorXd& y) {
  if (b.mean.size() != model.state_dim || b.covariance.rows() != model.state_dim || b.covariance.cols() != model.state_dim)
    throw ConfigError(model.name + ": belief dimension does not match the state dimension");
  if (y.size() != model.meas_dim) throw ConfigError(model.name + ": measurement dimension mismatch");
}

// Gain from the cross covariance C (n×m) and innovation covariance S (m×m): K = C S⁻¹.
Eigen::MatrixXd kalman_gain(const Eigen::MatrixXd& cross, const Eigen::MatrixXd& innov_cov) {
  Eigen::LDLT<Eigen::MatrixXd> ldlt(innov_cov);
  const double rcond = ldlt.rcond();
  if (ldlt.info() != Eigen::Success || !(rcond > 1e-14) || !ldlt.isPositive()) {
    std::ostringstream msg;
    msg << "innovation covariance is singular (reciprocal condition " << rcond << ")";
    throw NumericalError(msg.str());
  }
  return ldlt.solve(cross.transpose()).transpose();
}

// Joseph-form measurement update shared by the KF and the EKF.
GaussianBelief linear_update(const Eigen::VectorXd& pred_mean, const Eigen::MatrixXd& pred_cov, const Eigen::VectorXd& innovation,
                             const Eigen::MatrixXd& h, const Eigen::MatrixXd& r) {
  const Eigen::MatrixXd s = h * pred_cov * h.transpose() + r;
  const Eigen::MatrixXd k = kalman_gain(pred_cov * h.transpose(), s);
  const Eigen::Index n = pred_mean.size();
  const Eigen::MatrixXd ikh = Eigen::MatrixXd::Identity(n, n) - k * h;
  GaussianBelief post;
  post.mean = pred_mean + k * innovation;
  post.covariance = symmetrize(ikh * pred_cov * ikh.transpose() + k * r * k.transpose());
  if (!post.mean.allFinite() || !post.covariance.allFinite()) throw NumericalError("Kalman update produced non-finite values");
  return post;
}

}  // namespace

GaussianBelief kf_step(const GaussianBelief& belief, const Eigen::VectorXd& y, const SystemModel& model) {
  check_belief(belief, model, y);
  const Eigen::MatrixXd f = model.transition_jacobian(belief.mean);
  const Eigen::MatrixXd pred_cov = symmetrize(f * belief.covariance * f.transpose() + model.process_noise.covariance());
  const Eigen::VectorXd pred_mean = f * belief.mean + model.process_noise.mean();
  const Eigen::MatrixXd h = model.measurement_jacobian(pred_mean);
  const Eigen::VectorXd innovation = y - (h * pred_mean + model.meas_noise.mean());
  return linear_update(pred_mean, pred_cov, innovation, h, model.meas_noise.covariance());
}

GaussianBelief ekf_step(const GaussianBelief& belief, const Eigen::VectorXd& y, const SystemModel& model) {
  check_belief(belief, model, y);
  const Eigen::MatrixXd f = model.transition_jacobian(belief.mean);
  const Eigen::MatrixXd pred_cov = symmetrize(f * belief.covariance * f.transpose() + model.process_noise.covariance());
  const Eigen::VectorXd pred_mean = model.transition(belief.mean) + model.process_noise.mean();
  const Eigen::MatrixXd h = model.measurement_jacobian(pred_mean);
  const Eigen::VectorXd innovation = y - (model.measurement(pred_mean) + model.meas_noise.mean());
  return linear_update(pred_mean, pred_cov, innovation, h, model.meas_noise.covariance());
}

std::pair<Eigen::VectorXd, Eigen::VectorXd> unscented_weights(int n, const UkfParams& p) {
  const double lambda = p.alpha * p.alpha * (n + p.kappa) - n;
  Eigen::VectorXd wm = Eigen::VectorXd::Constant(2 * n + 1, 0.5 / (n + lambda));
  Eigen::VectorXd wc = wm;
  wm[0] = 1.0 - wm.tail(2 * n).sum();
  wc[0] = wm[0] + (1.0 - p.alpha * p.alpha + p.beta);
  return {wm, wc};
}

namespace {

struct UnscentedMoments {
  Eigen::VectorXd mean;
  Eigen::MatrixXd deviations;  // columns: transformed sigma point minus mean
};

// Transformed mean, accumulated relative to the central point so the large negative
// central weight of small-alpha transforms does not cancel catastrophically.
UnscentedMoments unscented_moments(const Eigen::MatrixXd& transformed, const Eigen::VectorXd& wm) {
  UnscentedMoments out;
  const Eigen::MatrixXd rel = transformed.rightCols(transformed.cols() - 1).colwise() - transformed.col(0);
  out.mean = transformed.col(0) + rel * wm.tail(wm.size() - 1);
  out.deviations = transformed.colwise() - out.mean;
  return out;
}

Eigen::MatrixXd sigma_points(const Eigen::VectorXd& mean, const Eigen::MatrixXd& cov, double spread) {
  const Eigen::Index n = mean.size();
  Eigen::LLT<Eigen::MatrixXd> llt(cov);
  Eigen::MatrixXd root;
  if (llt.info() == Eigen::Success) {
    root = llt.matrixL();
  } else {
    Eigen::LLT<Eigen::MatrixXd> jittered(cov + 1e-10 * Eigen::MatrixXd::Identity(n, n));
    if (jittered.info() != Eigen::Success) throw NumericalError("UKF: covariance Cholesky failed after jitter");
    root = jittered.matrixL();
  }
  root *= spread;
  Eigen::MatrixXd pts(n, 2 * n + 1);
  pts.col(0) = mean;
  pts.middleCols(1, n) = root.colwise() + mean;
  pts.rightCols(n) = (-root).colwise() + mean;
  return pts;
}

}  // namespace

GaussianBelief ukf_step(const GaussianBelief& belief, const Eigen::VectorXd& y, const SystemModel& model, const UkfParams& params) {
  check_belief(belief, model, y);
  const int n = model.state_dim;
  const auto [wm, wc] = unscented_weights(n, params);
  const double lambda = params.alpha * params.alpha * (n + params.kappa) - n;
  const double spread = std::sqrt(n + lambda);

  // Predict.
  const Eigen::MatrixXd prior_pts = sigma_points(belief.mean, belief.covariance, spread);
  const UnscentedMoments pred = unscented_moments(model.transition(prior_pts), wm);
  const Eigen::VectorXd pred_mean = pred.mean + model.process_noise.mean();
  const Eigen::MatrixXd pred_cov =
      symmetrize(pred.deviations * wc.asDiagonal() * pred.deviations.transpose() + model.process_noise.covariance());

  // Update with sigma points redrawn from the predicted Gaussian.
  const Eigen::MatrixXd pts = sigma_points(pred_mean, pred_cov, spread);
  const UnscentedMoments meas = unscented_moments(model.measurement(pts), wm);
  const Eigen::MatrixXd state_dev = [&] {
    const Eigen::MatrixXd rel = pts.rightCols(2 * n).colwise() - pts.col(0);
    const Eigen::VectorXd m = pts.col(0) + rel * wm.tail(2 * n);
    return Eigen::MatrixXd(pts.colwise() - m);
  }();
  const Eigen::MatrixXd s =
      symmetrize(meas.deviations * wc.asDiagonal() * meas.deviations.transpose() + model.meas_noise.covariance());
  const Eigen::MatrixXd cross = state_dev * wc.asDiagonal() * meas.deviations.transpose();
  const Eigen::MatrixXd k = kalman_gain(cross, s);

  GaussianBelief post;
  post.mean = pred_mean + k * (y - (meas.mean + model.meas_noise.mean()));
  post.covariance = symmetrize(pred_cov - k * s * k.transpose());
  if (!post.mean.allFinite() || !post.covariance.allFinite()) throw NumericalError("UKF update produced non-finite values");
  return post;
}

ParticleBelief make_particle_belief(const GaussianBelief& prior, Eigen::Index count, Rng& rng) {
  if (count < 1) throw ConfigError("particle filter needs at least one particle");
  const NoiseSpec law = NoiseSpec::gaussian(prior.mean, symmetrize(prior.covariance));
  ParticleBelief b;
  b.particles.resize(prior.mean.size(), count);
  law.sample_into(rng, b.particles);
  b.weights = Eigen::VectorXd::Constant(count, 1.0 / static_cast<double>(count));
  return b;
}

std::vector<Eigen::Index> systematic_resample(const Eigen::VectorXd& weights, Rng& rng) {
  const Eigen::Index n = weights.size();
  std::vector<Eigen::Index> idx(static_cast<std::size_t>(n));
  const double step = 1.0 / static_cast<double>(n);
  double u = rng.uniform() * step;
  double cum = weights[0];
  Eigen::Index j = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    while (u > cum && j < n - 1) cum += weights[++j];
    idx[static_cast<std::size_t>(i)] = j;
    u += step;
  }
  return idx;
}

ParticleBelief pf_step(const ParticleBelief& belief, const Eigen::VectorXd& y, const SystemModel& model, Rng& rng) {
  if (belief.particles.rows() != model.state_dim || belief.weights.size() != belief.particles.cols() || belief.size() < 1)
    throw ConfigError(model.name + ": particle belief dimension mismatch");
  if (y.size() != model.meas_dim) throw ConfigError(model.name + ": measurement dimension mismatch");
  if (!model.meas_noise.has_density())
    throw ConfigError(model.name + ": particle filter needs a measurement-noise density (zero or singular noise rejected)");

  const Eigen::Index count = belief.size();
  ParticleBelief out;
  out.particles = model.transition(belief.particles);
  Eigen::MatrixXd w(model.state_dim, count);
  model.process_noise.sample_into(rng, w);
  out.particles += w;

  const Eigen::MatrixXd residual = (-model.measurement(out.particles)).colwise() + y;
  Eigen::VectorXd logw = model.meas_noise.log_density(residual);
  logw.array() += belief.weights.array().log();
  const double peak = logw.maxCoeff();
  if (!std::isfinite(peak)) {
    out.weights = Eigen::VectorXd::Constant(count, 1.0 / static_cast<double>(count));
    out.degenerate = true;
    return out;
  }
  out.weights = (logw.array() - peak).exp().matrix();
  out.weights /= out.weights.sum();

  if (out.effective_sample_size() < 0.5 * static_cast<double>(count)) {
    const auto idx = systematic_resample(out.weights, rng);
    Eigen::MatrixXd resampled(model.state_dim, count);
    for (Eigen::Index i = 0; i < count; ++i) resampled.col(i) = out.particles.col(idx[static_cast<std::size_t>(i)]);
    out.particles = std::move(resampled);
    out.weights.setConstant(1.0 / static_cast<double>(count));
  }
  return out;
}

}  // namespace lrlf
