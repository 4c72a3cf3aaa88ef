#include "lrlf/systems.hpp"

#include <cmath>
#include <numbers>

#include "lrlf/errors.hpp"

namespace lrlf {

Eigen::VectorXd SystemModel::transition(const Eigen::VectorXd& x) const {
  if (x.size() != state_dim) throw ConfigError(name + ": state has length " + std::to_string(x.size()) + ", expected " + std::to_string(state_dim));
  return transition_map(x);
}

Eigen::VectorXd SystemModel::measurement(const Eigen::VectorXd& x) const {
  if (x.size() != state_dim) throw ConfigError(name + ": state has length " + std::to_string(x.size()) + ", expected " + std::to_string(state_dim));
  return measurement_map(x);
}

Eigen::MatrixXd SystemModel::transition_jacobian(const Eigen::VectorXd& x) const {
  return transition_jacobian_map ? transition_jacobian_map(x) : finite_difference_jacobian(transition_map, x);
}

Eigen::MatrixXd SystemModel::measurement_jacobian(const Eigen::VectorXd& x) const {
  return measurement_jacobian_map ? measurement_jacobian_map(x) : finite_difference_jacobian(measurement_map, x);
}

void SystemModel::validate() const {
  if (state_dim < 1 || meas_dim < 1) throw ConfigError(name + ": dimensions must be positive");
  if (!transition_map || !measurement_map) throw ConfigError(name + ": transition and measurement maps are required");
  if (process_noise.dim() != state_dim) throw ConfigError(name + ": process noise dimension mismatch");
  if (meas_noise.dim() != meas_dim) throw ConfigError(name + ": measurement noise dimension mismatch");
  if (!(channel.missing_prob >= 0.0 && channel.missing_prob <= 1.0)) throw ConfigError(name + ": missing_prob must lie in [0,1]");
  const Eigen::VectorXd probe = Eigen::VectorXd::Zero(state_dim);
  if (transition_map(probe).rows() != state_dim) throw ConfigError(name + ": transition output dimension mismatch");
  if (measurement_map(probe).rows() != meas_dim) throw ConfigError(name + ": measurement output dimension mismatch");
}

Eigen::MatrixXd finite_difference_jacobian(const BatchMap& map, const Eigen::VectorXd& x, double rel_step) {
  const Eigen::Index n = x.size();
  Eigen::MatrixXd probes(n, 2 * n);
  Eigen::VectorXd h(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    h[i] = rel_step * std::max(1.0, std::abs(x[i]));
    probes.col(2 * i) = x;
    probes.col(2 * i + 1) = x;
    probes(i, 2 * i) += h[i];
    probes(i, 2 * i + 1) -= h[i];
  }
  const Eigen::MatrixXd values = map(probes);
  Eigen::MatrixXd jac(values.rows(), n);
  for (Eigen::Index i = 0; i < n; ++i) jac.col(i) = (values.col(2 * i) - values.col(2 * i + 1)) / (2.0 * h[i]);
  return jac;
}

StepResult step(const SystemModel& model, const Eigen::VectorXd& x, Rng& rng) {
  if (x.size() != model.state_dim)
    throw ConfigError(model.name + ": state has length " + std::to_string(x.size()) + ", expected " + std::to_string(model.state_dim));
  StepResult out;
  out.state = model.transition_map(x);
  out.state += model.process_noise.sample(rng);
  out.measurement = model.measurement_map(out.state);
  out.measurement += model.meas_noise.sample(rng);
  out.measurement_missing = model.channel.transmit(out.measurement, rng);
  return out;
}

Eigen::Matrix2d pendulum_process_covariance(double dt, double q1) {
  Eigen::Matrix2d q;
  q << dt * dt * dt * q1 / 3.0, dt * dt * q1 / 2.0,
       dt * dt * q1 / 2.0, dt * q1;
  return q;
}

SystemModel make_pendulum(const PendulumParams& p) {
  SystemModel m;
  m.name = "pendulum";
  m.state_dim = 2;
  m.meas_dim = 1;
  const double dt = p.dt, g = p.gravity;
  m.transition_map = [dt, g](const Eigen::MatrixXd& x) {
    Eigen::MatrixXd out(2, x.cols());
    out.row(0) = x.row(0) + dt * x.row(1);
    out.row(1) = x.row(1) - (g * dt) * x.row(0).array().sin().matrix();
    return out;
  };
  m.measurement_map = [](const Eigen::MatrixXd& x) -> Eigen::MatrixXd { return x.row(0).array().sin().matrix(); };
  m.transition_jacobian_map = [dt, g](const Eigen::VectorXd& x) {
    Eigen::MatrixXd j(2, 2);
    j << 1.0, dt, -g * dt * std::cos(x[0]), 1.0;
    return j;
  };
  m.measurement_jacobian_map = [](const Eigen::VectorXd& x) {
    Eigen::MatrixXd j(1, 2);
    j << std::cos(x[0]), 0.0;
    return j;
  };
  m.process_noise = NoiseSpec::gaussian(Eigen::VectorXd::Zero(2), pendulum_process_covariance(dt, p.q1));
  m.meas_noise = NoiseSpec::gaussian(Eigen::VectorXd::Zero(1), Eigen::MatrixXd::Constant(1, 1, p.meas_variance));
  return m;
}

SystemModel make_vehicle(const VehicleParams& p) {
  SystemModel m;
  m.name = "vehicle";
  m.state_dim = 2;
  m.meas_dim = 1;
  Eigen::MatrixXd a(2, 2);
  a << 1.0, 1.0, 0.0, 1.0;
  Eigen::MatrixXd h(1, 2);
  h << 1.0, 0.0;
  const Eigen::Vector2d b(0.0, 1.0);
  m.transition_map = [a](const Eigen::MatrixXd& x) -> Eigen::MatrixXd { return a * x; };
  m.measurement_map = [h](const Eigen::MatrixXd& x) -> Eigen::MatrixXd { return h * x; };
  m.transition_jacobian_map = [a](const Eigen::VectorXd&) { return a; };
  m.measurement_jacobian_map = [h](const Eigen::VectorXd&) { return h; };
  m.process_noise = NoiseSpec::gaussian(Eigen::VectorXd::Zero(2), b * p.process_variance * b.transpose());
  m.meas_noise = NoiseSpec::gaussian(Eigen::VectorXd::Zero(1), Eigen::MatrixXd::Constant(1, 1, p.meas_variance));
  return m;
}

SystemModel make_bearing_tracker(const BearingTrackerParams& p) {
  SystemModel m;
  m.name = "bearing";
  m.state_dim = 4;
  m.meas_dim = 2;
  const double t = p.dt, zs = p.altitude;
  Eigen::MatrixXd a = Eigen::MatrixXd::Identity(4, 4);
  a(0, 2) = t;
  a(1, 3) = t;
  Eigen::MatrixXd g(4, 2);
  g << 0.5 * t * t, 0.0,
       0.0, 0.5 * t * t,
       t, 0.0,
       0.0, t;
  m.transition_map = [a](const Eigen::MatrixXd& x) -> Eigen::MatrixXd { return a * x; };
  m.transition_jacobian_map = [a](const Eigen::VectorXd&) { return a; };
  // atan2(0, 0) is defined as 0 by the C library, and the elevation saturates at atan2(zs, 0) = π/2,
  // which is the documented value at the degenerate point (x, y) = (0, 0).
  m.measurement_map = [zs](const Eigen::MatrixXd& x) {
    Eigen::MatrixXd out(2, x.cols());
    for (Eigen::Index j = 0; j < x.cols(); ++j) {
      const double px = x(0, j), py = x(1, j);
      out(0, j) = (px == 0.0 && py == 0.0) ? 0.0 : std::atan2(py, px);
      out(1, j) = std::atan2(zs, std::hypot(px, py));
    }
    return out;
  };
  m.measurement_jacobian_map = [zs](const Eigen::VectorXd& x) {
    Eigen::MatrixXd j = Eigen::MatrixXd::Zero(2, 4);
    const double px = x[0], py = x[1];
    const double r2 = px * px + py * py;
    if (r2 == 0.0) return j;
    const double r = std::sqrt(r2);
    j(0, 0) = -py / r2;
    j(0, 1) = px / r2;
    const double s = -zs / ((r2 + zs * zs) * r);
    j(1, 0) = s * px;
    j(1, 1) = s * py;
    return j;
  };
  m.process_noise = NoiseSpec::gaussian(Eigen::VectorXd::Zero(4), p.accel_variance * g * g.transpose());
  Eigen::MatrixXd r = Eigen::MatrixXd::Zero(2, 2);
  r(0, 0) = p.azimuth_variance;
  r(1, 1) = p.elevation_variance;
  m.meas_noise = NoiseSpec::gaussian(Eigen::VectorXd::Zero(2), r);
  return m;
}

SystemModel with_meas_noise(SystemModel model, NoiseSpec noise) {
  if (noise.dim() != model.meas_dim) throw ConfigError(model.name + ": replacement measurement noise has wrong dimension");
  model.meas_noise = std::move(noise);
  return model;
}

SystemModel noise_free(SystemModel model) {
  model.process_noise = NoiseSpec::zero(model.state_dim);
  model.meas_noise = NoiseSpec::zero(model.meas_dim);
  return model;
}

}  // namespace lrlf
