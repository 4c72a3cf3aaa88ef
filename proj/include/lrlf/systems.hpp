#pragma once

#include <functional>
#include <string>
#include <utility>

#include <Eigen/Dense>

#include "lrlf/noise.hpp"
#include "lrlf/random.hpp"

namespace lrlf {

/// Column-wise map: each column of the argument is one point.
using BatchMap = std::function<Eigen::MatrixXd(const Eigen::MatrixXd&)>;
using JacobianMap = std::function<Eigen::MatrixXd(const Eigen::VectorXd&)>;

/// Autonomous discrete-time system x' = f(x) + w, y = g(x) + v.
/// Immutable once built; safe to share across threads.
struct SystemModel {
  std::string name;
  int state_dim = 0;
  int meas_dim = 0;
  BatchMap transition_map;
  BatchMap measurement_map;
  NoiseSpec process_noise = NoiseSpec::zero(1);
  NoiseSpec meas_noise = NoiseSpec::zero(1);
  JacobianMap transition_jacobian_map;   // optional
  JacobianMap measurement_jacobian_map;  // optional
  MeasurementChannel channel;

  Eigen::VectorXd transition(const Eigen::VectorXd& x) const;
  Eigen::VectorXd measurement(const Eigen::VectorXd& x) const;
  Eigen::MatrixXd transition(const Eigen::MatrixXd& xs) const { return transition_map(xs); }
  Eigen::MatrixXd measurement(const Eigen::MatrixXd& xs) const { return measurement_map(xs); }

  /// Analytic Jacobian when provided, central finite differences otherwise.
  Eigen::MatrixXd transition_jacobian(const Eigen::VectorXd& x) const;
  Eigen::MatrixXd measurement_jacobian(const Eigen::VectorXd& x) const;

  /// Throws ConfigError unless the callables and noise laws agree on dimensions.
  void validate() const;
};

/// Central finite-difference Jacobian of a column-wise map at x.
Eigen::MatrixXd finite_difference_jacobian(const BatchMap& map, const Eigen::VectorXd& x, double rel_step = 1e-6);

struct StepResult {
  Eigen::VectorXd state;
  Eigen::VectorXd measurement;
  bool measurement_missing = false;
};

/// Advances the true system one step and emits the (possibly dropped) measurement of the new state.
StepResult step(const SystemModel& model, const Eigen::VectorXd& x, Rng& rng);

// Benchmark systems.

struct PendulumParams {
  double dt = 0.1;
  double gravity = 9.81;
  double q1 = 0.01;
  double meas_variance = 0.01;
};

struct VehicleParams {
  double process_variance = 0.01;
  double meas_variance = 0.02;
};

struct BearingTrackerParams {
  double dt = 0.1;
  double altitude = 100.0;
  double accel_variance = 1.0;
  double azimuth_variance = 8.0;
  double elevation_variance = 0.002;
};

SystemModel make_pendulum(const PendulumParams& p = {});
SystemModel make_vehicle(const VehicleParams& p = {});
SystemModel make_bearing_tracker(const BearingTrackerParams& p = {});

/// Pendulum process covariance [[dt³q/3, dt²q/2], [dt²q/2, dt q]].
Eigen::Matrix2d pendulum_process_covariance(double dt, double q1);

/// Copy of `model` with its measurement noise replaced.
SystemModel with_meas_noise(SystemModel model, NoiseSpec noise);
/// Copy of `model` with both noise laws set to zero.
SystemModel noise_free(SystemModel model);

}  // namespace lrlf
