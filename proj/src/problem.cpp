#include "lrlf/problem.hpp"

#include <numbers>

#include "lrlf/errors.hpp"

namespace lrlf {

EstimationProblem pendulum_problem(const PendulumParams& p) {
  EstimationProblem prob;
  prob.system = make_pendulum(p);
  // θ(0), ω(0) ~ U[-π/2, π/2]; each estimate component ~ U[truth - π/4, truth + π/4].
  prob.sample_initial = [](Rng& rng) {
    constexpr double half = 0.5 * std::numbers::pi;
    constexpr double quarter = 0.25 * std::numbers::pi;
    Eigen::VectorXd x(2), xh(2);
    x[0] = rng.uniform(-half, half);
    x[1] = rng.uniform(-half, half);
    xh[0] = rng.uniform(x[0] - quarter, x[0] + quarter);
    xh[1] = rng.uniform(x[1] - quarter, x[1] + quarter);
    return std::pair{x, xh};
  };
  // Variance of U[-π/4, π/4].
  const double v = std::numbers::pi * std::numbers::pi / 48.0;
  prob.initial_covariance = v * Eigen::MatrixXd::Identity(2, 2);
  prob.state_scale = Eigen::Vector2d(1.0, 2.0);
  prob.innovation_scale = Eigen::VectorXd::Constant(1, 0.3);
  prob.error_scale = Eigen::Vector2d(0.5, 1.0);
  prob.periodic_states = {0};
  // One-step predicted angle θ̂ + dt·ω̂.
  prob.state_angles = Eigen::RowVector2d(1.0, p.dt);
  prob.action_bound = 2.0;
  prob.divergence_components = {0, 1};
  prob.divergence_threshold = 10.0;
  prob.training_stop = 3.0;
  return prob;
}

EstimationProblem vehicle_problem(const VehicleParams& p) {
  EstimationProblem prob;
  prob.system = make_vehicle(p);
  const Eigen::Vector2d x0(0.0, 10.0);
  Eigen::Matrix2d p0;
  p0 << 0.02, 0.0, 0.0, 0.03;
  const NoiseSpec offset = NoiseSpec::gaussian(Eigen::VectorXd::Zero(2), p0);
  prob.sample_initial = [x0, offset](Rng& rng) {
    Eigen::VectorXd x = x0;
    Eigen::VectorXd xh = x0 + offset.sample(rng);
    return std::pair{x, xh};
  };
  prob.initial_covariance = p0;
  prob.state_scale = Eigen::Vector2d(500.0, 10.0);
  prob.innovation_scale = Eigen::VectorXd::Constant(1, 0.3);
  prob.error_scale = Eigen::Vector2d(0.2, 0.2);
  prob.action_bound = 2.0;
  prob.divergence_components = {0, 1};
  prob.divergence_threshold = 10.0;
  prob.training_stop = 2.0;
  return prob;
}

EstimationProblem bearing_problem(const BearingTrackerParams& p) {
  EstimationProblem prob;
  prob.system = make_bearing_tracker(p);
  Eigen::VectorXd x0(4);
  x0 << 98.0, 0.0, 0.0, 10.0;
  const Eigen::Vector4d p0_diag(25.0, 25.0, 1.0, 1.0);
  const Eigen::MatrixXd p0 = p0_diag.asDiagonal();
  const NoiseSpec offset = NoiseSpec::gaussian(Eigen::VectorXd::Zero(4), p0);
  prob.sample_initial = [x0, offset](Rng& rng) {
    Eigen::VectorXd x = x0;
    Eigen::VectorXd xh = x0 + offset.sample(rng);
    return std::pair{x, xh};
  };
  prob.initial_covariance = p0;
  prob.state_scale = Eigen::Vector4d(100.0, 100.0, 10.0, 10.0);
  prob.innovation_scale = Eigen::Vector2d(3.0, 0.05);
  prob.error_scale = Eigen::Vector4d(5.0, 5.0, 1.0, 1.0);
  // A one-SD innovation may move each estimate entry by at most its typical error.
  prob.gain_bound = prob.error_scale * prob.innovation_scale.cwiseInverse().transpose();
  prob.error_unit = 10.0;
  prob.divergence_components = {0, 1};
  prob.divergence_threshold = 50.0;
  prob.training_stop = 30.0;
  return prob;
}

EstimationProblem make_problem(const std::string& system_id) {
  if (system_id == "pendulum") return pendulum_problem();
  if (system_id == "vehicle") return vehicle_problem();
  if (system_id == "bearing") return bearing_problem();
  throw ConfigError("unknown system '" + system_id + "' (expected pendulum, vehicle or bearing)");
}

}  // namespace lrlf
