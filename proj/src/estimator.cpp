#include "lrlf/estimator.hpp"

#include "lrlf/errors.hpp"

namespace lrlf {

std::string to_string(ObservationMode mode) {
  return mode == ObservationMode::deployable ? "deployable" : "oracle-error";
}

ObservationMode observation_mode_from_string(const std::string& s) {
  if (s == "deployable") return ObservationMode::deployable;
  if (s == "oracle-error") return ObservationMode::oracle_error;
  throw ConfigError("observation mode must be 'deployable' or 'oracle-error', got '" + s + "'");
}

Eigen::VectorXd build_observation(const Eigen::VectorXd& estimate, const Eigen::VectorXd& innovation) {
  Eigen::VectorXd o(estimate.size() + innovation.size());
  o << estimate, innovation;
  return o;
}

Eigen::VectorXd build_oracle_observation(const Eigen::VectorXd& true_state, const Eigen::VectorXd& estimate) {
  return true_state - estimate;
}

Eigen::VectorXd innovation(const SystemModel& model, const Eigen::VectorXd& estimate, const Eigen::VectorXd& y) {
  return y - model.measurement(model.transition(estimate));
}

Eigen::MatrixXd gain_from_action(const Eigen::VectorXd& action, int state_dim, int meas_dim) {
  if (action.size() != state_dim * meas_dim) throw ConfigError("gain action has wrong length");
  return Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(action.data(), state_dim, meas_dim);
}

Eigen::VectorXd gain_update(const SystemModel& model, const Eigen::VectorXd& estimate, const Eigen::VectorXd& y,
                            const Eigen::MatrixXd& gain) {
  const Eigen::VectorXd predicted = model.transition(estimate);
  return predicted + gain * (y - model.measurement(predicted));
}

namespace {

Eigen::VectorXd mean_gain_update(const LearnedEstimator& est, const Eigen::VectorXd& obs, const Eigen::VectorXd& predicted,
                                 const Eigen::VectorXd& e) {
  const Eigen::VectorXd action = nn::policy_mean_action(est.policy, est.head, Eigen::MatrixXd(obs));
  return predicted + gain_from_action(action, est.system.state_dim, est.system.meas_dim) * e;
}

}  // namespace

Eigen::VectorXd estimator_step(const LearnedEstimator& est, const Eigen::VectorXd& estimate, const Eigen::VectorXd& y) {
  if (est.mode != ObservationMode::deployable) throw ConfigError("estimator_step needs a deployable-mode estimator");
  const Eigen::VectorXd predicted = est.system.transition(estimate);
  const Eigen::VectorXd e = y - est.system.measurement(predicted);
  return mean_gain_update(est, build_observation(estimate, e), predicted, e);
}

Eigen::VectorXd estimator_step_oracle(const LearnedEstimator& est, const Eigen::VectorXd& estimate, const Eigen::VectorXd& y,
                                      const Eigen::VectorXd& true_state) {
  const Eigen::VectorXd predicted = est.system.transition(estimate);
  const Eigen::VectorXd e = y - est.system.measurement(predicted);
  return mean_gain_update(est, build_oracle_observation(true_state, estimate), predicted, e);
}

}  // namespace lrlf
