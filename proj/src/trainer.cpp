#include "lrlf/trainer.hpp"

#include <cmath>
#include <ostream>
#include <sstream>
#include <utility>

#include "lrlf/errors.hpp"

namespace lrlf {

void TrainConfig::validate() const {
  auto positive = [](double v, const char* name) {
    if (!(v > 0.0) || !std::isfinite(v)) throw ConfigError(std::string(name) + " must be positive");
  };
  if (!(gamma >= 0.0 && gamma < 1.0)) throw ConfigError("gamma must lie in [0,1)");
  if (!(tau >= 0.0 && tau <= 1.0)) throw ConfigError("tau must lie in [0,1]");
  positive(actor_lr, "actor_lr");
  positive(critic_lr, "critic_lr");
  positive(lyapunov_lr, "lyapunov_lr");
  positive(lambda_lr, "lambda_lr");
  positive(alpha_init, "alpha_init");
  if (!(beta >= 0.0)) throw ConfigError("beta must be nonnegative");
  if (!(delta_slack >= 0.0)) throw ConfigError("delta_slack must be nonnegative");
  if (!(lambda_init >= 0.0)) throw ConfigError("lambda_init must be nonnegative");
  if (alpha_autotune && !(target_entropy && std::isfinite(*target_entropy)))
    throw ConfigError("alpha_autotune requires a finite target_entropy");
  if (batch_size < 1) throw ConfigError("batch_size must be at least 1");
  if (horizon < 1) throw ConfigError("horizon must be at least 1");
  if (capacity < batch_size) throw ConfigError("capacity must be at least batch_size");
  if (total_steps < 0) throw ConfigError("total_steps must be nonnegative");
  if (warmup_steps < 0) throw ConfigError("warmup_steps must be nonnegative");
  if (!(action_bound >= 0.0)) throw ConfigError("action_bound must be nonnegative (0 selects the system default)");
  if (divergence_stop && !(*divergence_stop >= 0.0)) throw ConfigError("divergence_stop must be nonnegative");
  if (!std::isfinite(initial_log_std)) throw ConfigError("initial_log_std must be finite");
  for (int h : actor_hidden)
    if (h < 1) throw ConfigError("actor_hidden widths must be at least 1");
  for (int h : critic_hidden)
    if (h < 1) throw ConfigError("critic_hidden widths must be at least 1");
  if (critic_features < 1) throw ConfigError("critic_features must be at least 1");
  if (snapshot_count < 1) throw ConfigError("snapshot_count must be at least 1");
}

namespace {

/// Raw policy observation layout and its network feature map.
nn::FeatureMap<double> observation_features(const EstimationProblem& p, ObservationMode mode) {
  if (mode == ObservationMode::oracle_error) return nn::FeatureMap<double>::scaled(p.error_scale.cwiseInverse());
  const auto n = p.state_scale.size(), m = p.innovation_scale.size();
  nn::FeatureMap<double> f;
  f.periodic = p.periodic_states;
  if (p.state_angles.rows() > 0) {
    f.angles = Eigen::MatrixXd::Zero(p.state_angles.rows(), n + m);
    f.angles.leftCols(n) = p.state_angles;
  }
  f.scale = Eigen::VectorXd::Ones(n + m + f.extra_dim());
  f.scale.head(n) = p.state_scale.cwiseInverse();
  f.scale.segment(n, m) = p.innovation_scale.cwiseInverse();
  for (int i : f.periodic) f.scale[i] = 1.0;
  return f;
}

/// Critic features over [x̃; o; a] (observation block optional).
nn::FeatureMap<double> critic_features(const EstimationProblem& p, const nn::FeatureMap<double>& obs, bool with_observation,
                                       const Eigen::VectorXd& bound) {
  const auto action_dim = bound.size();
  const auto n = p.error_scale.size();
  const Eigen::Index obs_raw = with_observation ? obs.raw_dim() : 0;
  const Eigen::Index obs_extra = with_observation ? obs.extra_dim() : 0;
  nn::FeatureMap<double> f;
  f.scale.resize(n + obs_raw + action_dim + obs_extra);
  f.scale.head(n) = p.error_unit * p.error_scale.cwiseInverse();
  if (with_observation) {
    f.scale.segment(n, obs_raw) = obs.scale.head(obs_raw);
    for (int i : obs.periodic) f.periodic.push_back(static_cast<int>(n) + i);
    if (obs.angles.rows() > 0) {
      f.angles = Eigen::MatrixXd::Zero(obs.angles.rows(), n + obs_raw + action_dim);
      f.angles.middleCols(n, obs_raw) = obs.angles;
    }
    f.scale.tail(obs_extra) = obs.scale.tail(obs_extra);
  }
  f.scale.segment(n + obs_raw, action_dim) = bound.cwiseInverse();
  return f;
}

/// Gain bounds in action (row-major) order.
Eigen::VectorXd resolved_bound(const TrainConfig& cfg, const EstimationProblem& p) {
  const int n = p.system.state_dim, m = p.system.meas_dim;
  if (cfg.action_bound > 0.0) return Eigen::VectorXd::Constant(n * m, cfg.action_bound);
  if (p.gain_bound.size() == 0) return Eigen::VectorXd::Constant(n * m, p.action_bound);
  if (p.gain_bound.rows() != n || p.gain_bound.cols() != m) throw ConfigError("problem gain_bound must be state_dim × meas_dim");
  Eigen::VectorXd b(n * m);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < m; ++j) b[i * m + j] = p.gain_bound(i, j);
  return b;
}

/// One environment rollout position: true state, estimate and the already simulated next measurement.
struct Rollout {
  Eigen::VectorXd x, xh, x_next, y_next, obs;
  int k = 0;
  double cost = 0.0;
};

class Trainer {
 public:
  Trainer(const TrainConfig& cfg, const EstimationProblem& problem)
      : cfg_(cfg),
        problem_(problem),
        sys_(problem.system),
        init_rng_(derive_seed(cfg.seed, 0)),
        env_rng_(derive_seed(cfg.seed, 1)),
        act_rng_(derive_seed(cfg.seed, 2)),
        update_rng_(derive_seed(cfg.seed, 3)),
        agent_(init_agent(cfg, problem, init_rng_)),
        buffer_(static_cast<std::size_t>(cfg.capacity), sys_.state_dim, obs_dim(), agent_.head.action_dim) {
    actor_ = nn::NetworkParams<double>(agent_.actor);
    critic_ = nn::NetworkParams<double>(agent_.critic);
    adam_.kind = cfg.optimizer;
    lambda_ = cfg.lambda_init;
    alpha_ = cfg.alpha_init;
  }

  TrainResult run() {
    TrainResult result;
    const long interval = std::max<long>(1, cfg_.total_steps / cfg_.snapshot_count);
    if (cfg_.total_steps > 0) reset_episode();
    for (long step = 1; step <= cfg_.total_steps; ++step) {
      env_step(result);
      if (static_cast<long>(buffer_.size()) >= std::max<long>(cfg_.warmup_steps, cfg_.batch_size)) {
        result.diagnostics.push_back(update(step));
        if (!update_applied_) ++result.skipped_updates;
      }
      if (step % interval == 0) result.snapshots.push_back({step, actor_.net, critic_.net});
    }
    result.estimator = LearnedEstimator{actor_.net, agent_.head, sys_, cfg_.observation_mode};
    result.critic = critic_.net;
    result.critic_head = agent_.critic_head;
    result.lambda = lambda_;
    result.alpha = alpha_;
    return result;
  }

 private:
  int obs_dim() const {
    return cfg_.observation_mode == ObservationMode::deployable ? sys_.state_dim + sys_.meas_dim : sys_.state_dim;
  }

  void simulate_next() {
    const auto s = step(sys_, roll_.x, env_rng_);
    roll_.x_next = s.state;
    roll_.y_next = s.measurement;
    roll_.obs = observation(roll_.x, roll_.xh);
  }

  Eigen::VectorXd observation(const Eigen::VectorXd& x, const Eigen::VectorXd& xh) const {
    if (cfg_.observation_mode == ObservationMode::oracle_error) return build_oracle_observation(x, xh);
    return build_observation(xh, innovation(sys_, xh, roll_.y_next));
  }

  void reset_episode() {
    auto [x0, xh0] = problem_.sample_initial(env_rng_);
    roll_.x = std::move(x0);
    roll_.xh = std::move(xh0);
    roll_.k = 0;
    roll_.cost = 0.0;
    simulate_next();
  }

  void env_step(TrainResult& result) {
    Eigen::MatrixXd eps(agent_.head.action_dim, 1);
    act_rng_.fill_normal(eps);
    const auto sample = nn::policy_sample(actor_.net, agent_.head, Eigen::MatrixXd(roll_.obs), eps);
    const Eigen::VectorXd action = sample.action.col(0);
    const Eigen::MatrixXd gain = gain_from_action(action, sys_.state_dim, sys_.meas_dim);
    const Eigen::VectorXd xh_next = gain_update(sys_, roll_.xh, roll_.y_next, gain);

    const Eigen::VectorXd err = (roll_.x - roll_.xh) / problem_.error_unit;
    const Eigen::VectorXd obs = roll_.obs;
    roll_.x = roll_.x_next;
    roll_.xh = xh_next;
    simulate_next();
    const Eigen::VectorXd next_err = (roll_.x - roll_.xh) / problem_.error_unit;
    if (!next_err.allFinite()) throw NumericalError("training rollout produced a non-finite estimate error");

    ++roll_.k;
    const double stop = cfg_.divergence_stop.value_or(problem_.training_stop);
    const bool runaway = stop > 0.0 && next_err.norm() * problem_.error_unit > stop;
    auto t = make_transition(err, obs, action, next_err, roll_.obs, roll_.k >= cfg_.horizon || runaway);
    if (runaway && roll_.k < cfg_.horizon) {
      // The diverged estimate is treated as absorbing: its error persists for the rest of the horizon.
      const double remaining = static_cast<double>(cfg_.horizon - roll_.k);
      t.terminal_value = next_err.squaredNorm() * (1.0 - std::pow(cfg_.gamma, remaining)) / (1.0 - cfg_.gamma);
    }
    roll_.cost += t.cost;
    buffer_.push(t);
    if (t.terminal) {
      last_episode_cost_ = roll_.cost;
      result.episode_costs.push_back(roll_.cost);
      reset_episode();
    }
  }

  UpdateRecord update(long step) {
    const auto batch = Batch<double>::from(buffer_.sample(static_cast<std::size_t>(cfg_.batch_size), update_rng_));
    const Eigen::Index b = batch.size();
    const int da = agent_.head.action_dim;
    Eigen::MatrixXd critic_next_noise(da, b), noise(da, b), next_noise(da, b);
    update_rng_.fill_normal(critic_next_noise);
    update_rng_.fill_normal(noise);
    update_rng_.fill_normal(next_noise);

    std::swap(agent_.actor, actor_.net);
    std::swap(agent_.critic, critic_.net);
    const auto cl = critic_loss(agent_, batch, alpha_, cfg_.gamma, critic_next_noise);
    const auto al = actor_loss(agent_, batch, lambda_, alpha_, cfg_.beta, cfg_.delta_slack, noise, next_noise, &cl.values);
    std::swap(agent_.actor, actor_.net);
    std::swap(agent_.critic, critic_.net);

    if (!std::isfinite(cl.loss) || !std::isfinite(al.loss)) {
      std::ostringstream msg;
      msg << "non-finite loss at step " << step << ": critic_loss=" << cl.loss << " actor_loss=" << al.loss
          << " lambda=" << lambda_ << " alpha=" << alpha_ << " last_episode_cost=" << last_episode_cost_
          << " buffer_size=" << buffer_.size();
      throw NumericalError(msg.str());
    }

    const bool critic_ok = nn::optimizer_step(critic_, cl.grads, cfg_.lyapunov_lr, adam_);
    const bool actor_ok = nn::optimizer_step(actor_, al.grads, cfg_.actor_lr, adam_);
    update_applied_ = critic_ok && actor_ok;
    if (cfg_.alpha_autotune) alpha_ = alpha_update(alpha_, al.mean_log_prob, *cfg_.target_entropy, cfg_.critic_lr);
    lambda_ = lambda_update(lambda_, al.constraint, cfg_.lambda_lr);
    nn::polyak_update(agent_.target_critic, critic_.net, cfg_.tau);

    return UpdateRecord{step, lambda_, alpha_, cl.loss, al.loss, al.constraint, last_episode_cost_};
  }

  const TrainConfig& cfg_;
  const EstimationProblem& problem_;
  const SystemModel& sys_;
  Rng init_rng_, env_rng_, act_rng_, update_rng_;
  Agent<double> agent_;
  ReplayBuffer buffer_;
  nn::NetworkParams<double> actor_, critic_;
  nn::AdamSettings adam_;
  double lambda_ = 0.0, alpha_ = 0.0;
  double last_episode_cost_ = std::nan("");
  bool update_applied_ = true;
  Rollout roll_;
};

}  // namespace

Agent<double> init_agent(const TrainConfig& cfg, const EstimationProblem& problem, Rng& rng) {
  const auto& sys = problem.system;
  const int da = sys.state_dim * sys.meas_dim;
  const Eigen::VectorXd bound = resolved_bound(cfg, problem);
  Agent<double> a;
  a.head.action_dim = da;
  a.head.action_bound = bound;
  a.head.input = observation_features(problem, cfg.observation_mode);
  const nn::MlpSpec actor_spec{static_cast<int>(a.head.input.feature_dim()), cfg.actor_hidden, 2 * da};
  a.head.validate(actor_spec);
  a.actor = nn::Mlp<double>(actor_spec, rng);
  // Start near the open-loop predictor with a narrow exploration spread.
  auto& last = a.actor.layers().back();
  last *= 1e-2;
  last.col(last.cols() - 1).tail(da).setConstant(cfg.initial_log_std);

  a.critic_head.with_observation = cfg.critic_observation;
  a.critic_head.input = critic_features(problem, a.head.input, cfg.critic_observation, bound);
  a.critic_head.input.validate();
  const int critic_in = static_cast<int>(a.critic_head.input.feature_dim());
  a.critic = nn::Mlp<double>(nn::MlpSpec{critic_in, cfg.critic_hidden, cfg.critic_features}, rng);
  a.target_critic = a.critic;
  return a;
}

TrainResult train(const TrainConfig& cfg, const EstimationProblem& problem) {
  cfg.validate();
  problem.system.validate();
  Trainer t(cfg, problem);
  return t.run();
}

void write_diagnostics_csv(std::ostream& out, const std::vector<UpdateRecord>& rows, long stride) {
  if (stride < 1) throw ConfigError("diagnostics stride must be at least 1");
  out << "step,lambda,alpha,critic_loss,actor_loss,episode_cost\n";
  const auto old_precision = out.precision(10);
  for (std::size_t i = 0; i < rows.size(); i += static_cast<std::size_t>(stride)) {
    const auto& r = rows[i];
    out << r.step << ',' << r.lambda << ',' << r.alpha << ',' << r.critic_loss << ',' << r.actor_loss << ','
        << r.episode_cost << '\n';
  }
  out.precision(old_precision);
}

ImprovementReport empirical_policy_improvement(const ProbeSet& probes, const std::vector<AgentSnapshot>& history,
                                               const nn::PolicyHead<double>& head,
                                               const nn::LyapunovCritic<double>& critic_head, int smoothing_window) {
  if (smoothing_window < 1) throw ConfigError("smoothing window must be at least 1");
  if (probes.error_states.cols() != probes.observations.cols() || probes.error_states.cols() == 0)
    throw ConfigError("probe set must hold matching, nonempty error-state and observation columns");
  ImprovementReport r;
  for (const auto& snap : history) {
    const Eigen::MatrixXd actions = nn::policy_mean_action(snap.actor, head, probes.observations);
    r.steps.push_back(snap.step);
    r.mean_values.push_back(
        nn::lyapunov_eval(snap.critic, critic_head, probes.error_states, probes.observations, actions).value.mean());
  }
  const std::size_t count = r.mean_values.size();
  for (std::size_t i = 0; i < count; ++i) {
    const std::size_t lo = i + 1 >= static_cast<std::size_t>(smoothing_window) ? i + 1 - smoothing_window : 0;
    double sum = 0.0;
    for (std::size_t j = lo; j <= i; ++j) sum += r.mean_values[j];
    r.smoothed.push_back(sum / static_cast<double>(i - lo + 1));
  }
  if (count >= 2) {
    std::size_t ok = 0;
    for (std::size_t i = 0; i + 1 < count; ++i)
      if (r.smoothed[i + 1] <= r.smoothed[i] * (1.0 + 1e-12)) ++ok;
    r.non_increasing_fraction = static_cast<double>(ok) / static_cast<double>(count - 1);
  }
  return r;
}

}  // namespace lrlf
