#include "lrlf/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdlib>
#include <exception>
#include <iomanip>
#include <ostream>
#include <thread>

#include <json.hpp>

#include "lrlf/errors.hpp"
#include "lrlf/filters.hpp"

namespace lrlf {

void Scenario::validate() const {
  if (horizon < 1) throw ConfigError("scenario '" + name + "': horizon must be at least 1");
  if (trials < 1) throw ConfigError("scenario '" + name + "': trial count must be at least 1");
  if (!(missing_prob >= 0.0 && missing_prob <= 1.0)) throw ConfigError("scenario '" + name + "': missing_prob must lie in [0,1]");
  const auto system = nominal().system;
  if (meas_noise && meas_noise->dim() != system.meas_dim)
    throw ConfigError("scenario '" + name + "': measurement noise dimension does not match the system");
  if (process_noise && process_noise->dim() != system.state_dim)
    throw ConfigError("scenario '" + name + "': process noise dimension does not match the system");
}

EstimationProblem Scenario::nominal() const { return make_problem(system_id); }

EstimationProblem Scenario::truth() const {
  auto p = nominal();
  if (meas_noise) p.system = with_meas_noise(std::move(p.system), *meas_noise);
  if (process_noise) p.system.process_noise = *process_noise;
  if (initial) p.sample_initial = initial;
  p.system.channel.missing_prob = missing_prob;
  p.system.validate();
  return p;
}

Scenario nominal_scenario(const std::string& system_id, int trials) {
  Scenario s;
  s.name = system_id + "_nominal";
  s.system_id = system_id;
  s.trials = trials;
  return s;
}

std::vector<Scenario> pendulum_robustness_scenarios(int trials) {
  auto nominal = nominal_scenario("pendulum", trials);
  auto noisy = nominal;
  noisy.name = "pendulum_r0.1";
  noisy.meas_noise = NoiseSpec::gaussian(Eigen::VectorXd::Zero(1), Eigen::MatrixXd::Constant(1, 1, 0.1));
  auto missing = nominal;
  missing.name = "pendulum_missing0.5";
  missing.missing_prob = 0.5;
  return {nominal, noisy, missing};
}

std::vector<Scenario> noise_suite(int trials, double exponential_rate) {
  auto base = nominal_scenario("pendulum", trials);
  auto trunc = base;
  trunc.name = "pendulum_truncated_gaussian";
  trunc.meas_noise = NoiseSpec::truncated_gaussian(0.0, 0.01, 0.0, 1.0);
  auto uni = base;
  uni.name = "pendulum_uniform";
  uni.meas_noise = NoiseSpec::uniform(Eigen::VectorXd::Constant(1, -0.3), Eigen::VectorXd::Constant(1, 0.3));
  auto expo = base;
  expo.name = "pendulum_exponential";
  expo.meas_noise = NoiseSpec::exponential(exponential_rate);
  return {trunc, uni, expo};
}

std::string to_string(EstimatorKind kind) {
  switch (kind) {
    case EstimatorKind::kf: return "KF";
    case EstimatorKind::ekf: return "EKF";
    case EstimatorKind::ukf: return "UKF";
    case EstimatorKind::pf: return "PF";
    case EstimatorKind::learned: return "LRLF";
  }
  return "?";
}

EstimatorSpec EstimatorSpec::kf() { return {EstimatorKind::kf, "KF", 0, nullptr}; }
EstimatorSpec EstimatorSpec::ekf() { return {EstimatorKind::ekf, "EKF", 0, nullptr}; }
EstimatorSpec EstimatorSpec::ukf() { return {EstimatorKind::ukf, "UKF", 0, nullptr}; }
EstimatorSpec EstimatorSpec::pf(int particles) {
  if (particles < 1) throw ConfigError("particle filter needs at least one particle");
  return {EstimatorKind::pf, "PF" + std::to_string(particles), particles, nullptr};
}
EstimatorSpec EstimatorSpec::lrlf(std::shared_ptr<const LearnedEstimator> est, std::string name) {
  if (!est) throw ConfigError("learned estimator is missing");
  return {EstimatorKind::learned, std::move(name), 0, std::move(est)};
}

TrialSeeds TrialSeeds::for_trial(std::uint64_t base_seed, std::uint64_t trial) {
  return {derive_seed(base_seed, trial, 0), derive_seed(base_seed, trial, 1)};
}

namespace {

/// Recursive estimator state for one trial.
class TrialFilter {
 public:
  TrialFilter(const EstimatorSpec& spec, const EstimationProblem& nominal, const Eigen::VectorXd& xh0, Rng& rng)
      : spec_(spec), model_(nominal.system), rng_(rng) {
    switch (spec.kind) {
      case EstimatorKind::kf:
      case EstimatorKind::ekf:
      case EstimatorKind::ukf: gauss_ = {xh0, nominal.initial_covariance}; break;
      case EstimatorKind::pf:
        particles_ = make_particle_belief({xh0, nominal.initial_covariance}, spec.particles, rng_);
        break;
      case EstimatorKind::learned:
        if (spec.learned->system.state_dim != model_.state_dim || spec.learned->system.meas_dim != model_.meas_dim)
          throw ConfigError("learned estimator dimensions do not match the scenario system");
        estimate_ = xh0;
        break;
    }
  }

  /// Consumes y_{k+1}; `previous_truth` is x_k, read only by oracle-mode learned estimators.
  Eigen::VectorXd update(const Eigen::VectorXd& y, const Eigen::VectorXd& previous_truth) {
    switch (spec_.kind) {
      case EstimatorKind::kf: gauss_ = kf_step(gauss_, y, model_); return gauss_.mean;
      case EstimatorKind::ekf: gauss_ = ekf_step(gauss_, y, model_); return gauss_.mean;
      case EstimatorKind::ukf: gauss_ = ukf_step(gauss_, y, model_); return gauss_.mean;
      case EstimatorKind::pf: particles_ = pf_step(particles_, y, model_, rng_); return particles_.mean();
      case EstimatorKind::learned:
        estimate_ = spec_.learned->mode == ObservationMode::deployable
                        ? estimator_step(*spec_.learned, estimate_, y)
                        : estimator_step_oracle(*spec_.learned, estimate_, y, previous_truth);
        return estimate_;
    }
    return {};
  }

 private:
  const EstimatorSpec& spec_;
  const SystemModel& model_;
  Rng& rng_;
  GaussianBelief gauss_;
  ParticleBelief particles_;
  Eigen::VectorXd estimate_;
};

double divergence_norm(const EstimationProblem& p, const Eigen::VectorXd& err) {
  if (p.divergence_components.empty()) return err.norm();
  double s = 0.0;
  for (int i : p.divergence_components) s += err[i] * err[i];
  return std::sqrt(s);
}

}  // namespace

Eigen::MatrixXd true_trajectory(const Scenario& scenario, const TrialSeeds& seeds) {
  const auto truth = scenario.truth();
  Rng sys_rng(seeds.system);
  auto [x, xh0] = truth.sample_initial(sys_rng);
  Eigen::MatrixXd out(scenario.horizon, x.size());
  for (int k = 0; k < scenario.horizon; ++k) {
    x = step(truth.system, x, sys_rng).state;
    out.row(k) = x.transpose();
  }
  return out;
}

TrialResult run_trial(const Scenario& scenario, const EstimatorSpec& estimator, const TrialSeeds& seeds) {
  scenario.validate();
  const auto start = std::chrono::steady_clock::now();
  const auto truth = scenario.truth();
  const auto nominal = scenario.nominal();
  Rng sys_rng(seeds.system), est_rng(seeds.estimator);
  auto [x, xh0] = truth.sample_initial(sys_rng);

  TrialResult r;
  r.errors.resize(scenario.horizon, x.size());
  r.states.resize(scenario.horizon, x.size());
  int rows = 0;
  try {
    TrialFilter filter(estimator, nominal, xh0, est_rng);
    for (int k = 0; k < scenario.horizon; ++k) {
      const auto s = step(truth.system, x, sys_rng);
      const Eigen::VectorXd xh = filter.update(s.measurement, x);
      x = s.state;
      const Eigen::VectorXd err = x - xh;
      if (!err.allFinite()) throw NumericalError("non-finite estimate");
      r.errors.row(k) = err.transpose();
      r.states.row(k) = x.transpose();
      ++rows;
      if (divergence_norm(truth, err) > truth.divergence_threshold) r.diverged = true;
    }
  } catch (const NumericalError&) {
    r.failed = true;
    r.diverged = true;
  }
  r.errors.conservativeResize(rows, Eigen::NoChange);
  r.states.conservativeResize(rows, Eigen::NoChange);
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return r;
}

void RunningMoments::push(double v) {
  ++n_;
  const double d = v - mean_;
  mean_ += d / static_cast<double>(n_);
  m2_ += d * (v - mean_);
}

namespace {

Eigen::Index horizon_of(const std::vector<TrialResult>& trials) {
  Eigen::Index k = 0;
  for (const auto& t : trials) k = std::max(k, t.errors.rows());
  return k;
}

Eigen::Index dim_of(const std::vector<TrialResult>& trials) {
  Eigen::Index n = 0;
  for (const auto& t : trials) n = std::max(n, t.errors.cols());
  return n;
}

ErrorBands streaming_bands(const std::vector<TrialResult>& trials, bool converged_only) {
  const Eigen::Index K = horizon_of(trials), n = dim_of(trials);
  std::vector<RunningMoments> comp(static_cast<std::size_t>(K * n));
  std::vector<RunningMoments> norm(static_cast<std::size_t>(K));
  for (const auto& t : trials) {
    if (converged_only && t.diverged) continue;
    for (Eigen::Index k = 0; k < t.errors.rows(); ++k) {
      for (Eigen::Index i = 0; i < n; ++i) comp[static_cast<std::size_t>(k * n + i)].push(t.errors(k, i));
      norm[static_cast<std::size_t>(k)].push(t.errors.row(k).norm());
    }
  }
  ErrorBands b{Eigen::MatrixXd::Zero(K, n), Eigen::MatrixXd::Zero(K, n), Eigen::VectorXd::Zero(K), Eigen::VectorXi::Zero(K)};
  for (Eigen::Index k = 0; k < K; ++k) {
    for (Eigen::Index i = 0; i < n; ++i) {
      const auto& m = comp[static_cast<std::size_t>(k * n + i)];
      b.mean(k, i) = m.mean();
      b.sd(k, i) = std::sqrt(m.variance());
    }
    b.mean_norm[k] = norm[static_cast<std::size_t>(k)].mean();
    b.count[k] = static_cast<int>(norm[static_cast<std::size_t>(k)].count());
  }
  return b;
}

}  // namespace

ErrorBands two_pass_bands(const std::vector<TrialResult>& trials, bool converged_only) {
  const Eigen::Index K = horizon_of(trials), n = dim_of(trials);
  ErrorBands b{Eigen::MatrixXd::Zero(K, n), Eigen::MatrixXd::Zero(K, n), Eigen::VectorXd::Zero(K), Eigen::VectorXi::Zero(K)};
  auto used = [&](const TrialResult& t, Eigen::Index k) { return !(converged_only && t.diverged) && k < t.errors.rows(); };
  for (Eigen::Index k = 0; k < K; ++k) {
    for (const auto& t : trials)
      if (used(t, k)) {
        b.mean.row(k) += t.errors.row(k);
        b.mean_norm[k] += t.errors.row(k).norm();
        ++b.count[k];
      }
    if (b.count[k] == 0) continue;
    b.mean.row(k) /= b.count[k];
    b.mean_norm[k] /= b.count[k];
    if (b.count[k] < 2) continue;
    for (const auto& t : trials)
      if (used(t, k)) b.sd.row(k) += (t.errors.row(k) - b.mean.row(k)).array().square().matrix();
    b.sd.row(k) = (b.sd.row(k) / (b.count[k] - 1)).array().sqrt();
  }
  return b;
}

EvalReport summarize(const std::vector<TrialResult>& trials) {
  EvalReport r;
  r.all = streaming_bands(trials, false);
  r.converged = streaming_bands(trials, true);
  r.trials = static_cast<int>(trials.size());
  double mse_sum = 0.0, seconds = 0.0;
  int kept = 0;
  for (const auto& t : trials) {
    seconds += t.seconds;
    if (t.failed) ++r.failed;
    if (t.diverged) {
      ++r.diverged;
      continue;
    }
    const Eigen::Index w = std::min<Eigen::Index>(kSteadyStateWindow, t.errors.rows());
    if (w == 0) continue;
    mse_sum += t.errors.bottomRows(w).rowwise().squaredNorm().mean();
    ++kept;
  }
  r.steady_state_mse = kept > 0 ? mse_sum / kept : std::nan("");
  r.divergence_rate = r.trials > 0 ? static_cast<double>(r.diverged) / r.trials : 0.0;
  r.seconds_per_trial = r.trials > 0 ? seconds / r.trials : 0.0;
  return r;
}

int default_thread_count() {
  if (const char* env = std::getenv("LRLF_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v >= 1) return static_cast<int>(std::min<long>(v, 1024));
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

std::vector<TrialResult> run_trials(const Scenario& scenario, const EstimatorSpec& estimator, std::uint64_t base_seed,
                                    int threads) {
  scenario.validate();
  if (threads <= 0) threads = default_thread_count();
  threads = std::min(threads, scenario.trials);
  std::vector<TrialResult> out(static_cast<std::size_t>(scenario.trials));
  std::atomic<int> next{0};
  std::exception_ptr error;
  std::atomic<bool> stop{false};
  auto worker = [&] {
    for (int i = next++; i < scenario.trials && !stop; i = next++) {
      try {
        out[static_cast<std::size_t>(i)] = run_trial(scenario, estimator, TrialSeeds::for_trial(base_seed, static_cast<std::uint64_t>(i)));
      } catch (...) {
        if (!stop.exchange(true)) error = std::current_exception();
      }
    }
  };
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
  }
  if (error) std::rethrow_exception(error);
  return out;
}

EvalReport evaluate(const Scenario& scenario, const EstimatorSpec& estimator, std::uint64_t base_seed, int threads) {
  return summarize(run_trials(scenario, estimator, base_seed, threads));
}

std::vector<ComparisonEntry> compare(const std::vector<Scenario>& scenarios, const std::vector<EstimatorSpec>& estimators,
                                     std::uint64_t base_seed, int threads) {
  std::vector<ComparisonEntry> out;
  for (std::size_t s = 0; s < scenarios.size(); ++s) {
    const std::uint64_t seed = derive_seed(base_seed, s);
    for (const auto& e : estimators) out.push_back({scenarios[s].name, e.name, evaluate(scenarios[s], e, seed, threads)});
  }
  return out;
}

void write_bands_csv(std::ostream& out, const std::string& scenario, const std::string& estimator, const ErrorBands& bands,
                     bool header) {
  const Eigen::Index n = bands.mean.cols();
  if (header) {
    out << "scenario,estimator,k";
    for (Eigen::Index i = 1; i <= n; ++i) out << ",mean_err_" << i;
    for (Eigen::Index i = 1; i <= n; ++i) out << ",sd_err_" << i;
    out << '\n';
  }
  const auto flags = out.flags();
  const auto prec = out.precision();
  out << std::setprecision(10);
  for (Eigen::Index k = 0; k < bands.mean.rows(); ++k) {
    out << scenario << ',' << estimator << ',' << (k + 1);
    for (Eigen::Index i = 0; i < n; ++i) out << ',' << bands.mean(k, i);
    for (Eigen::Index i = 0; i < n; ++i) out << ',' << bands.sd(k, i);
    out << '\n';
  }
  out.flags(flags);
  out.precision(prec);
}

std::string summary_json(const std::vector<ComparisonEntry>& entries, std::uint64_t base_seed) {
  nlohmann::ordered_json j;
  j["base_seed"] = base_seed;
  j["common_random_numbers"] = true;
  j["steady_state_window"] = kSteadyStateWindow;
  auto& list = j["reports"] = nlohmann::ordered_json::array();
  for (const auto& e : entries) {
    const auto& r = e.report;
    nlohmann::ordered_json item;
    item["scenario"] = e.scenario;
    item["estimator"] = e.estimator;
    item["trials"] = r.trials;
    item["diverged"] = r.diverged;
    item["failed"] = r.failed;
    item["divergence_rate"] = r.divergence_rate;
    if (std::isfinite(r.steady_state_mse)) item["steady_state_mse"] = r.steady_state_mse;
    else item["steady_state_mse"] = nullptr;
    item["seconds_per_trial"] = r.seconds_per_trial;
    list.push_back(std::move(item));
  }
  return j.dump(2);
}

}  // namespace lrlf
