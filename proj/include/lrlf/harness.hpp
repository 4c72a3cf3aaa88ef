#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "lrlf/estimator.hpp"
#include "lrlf/noise.hpp"
#include "lrlf/problem.hpp"

namespace lrlf {

/// A Monte Carlo setting: which system, how the truth deviates from the filters' nominal model,
/// and how many trials of what length.
struct Scenario {
  std::string name;
  std::string system_id = "pendulum";
  std::optional<NoiseSpec> meas_noise;     // truth-side override; filters keep the nominal law
  std::optional<NoiseSpec> process_noise;  // truth-side override
  InitialSampler initial;                  // (x₀, x̂₀) sampler; empty: the problem's
  double missing_prob = 0.0;
  int horizon = 100;
  int trials = 500;

  void validate() const;
  /// The nominal problem the estimators are built for.
  EstimationProblem nominal() const;
  /// The problem the true system is simulated from (overrides applied).
  EstimationProblem truth() const;
};

Scenario nominal_scenario(const std::string& system_id, int trials = 500);
/// The three pendulum comparison settings: nominal, measurement variance 0.1, half the measurements lost.
std::vector<Scenario> pendulum_robustness_scenarios(int trials = 500);
/// Pendulum with truncated-Gaussian, uniform and exponential measurement noise.
std::vector<Scenario> noise_suite(int trials = 500, double exponential_rate = 0.04);

enum class EstimatorKind { kf, ekf, ukf, pf, learned };

struct EstimatorSpec {
  EstimatorKind kind = EstimatorKind::ekf;
  std::string name;
  int particles = 1000;
  std::shared_ptr<const LearnedEstimator> learned;

  static EstimatorSpec kf();
  static EstimatorSpec ekf();
  static EstimatorSpec ukf();
  static EstimatorSpec pf(int particles);
  static EstimatorSpec lrlf(std::shared_ptr<const LearnedEstimator> est, std::string name = "LRLF");
};

/// Error trajectory x̃_k = x_k − x̂_k for k = 1..rows(), one row per step.
struct TrialResult {
  Eigen::MatrixXd errors;
  Eigen::MatrixXd states;  // true x_1..x_K, same rows as `errors`
  bool diverged = false;
  bool failed = false;  // numerical failure; `errors` is truncated at the failing step
  double seconds = 0.0;
};

/// Seeds for trial i. The system stream is shared by every estimator (common random numbers).
struct TrialSeeds {
  std::uint64_t system = 0;
  std::uint64_t estimator = 0;
  static TrialSeeds for_trial(std::uint64_t base_seed, std::uint64_t trial);
};

TrialResult run_trial(const Scenario& scenario, const EstimatorSpec& estimator, const TrialSeeds& seeds);

/// True-state trajectory of a trial (rows are x_1..x_K), independent of any estimator.
Eigen::MatrixXd true_trajectory(const Scenario& scenario, const TrialSeeds& seeds);

/// Per-step error moments over a set of trials.
struct ErrorBands {
  Eigen::MatrixXd mean;       // K × n
  Eigen::MatrixXd sd;         // K × n, sample SD (zero where fewer than two trials contribute)
  Eigen::VectorXd mean_norm;  // K, mean ‖x̃_k‖
  Eigen::VectorXi count;      // K, trials contributing at step k
};

struct EvalReport {
  ErrorBands all;        // every trial, truncated trials up to their failure step
  ErrorBands converged;  // diverged trials excluded
  double steady_state_mse = 0.0;  // mean x̃ᵀx̃ over the final window, non-diverged trials only
  double divergence_rate = 0.0;
  int trials = 0;
  int diverged = 0;
  int failed = 0;
  double seconds_per_trial = 0.0;
  int horizon() const { return static_cast<int>(all.mean.rows()); }
  int state_dim() const { return static_cast<int>(all.mean.cols()); }
};

inline constexpr int kSteadyStateWindow = 20;

/// Welford accumulator for one scalar series.
class RunningMoments {
 public:
  void push(double v);
  long count() const { return n_; }
  double mean() const { return mean_; }
  /// Sample variance (n − 1 denominator); 0 below two samples.
  double variance() const { return n_ > 1 ? m2_ / static_cast<double>(n_ - 1) : 0.0; }

 private:
  long n_ = 0;
  double mean_ = 0.0, m2_ = 0.0;
};

/// Aggregates trials in the order given; the result does not depend on how trials were scheduled.
EvalReport summarize(const std::vector<TrialResult>& trials);

/// Recomputes both band sets with the two-pass formula; used to cross-check `summarize`.
ErrorBands two_pass_bands(const std::vector<TrialResult>& trials, bool converged_only);

/// Runs `trials` independent trials, in parallel when `threads` > 1.
std::vector<TrialResult> run_trials(const Scenario& scenario, const EstimatorSpec& estimator, std::uint64_t base_seed,
                                    int threads = 0);

EvalReport evaluate(const Scenario& scenario, const EstimatorSpec& estimator, std::uint64_t base_seed, int threads = 0);

struct ComparisonEntry {
  std::string scenario;
  std::string estimator;
  EvalReport report;
};

/// One report per (scenario, estimator), trial i of a scenario seeded identically for every estimator.
std::vector<ComparisonEntry> compare(const std::vector<Scenario>& scenarios, const std::vector<EstimatorSpec>& estimators,
                                     std::uint64_t base_seed, int threads = 0);

/// Worker count from LRLF_THREADS, falling back to the hardware concurrency.
int default_thread_count();

/// CSV rows: scenario, estimator, k, mean_err_1..n, sd_err_1..n.
void write_bands_csv(std::ostream& out, const std::string& scenario, const std::string& estimator, const ErrorBands& bands,
                     bool header = true);

/// Summary record (steady-state MSE, divergence rate, runtime) as a JSON string.
std::string summary_json(const std::vector<ComparisonEntry>& entries, std::uint64_t base_seed);

std::string to_string(EstimatorKind kind);

}  // namespace lrlf
