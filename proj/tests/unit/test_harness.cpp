#include <sstream>
#include <string>

#include "doctest.h"

#include "lrlf/errors.hpp"
#include "lrlf/harness.hpp"

using namespace lrlf;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

std::vector<TrialResult> synthetic_trials(int count, int horizon, int dim, Rng& rng) {
  std::vector<TrialResult> out;
  for (int t = 0; t < count; ++t) {
    TrialResult r;
    // Some trials are truncated, some diverged, and the values sit on a large offset to stress the moments.
    const int rows = t % 5 == 0 ? horizon / 2 : horizon;
    r.errors = MatrixXd(rows, dim);
    rng.fill_normal(r.errors);
    r.errors.array() += 1e3;
    r.diverged = t % 7 == 0;
    out.push_back(r);
  }
  return out;
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> cells;
  std::stringstream s(line);
  std::string c;
  while (std::getline(s, c, ',')) cells.push_back(c);
  return cells;
}

}  // namespace

TEST_CASE("scenario validation") {
  Scenario s = nominal_scenario("pendulum", 10);
  CHECK_NOTHROW(s.validate());
  s.horizon = 0;
  CHECK_THROWS_AS(s.validate(), ConfigError);
  s = nominal_scenario("pendulum", 0);
  CHECK_THROWS_AS(s.validate(), ConfigError);
  s = nominal_scenario("pendulum", 10);
  s.missing_prob = 1.5;
  CHECK_THROWS_AS(s.validate(), ConfigError);
  s = nominal_scenario("pendulum", 10);
  s.meas_noise = NoiseSpec::zero(2);
  CHECK_THROWS_AS(s.validate(), ConfigError);
  s = nominal_scenario("nowhere", 10);
  CHECK_THROWS_AS(s.validate(), ConfigError);
}

TEST_CASE("scenario presets carry the intended overrides") {
  const auto rob = pendulum_robustness_scenarios(7);
  REQUIRE(rob.size() == 3);
  CHECK(rob[0].name == "pendulum_nominal");
  CHECK(rob[1].truth().system.meas_noise.covariance()(0, 0) == doctest::Approx(0.1));
  CHECK(rob[1].nominal().system.meas_noise.covariance()(0, 0) == doctest::Approx(0.01));
  CHECK(rob[2].truth().system.channel.missing_prob == 0.5);
  CHECK(rob[2].nominal().system.channel.missing_prob == 0.0);
  for (const auto& s : rob) CHECK(s.trials == 7);
  const auto suite = noise_suite(3);
  REQUIRE(suite.size() == 3);
  Rng rng(1);
  for (int i = 0; i < 1000; ++i) {
    const double v = suite[0].truth().system.meas_noise.sample(rng)[0];
    CHECK((v >= 0.0 && v <= 1.0));
  }
}

TEST_CASE("zero noise with an exact initial estimate gives zero KF error on the vehicle") {
  Scenario s = nominal_scenario("vehicle", 3);
  s.meas_noise = NoiseSpec::zero(1);
  s.process_noise = NoiseSpec::zero(2);
  s.initial = [](Rng&) {
    const VectorXd x0 = Eigen::Vector2d(0.0, 10.0);
    return std::pair{x0, x0};
  };
  const auto r = run_trial(s, EstimatorSpec::kf(), TrialSeeds::for_trial(9, 0));
  CHECK(r.errors.rows() == 100);
  CHECK(r.errors.isZero(0.0));
  CHECK_FALSE(r.diverged);
}

TEST_CASE("trials are reproducible and share the system stream across estimators") {
  const auto s = nominal_scenario("pendulum", 4);
  const auto seeds = TrialSeeds::for_trial(11, 2);
  const auto a = run_trial(s, EstimatorSpec::pf(50), seeds);
  const auto b = run_trial(s, EstimatorSpec::pf(50), seeds);
  CHECK(a.errors == b.errors);
  const MatrixXd truth = true_trajectory(s, seeds);
  CHECK(a.states == truth);
  for (const auto& spec : {EstimatorSpec::ekf(), EstimatorSpec::ukf(), EstimatorSpec::pf(500)})
    CHECK(run_trial(s, spec, seeds).states == truth);
  CHECK(TrialSeeds::for_trial(11, 2).system != TrialSeeds::for_trial(11, 3).system);
}

TEST_CASE("streaming moments agree with the two-pass formula to 1e-10") {
  Rng rng(12);
  const auto trials = synthetic_trials(60, 40, 3, rng);
  const auto rep = summarize(trials);
  for (bool converged : {false, true}) {
    const auto& streamed = converged ? rep.converged : rep.all;
    const auto two = two_pass_bands(trials, converged);
    CHECK((streamed.mean - two.mean).cwiseAbs().maxCoeff() < 1e-10);
    CHECK((streamed.sd - two.sd).cwiseAbs().maxCoeff() < 1e-10);
    CHECK((streamed.mean_norm - two.mean_norm).cwiseAbs().maxCoeff() < 1e-10);
    CHECK(streamed.count == two.count);
    CHECK((streamed.sd.array() >= 0).all());
  }
  CHECK(rep.trials == 60);
  CHECK(rep.diverged == 9);
  CHECK(rep.divergence_rate == doctest::Approx(9.0 / 60.0));
  CHECK(rep.all.count[0] == 60);
  CHECK(rep.all.count[39] == 48);
}

TEST_CASE("steady-state MSE averages x̃ᵀx̃ over the final window of non-diverged trials") {
  std::vector<TrialResult> trials(3);
  for (int t = 0; t < 3; ++t) trials[t].errors = MatrixXd::Constant(30, 2, t + 1.0);
  trials[2].diverged = true;
  const auto rep = summarize(trials);
  // Trials 0 and 1 contribute 2·1² and 2·2².
  CHECK(rep.steady_state_mse == doctest::Approx(5.0));
}

TEST_CASE("aggregation does not depend on the thread count") {
  const auto s = nominal_scenario("pendulum", 12);
  const auto one = summarize(run_trials(s, EstimatorSpec::ekf(), 5, 1));
  const auto four = summarize(run_trials(s, EstimatorSpec::ekf(), 5, 4));
  CHECK(one.all.mean == four.all.mean);
  CHECK(one.all.sd == four.all.sd);
  CHECK(one.steady_state_mse == four.steady_state_mse);
}

TEST_CASE("single cell comparison is one report") {
  const auto s = nominal_scenario("vehicle", 5);
  const auto table = compare({s}, {EstimatorSpec::kf()}, 3, 1);
  REQUIRE(table.size() == 1);
  CHECK(table[0].scenario == "vehicle_nominal");
  CHECK(table[0].estimator == "KF");
  CHECK(table[0].report.trials == 5);
  CHECK(table[0].report.horizon() == 100);
  CHECK(table[0].report.state_dim() == 2);
}

TEST_CASE("no estimator beats the KF on the linear vehicle beyond 3 SE") {
  const auto s = nominal_scenario("vehicle", 200);
  auto per_trial = [](const std::vector<TrialResult>& trials) {
    VectorXd m(static_cast<Eigen::Index>(trials.size()));
    for (std::size_t t = 0; t < trials.size(); ++t)
      m[static_cast<Eigen::Index>(t)] = trials[t].errors.bottomRows(kSteadyStateWindow).rowwise().squaredNorm().mean();
    return m;
  };
  const VectorXd kf = per_trial(run_trials(s, EstimatorSpec::kf(), 21));
  for (const auto& spec : {EstimatorSpec::ekf(), EstimatorSpec::ukf(), EstimatorSpec::pf(300)}) {
    const VectorXd d = per_trial(run_trials(s, spec, 21)) - kf;
    const double n = static_cast<double>(d.size());
    const double se = std::sqrt((d.array() - d.mean()).square().sum() / (n - 1) / n);
    CHECK(d.mean() >= -3.0 * se - 1e-12);
  }
}

TEST_CASE("bands CSV has a header and rows matching the schema") {
  Rng rng(13);
  const auto rep = summarize(synthetic_trials(5, 4, 2, rng));
  std::ostringstream out;
  write_bands_csv(out, "sc", "EKF", rep.all);
  std::istringstream in(out.str());
  std::string line;
  std::getline(in, line);
  CHECK(line == "scenario,estimator,k,mean_err_1,mean_err_2,sd_err_1,sd_err_2");
  int rows = 0;
  while (std::getline(in, line)) {
    const auto cells = split(line);
    CHECK(cells.size() == 7);
    CHECK(cells[0] == "sc");
    CHECK(cells[2] == std::to_string(rows + 1));
    ++rows;
  }
  CHECK(rows == 4);
}

TEST_CASE("summary JSON lists every cell") {
  const auto table = compare({nominal_scenario("vehicle", 2)}, {EstimatorSpec::kf(), EstimatorSpec::ukf()}, 3, 1);
  const std::string j = summary_json(table, 3);
  CHECK(j.find("\"estimator\": \"KF\"") != std::string::npos);
  CHECK(j.find("\"estimator\": \"UKF\"") != std::string::npos);
  CHECK(j.find("\"divergence_rate\"") != std::string::npos);
  CHECK(j.find("\"seconds_per_trial\"") != std::string::npos);
}
