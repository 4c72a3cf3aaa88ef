#include <doctest.h>

#include <cmath>

#include "filter_checks.hpp"
#include "lrlf/errors.hpp"
#include "lrlf/filters.hpp"
#include "lrlf/problem.hpp"

using namespace lrlf;

TEST_CASE("KF matches the textbook recursion on the vehicle") {
  const auto p = vehicle_problem();
  const auto rec = testing::record(p, 100, 17);
  Eigen::Matrix2d f;
  f << 1, 1, 0, 1;
  Eigen::RowVector2d h(1, 0);
  Eigen::Matrix2d q = Eigen::Matrix2d::Zero();
  q(1, 1) = 0.01;
  const double r = 0.02;
  Eigen::Vector2d m = rec.initial_estimate;
  Eigen::Matrix2d cov = p.initial_covariance;
  GaussianBelief b{rec.initial_estimate, p.initial_covariance};
  for (const auto& y : rec.measurements) {
    m = f * m;
    cov = f * cov * f.transpose() + q;
    const double s = h * cov * h.transpose() + r;
    const Eigen::Vector2d k = cov * h.transpose() / s;
    m += k * (y[0] - h * m);
    cov = cov - k * h * cov;
    b = kf_step(b, y, p.system);
    REQUIRE((b.mean - m).cwiseAbs().maxCoeff() < 1e-10);
    REQUIRE((b.covariance - cov).cwiseAbs().maxCoeff() < 1e-10);
  }
}

TEST_CASE("EKF and UKF reduce to the KF on a linear Gaussian system") {
  const auto p = vehicle_problem();
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto a = testing::linear_agreement(p, testing::record(p, 100, seed));
    CHECK(a.ekf <= 1e-12);
    CHECK(a.ukf <= 1e-8);
  }
}

TEST_CASE("particle filter posterior mean lies within three standard errors of the KF") {
  const auto p = vehicle_problem();
  const auto a = testing::particle_agreement(p, testing::record(p, 100, 23), 10000, 10, 99);
  CAPTURE(a.z().transpose());
  CHECK(a.within(3.0));
}

TEST_CASE("unscented weights sum to one") {
  for (int n : {1, 2, 4}) {
    const auto [wm, wc] = unscented_weights(n, {});
    CHECK(wm.size() == 2 * n + 1);
    // Summation of weights near ±1e6 carries rounding proportional to their absolute sum.
    CHECK(std::abs(wm.sum() - 1.0) <= 1e-15 * wm.cwiseAbs().sum());
    CHECK(wm.tail(2 * n).isConstant(wm[1]));
  }
}

TEST_CASE("systematic resampling keeps dominant particles and returns N indices") {
  Rng rng(3);
  Eigen::VectorXd w(4);
  w << 0.0, 1.0, 0.0, 0.0;
  const auto idx = systematic_resample(w, rng);
  CHECK(idx.size() == 4);
  for (auto i : idx) CHECK(i == 1);
  Eigen::VectorXd u = Eigen::VectorXd::Constant(1000, 1e-3);
  const auto all = systematic_resample(u, rng);
  std::vector<int> seen(1000, 0);
  for (auto i : all) ++seen[static_cast<std::size_t>(i)];
  for (int s : seen) CHECK(s == 1);
}

TEST_CASE("particle weights stay normalised") {
  const auto p = pendulum_problem();
  Rng rng(4);
  auto b = make_particle_belief({Eigen::Vector2d(0.2, 0.1), p.initial_covariance}, 500, rng);
  for (int k = 0; k < 20; ++k) {
    b = pf_step(b, Eigen::VectorXd::Constant(1, 0.1), p.system, rng);
    REQUIRE(b.weights.sum() == doctest::Approx(1.0).epsilon(1e-12));
    REQUIRE((b.weights.array() >= 0).all());
  }
}

TEST_CASE("particle filter survives a measurement that no particle explains") {
  const auto p = pendulum_problem();
  Rng rng(5);
  auto b = make_particle_belief({Eigen::Vector2d(0.0, 0.0), 1e-6 * Eigen::Matrix2d::Identity()}, 100, rng);
  b = pf_step(b, Eigen::VectorXd::Constant(1, 50.0), p.system, rng);
  CHECK(b.weights.allFinite());
  CHECK(b.mean().allFinite());
}

TEST_CASE("EKF tracks the pendulum from a nearby start") {
  auto p = pendulum_problem();
  Rng rng(6);
  Eigen::VectorXd x = Eigen::Vector2d(0.3, 0.0);
  GaussianBelief b{Eigen::Vector2d(0.35, 0.05), 0.01 * Eigen::Matrix2d::Identity()};
  for (int k = 0; k < 50; ++k) {
    const auto s = step(p.system, x, rng);
    x = s.state;
    b = ekf_step(b, s.measurement, p.system);
  }
  CHECK((x - b.mean).norm() < 0.5);
}

TEST_CASE("filters reject mismatched dimensions") {
  const auto p = vehicle_problem();
  GaussianBelief b{Eigen::VectorXd::Zero(3), Eigen::MatrixXd::Identity(3, 3)};
  CHECK_THROWS_AS(kf_step(b, Eigen::VectorXd::Zero(1), p.system), ConfigError);
  GaussianBelief ok{Eigen::VectorXd::Zero(2), Eigen::MatrixXd::Identity(2, 2)};
  CHECK_THROWS_AS(ekf_step(ok, Eigen::VectorXd::Zero(2), p.system), ConfigError);
}

TEST_CASE("covariances remain symmetric positive semidefinite") {
  const auto p = pendulum_problem();
  const auto rec = testing::record(p, 100, 8);
  GaussianBelief e{rec.initial_estimate, p.initial_covariance}, u = e;
  for (const auto& y : rec.measurements) {
    e = ekf_step(e, y, p.system);
    u = ukf_step(u, y, p.system);
    for (const auto* b : {&e, &u}) {
      REQUIRE((b->covariance - b->covariance.transpose()).norm() == 0.0);
      REQUIRE(Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(b->covariance).eigenvalues().minCoeff() > -1e-12);
    }
  }
}
