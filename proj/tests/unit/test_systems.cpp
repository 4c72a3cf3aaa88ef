#include <doctest.h>

#include <cmath>
#include <numbers>

#include "lrlf/errors.hpp"
#include "lrlf/problem.hpp"
#include "lrlf/systems.hpp"

using namespace lrlf;
using std::numbers::pi;

namespace {

Eigen::VectorXd vec(std::initializer_list<double> v) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out[i++] = x;
  return out;
}

/// Largest relative deviation of the analytic Jacobian from central differences over random states in [-2, 2]^n.
double jacobian_error(const BatchMap& map, const JacobianMap& jac, int n, Rng& rng) {
  double worst = 0.0;
  for (int t = 0; t < 100; ++t) {
    Eigen::VectorXd x(n);
    for (int i = 0; i < n; ++i) x[i] = rng.uniform(-2.0, 2.0);
    const Eigen::MatrixXd a = jac(x);
    const double h = 1e-6;
    Eigen::MatrixXd fd(a.rows(), n);
    for (int i = 0; i < n; ++i) {
      Eigen::VectorXd up = x, down = x;
      up[i] += h;
      down[i] -= h;
      fd.col(i) = (map(up) - map(down)) / (2 * h);
    }
    worst = std::max(worst, (a - fd).norm() / std::max(1.0, fd.norm()));
  }
  return worst;
}

}  // namespace

TEST_CASE("pendulum rests at the origin without noise") {
  Rng rng(1);
  const auto s = step(noise_free(make_pendulum()), vec({0, 0}), rng);
  CHECK(s.state.isZero(0.0));
}

TEST_CASE("pendulum Euler step from a horizontal angle") {
  Rng rng(1);
  const auto s = step(noise_free(make_pendulum()), vec({pi / 2, 0}), rng);
  CHECK(s.state[0] == doctest::Approx(pi / 2).epsilon(1e-14));
  CHECK(s.state[1] == doctest::Approx(-0.981).epsilon(1e-14));
}

TEST_CASE("pendulum process covariance entries") {
  const auto q = pendulum_process_covariance(0.1, 0.01);
  CHECK(q(0, 0) == doctest::Approx(3.333333e-6).epsilon(1e-6));
  CHECK(q(0, 1) == doctest::Approx(5e-5).epsilon(1e-12));
  CHECK(q(1, 0) == doctest::Approx(5e-5).epsilon(1e-12));
  CHECK(q(1, 1) == doctest::Approx(1e-3).epsilon(1e-12));
  CHECK((make_pendulum().process_noise.covariance() - q).norm() < 1e-15);
}

TEST_CASE("pendulum measures the sine of the angle") {
  const auto p = make_pendulum();
  CHECK(p.measurement(vec({pi / 2, 7.0}))[0] == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(p.meas_noise.covariance()(0, 0) == doctest::Approx(0.01));
}

TEST_CASE("pendulum transition Jacobian at the origin") {
  Eigen::Matrix2d expected;
  expected << 1.0, 0.1, -0.981, 1.0;
  CHECK((make_pendulum().transition_jacobian(vec({0, 0})) - expected).norm() < 1e-14);
}

TEST_CASE("vehicle moves at constant speed") {
  Rng rng(1);
  const auto veh = noise_free(make_vehicle());
  const auto s = step(veh, vec({0, 10}), rng);
  CHECK(s.state == vec({10, 10}));
  const auto s2 = step(veh, vec({5, 2}), rng);
  CHECK(s2.state == vec({7, 2}));
  CHECK(s2.measurement[0] == 7.0);
}

TEST_CASE("vehicle process noise enters only the speed") {
  Eigen::Matrix2d expected = Eigen::Matrix2d::Zero();
  expected(1, 1) = 0.01;
  CHECK((make_vehicle().process_noise.covariance() - expected).norm() < 1e-15);
  CHECK(make_vehicle().meas_noise.covariance()(0, 0) == doctest::Approx(0.02));
}

TEST_CASE("vehicle Jacobians are constant") {
  const auto veh = make_vehicle();
  CHECK(veh.transition_jacobian(vec({1, 2})) == veh.transition_jacobian(vec({-30, 4})));
  CHECK(veh.measurement_jacobian(vec({1, 2})) == veh.measurement_jacobian(vec({-30, 4})));
}

TEST_CASE("bearing tracker geometry") {
  const auto b = make_bearing_tracker();
  const auto y = b.measurement(vec({100, 0, 0, 0}));
  CHECK(y[0] == doctest::Approx(0.0));
  CHECK(y[1] == doctest::Approx(pi / 4).epsilon(1e-14));
  CHECK(b.measurement(vec({0, 100, 0, 0}))[0] == doctest::Approx(pi / 2).epsilon(1e-14));
  const auto deg = b.measurement(vec({0, 0, 3, 4}));
  CHECK(deg[0] == 0.0);
  CHECK(deg[1] == doctest::Approx(pi / 2).epsilon(1e-14));
  CHECK(b.transition(vec({98, 0, 0, 10})) == vec({98, 1, 0, 10}));
  CHECK(b.meas_noise.covariance()(0, 0) == 8.0);
  CHECK(b.meas_noise.covariance()(1, 1) == 0.002);
}

TEST_CASE("analytic Jacobians match finite differences at random states") {
  Rng rng(11);
  for (const auto& sys : {make_pendulum(), make_vehicle(), make_bearing_tracker()}) {
    CAPTURE(sys.name);
    CHECK(jacobian_error(sys.transition_map, sys.transition_jacobian_map, sys.state_dim, rng) < 1e-5);
    CHECK(jacobian_error(sys.measurement_map, sys.measurement_jacobian_map, sys.state_dim, rng) < 1e-5);
  }
}

TEST_CASE("finite-difference fallback is used when no Jacobian is supplied") {
  auto p = make_pendulum();
  const Eigen::MatrixXd analytic = p.transition_jacobian(vec({0.3, -0.2}));
  p.transition_jacobian_map = nullptr;
  CHECK((p.transition_jacobian(vec({0.3, -0.2})) - analytic).norm() < 1e-8);
}

TEST_CASE("step rejects a state of the wrong size") {
  Rng rng(1);
  CHECK_THROWS_AS(step(make_pendulum(), vec({1, 2, 3}), rng), ConfigError);
}

TEST_CASE("maps stay finite on large finite inputs") {
  for (const auto& sys : {make_pendulum(), make_vehicle(), make_bearing_tracker()}) {
    const Eigen::VectorXd x = Eigen::VectorXd::Constant(sys.state_dim, 1e6);
    CHECK(sys.transition(x).allFinite());
    CHECK(sys.measurement(x).allFinite());
  }
}

TEST_CASE("pendulum initial states follow the uniform ranges") {
  const auto p = pendulum_problem();
  Rng rng(8);
  for (int i = 0; i < 2000; ++i) {
    const auto [x, xh] = p.sample_initial(rng);
    REQUIRE(std::abs(x[0]) <= pi / 2);
    REQUIRE(std::abs(x[1]) <= pi / 2);
    REQUIRE(std::abs(xh[0] - x[0]) <= pi / 4);
    REQUIRE(std::abs(xh[1] - x[1]) <= pi / 4);
  }
}

TEST_CASE("problem lookup rejects unknown systems") {
  CHECK_THROWS_AS(make_problem("rocket"), ConfigError);
  for (const char* id : {"pendulum", "vehicle", "bearing"}) CHECK_NOTHROW(make_problem(id).system.validate());
}
