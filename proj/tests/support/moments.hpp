#pragma once

#include <cmath>
#include <functional>
#include <numbers>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "lrlf/noise.hpp"
#include "lrlf/systems.hpp"

namespace lrlf::testing {

/// A noise law together with moments computed independently of the library.
struct NoiseCase {
  std::string name;
  NoiseSpec spec;
  Eigen::VectorXd mean;
  Eigen::MatrixXd covariance;
  Eigen::VectorXd lower;  // support box; ±inf when unbounded
  Eigen::VectorXd upper;
};

/// Composite Simpson rule on [a, b] with n (even) panels.
inline double simpson(const std::function<double(double)>& f, double a, double b, int n = 20000) {
  const double h = (b - a) / n;
  double s = f(a) + f(b);
  for (int i = 1; i < n; ++i) s += (i % 2 ? 4.0 : 2.0) * f(a + i * h);
  return s * h / 3.0;
}

/// Mean and variance of N(mu, var) restricted to [lo, hi], by quadrature of the density.
inline std::pair<double, double> truncated_normal_moments(double mu, double var, double lo, double hi) {
  const double sd = std::sqrt(var);
  auto pdf = [&](double x) { return std::exp(-0.5 * (x - mu) * (x - mu) / var); };
  const double a = std::max(lo, mu - 12 * sd), b = std::min(hi, mu + 12 * sd);
  const double z = simpson(pdf, a, b);
  const double m = simpson([&](double x) { return x * pdf(x); }, a, b) / z;
  const double m2 = simpson([&](double x) { return (x - m) * (x - m) * pdf(x); }, a, b) / z;
  return {m, m2};
}

inline Eigen::VectorXd unbounded(Eigen::Index n, double sign) {
  return Eigen::VectorXd::Constant(n, sign * std::numeric_limits<double>::infinity());
}

inline NoiseCase gaussian_case(std::string name, const Eigen::MatrixXd& cov) {
  const auto n = cov.rows();
  return {std::move(name), NoiseSpec::gaussian(Eigen::VectorXd::Zero(n), cov), Eigen::VectorXd::Zero(n), cov,
          unbounded(n, -1), unbounded(n, 1)};
}

/// Every noise law used by the benchmark systems and scenarios.
inline std::vector<NoiseCase> noise_catalogue() {
  std::vector<NoiseCase> out;
  // Pendulum process noise written out from its entries (dt = 0.1, q = 0.01).
  Eigen::Matrix2d pend;
  pend << 1e-3 * 0.01 / 3.0, 1e-2 * 0.01 / 2.0, 1e-2 * 0.01 / 2.0, 0.1 * 0.01;
  out.push_back(gaussian_case("pendulum_process", pend));
  out.push_back(gaussian_case("pendulum_measurement", Eigen::MatrixXd::Constant(1, 1, 0.01)));
  out.push_back(gaussian_case("pendulum_measurement_r0.1", Eigen::MatrixXd::Constant(1, 1, 0.1)));
  Eigen::Matrix2d veh = Eigen::Matrix2d::Zero();
  veh(1, 1) = 0.01;
  out.push_back(gaussian_case("vehicle_process", veh));
  out.push_back(gaussian_case("vehicle_measurement", Eigen::MatrixXd::Constant(1, 1, 0.02)));
  Eigen::Matrix2d bm = Eigen::Matrix2d::Zero();
  bm.diagonal() << 8.0, 0.002;
  out.push_back(gaussian_case("bearing_measurement", bm));
  {
    // White-noise acceleration with T = 0.1, Q = I: blocks [T⁴/4, T³/2; T³/2, T²] per axis.
    const double t = 0.1;
    Eigen::Matrix4d q = Eigen::Matrix4d::Zero();
    for (int a = 0; a < 2; ++a) {
      q(a, a) = std::pow(t, 4) / 4.0;
      q(a, a + 2) = q(a + 2, a) = std::pow(t, 3) / 2.0;
      q(a + 2, a + 2) = t * t;
    }
    out.push_back(gaussian_case("bearing_process", q));
  }
  {
    const auto [m, v] = truncated_normal_moments(0.0, 0.01, 0.0, 1.0);
    out.push_back({"truncated_gaussian", NoiseSpec::truncated_gaussian(0.0, 0.01, 0.0, 1.0), Eigen::VectorXd::Constant(1, m),
                   Eigen::MatrixXd::Constant(1, 1, v), Eigen::VectorXd::Zero(1), Eigen::VectorXd::Ones(1)});
  }
  {
    const auto [m, v] = truncated_normal_moments(0.3, 0.5, -1.0, 0.5);
    out.push_back({"truncated_gaussian_offset", NoiseSpec::truncated_gaussian(0.3, 0.5, -1.0, 0.5),
                   Eigen::VectorXd::Constant(1, m), Eigen::MatrixXd::Constant(1, 1, v), Eigen::VectorXd::Constant(1, -1.0),
                   Eigen::VectorXd::Constant(1, 0.5)});
  }
  out.push_back({"uniform", NoiseSpec::uniform(Eigen::VectorXd::Constant(1, -0.3), Eigen::VectorXd::Constant(1, 0.3)),
                 Eigen::VectorXd::Zero(1), Eigen::MatrixXd::Constant(1, 1, 0.6 * 0.6 / 12.0), Eigen::VectorXd::Constant(1, -0.3),
                 Eigen::VectorXd::Constant(1, 0.3)});
  out.push_back({"exponential", NoiseSpec::exponential(0.04), Eigen::VectorXd::Constant(1, 25.0),
                 Eigen::MatrixXd::Constant(1, 1, 625.0), Eigen::VectorXd::Zero(1), unbounded(1, 1)});
  out.push_back({"zero", NoiseSpec::zero(2), Eigen::VectorXd::Zero(2), Eigen::MatrixXd::Zero(2, 2), Eigen::VectorXd::Zero(2),
                 Eigen::VectorXd::Zero(2)});
  return out;
}

struct MomentCheck {
  std::string what;
  double observed = 0.0;
  double expected = 0.0;
  double se = 0.0;
  bool ok() const { return std::abs(observed - expected) <= 3.0 * se + 1e-15; }
};

struct SamplerReport {
  std::vector<MomentCheck> moments;
  bool support_ok = true;
  bool ok() const {
    if (!support_ok) return false;
    for (const auto& m : moments)
      if (!m.ok()) return false;
    return true;
  }
};

/// Draws `n` samples and compares sample mean and covariance with the oracle, each within 3 standard errors
/// estimated from the same draws; also checks every draw against the support box.
inline SamplerReport check_sampler(const NoiseCase& c, long n, Rng& rng) {
  const auto d = c.spec.dim();
  Eigen::MatrixXd x(d, n);
  c.spec.sample_into(rng, x);
  SamplerReport r;
  for (long j = 0; j < n; ++j)
    if (((x.col(j).array() < c.lower.array()) || (x.col(j).array() > c.upper.array())).any()) r.support_ok = false;
  const double nn = static_cast<double>(n);
  const Eigen::VectorXd mean = x.rowwise().mean();
  const Eigen::MatrixXd centred = x.colwise() - mean;
  for (Eigen::Index i = 0; i < d; ++i) {
    const double sd = std::sqrt(centred.row(i).squaredNorm() / (nn - 1));
    r.moments.push_back({c.name + " mean[" + std::to_string(i) + "]", mean[i], c.mean[i], sd / std::sqrt(nn)});
  }
  for (Eigen::Index i = 0; i < d; ++i)
    for (Eigen::Index k = i; k < d; ++k) {
      const Eigen::ArrayXd prod = (centred.row(i).array() * centred.row(k).array()).transpose();
      const double cov = prod.sum() / (nn - 1);
      const double se = std::sqrt((prod - prod.mean()).square().sum() / (nn - 1) / nn);
      r.moments.push_back({c.name + " cov[" + std::to_string(i) + "," + std::to_string(k) + "]", cov, c.covariance(i, k), se});
    }
  return r;
}

}  // namespace lrlf::testing
