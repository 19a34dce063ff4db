#pragma once

// Independent reference computations used only by the tests. Nothing here
// calls into the library's numerical kernels.

#include <Eigen/Dense>
#include <cmath>
#include <random>
#include <utility>

#include "wfp/model.hpp"

namespace oracle {

using Eigen::MatrixXd;
using Eigen::VectorXd;

inline MatrixXd blocks(int d, double a, double b, double c) {
  MatrixXd m = MatrixXd::Zero(2 * d, 2 * d);
  for (int j = 0; j < d; ++j) {
    m(j, j) = a;
    m(j, d + j) = m(d + j, j) = b;
    m(d + j, d + j) = c;
  }
  return m;
}

/// Hessian straight from the defining Q formulas (DQQ or DPQ cross term).
inline MatrixXd hessian(int d, double w, double g, double dqq, double dpq, double dpp,
                        bool dpq_convention = false) {
  const double q11 = dpp + w * w * dqq;
  const double q12 = 2.0 * w * g * (dpq_convention ? dpq : dqq);
  const double q22 = q11 + 4.0 * g * (dpq + g * dqq);
  const double q = q11 * q22 - q12 * q12;
  return (g / q) * blocks(d, q11 * w * w, q12 * w, q22);
}

inline VectorXd spectrum(const MatrixXd& m) {
  return Eigen::SelfAdjointEigenSolver<MatrixXd>(m).eigenvalues();
}

/// Drift of dz = M z dt + noise for the oscillator with friction g.
inline MatrixXd drift(int d, double w, double g) {
  MatrixXd m = MatrixXd::Zero(2 * d, 2 * d);
  for (int j = 0; j < d; ++j) {
    m(j, d + j) = 1.0;
    m(d + j, j) = -w * w;
    m(d + j, d + j) = -g;
  }
  return m;
}

/// Solves M S + S M^T + N = 0 by vectorisation (column-major vec).
inline MatrixXd lyapunov(const MatrixXd& m, const MatrixXd& n) {
  const long k = m.rows();
  MatrixXd big = MatrixXd::Zero(k * k, k * k);
  for (long a = 0; a < k; ++a)
    for (long b = 0; b < k; ++b)
      for (long c = 0; c < k; ++c) {
        big(b * k + a, b * k + c) += m(a, c);  // (M S)_ab = M_ac S_cb
        big(b * k + a, c * k + a) += m(b, c);  // (S M^T)_ab = S_ac M_bc
      }
  const MatrixXd rhs = -n;
  VectorXd s = big.fullPivLu().solve(Eigen::Map<const VectorXd>(rhs.data(), k * k));
  MatrixXd out = Eigen::Map<MatrixXd>(s.data(), k, k);
  return 0.5 * (out + out.transpose());
}

/// Classical RK4 on dm = M m, dS = M S + S M^T + N.
inline std::pair<VectorXd, MatrixXd> rk4_moments(const MatrixXd& m, const MatrixXd& n,
                                                 VectorXd mean, MatrixXd cov, double t,
                                                 int steps) {
  const double h = t / steps;
  auto fs = [&](const MatrixXd& s) -> MatrixXd { return m * s + s * m.transpose() + n; };
  for (int k = 0; k < steps; ++k) {
    VectorXd a1 = m * mean, a2 = m * (mean + 0.5 * h * a1), a3 = m * (mean + 0.5 * h * a2),
             a4 = m * (mean + h * a3);
    mean += (h / 6.0) * (a1 + 2 * a2 + 2 * a3 + a4);
    MatrixXd b1 = fs(cov), b2 = fs(cov + 0.5 * h * b1), b3 = fs(cov + 0.5 * h * b2),
             b4 = fs(cov + h * b3);
    cov += (h / 6.0) * (b1 + 2 * b2 + 2 * b3 + b4);
  }
  return {mean, cov};
}

/// KL(N1 || N2) with explicit inverse and log-determinants.
inline double kl(const VectorXd& m1, const MatrixXd& s1, const VectorXd& m2, const MatrixXd& s2) {
  const MatrixXd inv2 = s2.inverse();
  const VectorXd dm = m2 - m1;
  const double k = static_cast<double>(m1.size());
  return 0.5 * ((inv2 * s1).trace() + dm.dot(inv2 * dm) - k +
                std::log(s2.determinant() / s1.determinant()));
}

inline double normal_pdf(double x, double mu, double var) {
  return std::exp(-0.5 * (x - mu) * (x - mu) / var) / std::sqrt(2.0 * M_PI * var);
}

inline double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

/// Composite Simpson on [a, b] with n (even) panels.
template <typename F>
double simpson(F&& f, double a, double b, int n) {
  const double h = (b - a) / n;
  double s = f(a) + f(b);
  for (int i = 1; i < n; ++i) s += (i % 2 ? 4.0 : 2.0) * f(a + i * h);
  return s * h / 3.0;
}

/// Random valid parameter sets whose Q is comfortably away from zero.
class ParamGen {
 public:
  explicit ParamGen(std::uint64_t seed) : rng_(seed) {}

  wfp::ModelParams next(int d = 1, bool unit_frequency = false) {
    std::uniform_real_distribution<double> w(0.2, 3.0), g(0.1, 3.0), diag(0.0, 2.0), corr(-1.0, 1.0);
    while (true) {
      const double omega0 = unit_frequency ? 1.0 : w(rng_);
      const double gamma = g(rng_);
      const double dqq = diag(rng_), dpp = diag(rng_);
      const double dpq = corr(rng_) * std::sqrt(dqq * dpp);
      const double q11 = dpp + omega0 * omega0 * dqq;
      const double q12 = 2.0 * omega0 * gamma * dqq;
      const double q22 = q11 + 4.0 * gamma * (dpq + gamma * dqq);
      const double q = q11 * q22 - q12 * q12;
      if (std::abs(q) < 1e-2 * std::max(std::abs(q11 * q22), q12 * q12) || q11 < 1e-3) continue;
      return wfp::ModelParams(d, omega0, gamma, wfp::DiffusionSpec{dqq, dpq, dpp});
    }
  }

  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }

 private:
  std::mt19937_64 rng_;
};

}  // namespace oracle
