#include "wfp/steady_state.hpp"

#include <Eigen/Cholesky>
#include <Eigen/LU>
#include <cmath>
#include <limits>
#include <numbers>

#include "wfp/dynamics.hpp"
#include "wfp/parallel.hpp"
#include "wfp/philox.hpp"
#include "wfp/spectral.hpp"

namespace wfp {

GaussianState::GaussianState(Vector mean, Matrix cov) : GaussianState(std::move(mean), std::move(cov), std::nullopt) {}

GaussianState::GaussianState(Vector mean, Matrix cov, std::optional<BlockCov> block)
    : mean_(std::move(mean)), cov_(std::move(cov)), block_(block) {
  if (cov_.rows() != mean_.size() || cov_.cols() != mean_.size())
    throw Error(ErrorKind::DimensionMismatch, "covariance shape does not match mean");
  if (asymmetry(cov_) > 1e-12) throw Error(ErrorKind::NotSymmetric, "covariance is not symmetric");
  cov_ = 0.5 * (cov_ + cov_.transpose()).eval();
  if (cov_.size() > 0) {
    const auto spectrum = dense_spectrum_oracle(cov_);
    const double scale = std::max(1.0, cov_.cwiseAbs().maxCoeff());
    if (spectrum.front() < -1e-12 * scale)
      throw Error(ErrorKind::NotPSD,
                  "covariance has negative eigenvalue " + std::to_string(spectrum.front()));
  }
}

GaussianState GaussianState::from_block(int d, const Vector& mean, const BlockCov& block) {
  if (mean.size() != 2 * d) throw Error(ErrorKind::DimensionMismatch, "mean must have length 2d");
  return GaussianState(mean, block.expand(d), block);
}

GaussianState GaussianState::centered_block(int d, const BlockCov& block) {
  return from_block(d, Vector::Zero(2 * d), block);
}

ExponentForm closed_form_exponent(const ModelParams& params) {
  return {hessian_matrix(params), ExponentProvenance::PAPER_A};
}

double quadratic_form_A(const ModelParams& params, const Vector& z) {
  const int d = params.d();
  if (z.size() != 2 * d)
    throw Error(ErrorKind::DimensionMismatch, "phase-space vector must have length 2d");
  const auto c = q_coefficients(params);
  const double w = params.omega0();
  const auto x = z.head(d);
  const auto p = z.tail(d);
  return params.gamma() / c.q *
         (c.q11 * w * w * x.squaredNorm() + 2.0 * c.q12 * w * x.dot(p) + c.q22 * p.squaredNorm());
}

BlockCov stationary_block(double omega0, double friction, double nqq, double npq, double npp) {
  // Entries (1,1), (2,2), (1,2) of M S + S M^T + N = 0, solved in that order.
  const double w2 = omega0 * omega0;
  BlockCov s;
  s.cxp = -nqq / 2.0;
  s.cpp = (npp + w2 * nqq) / (2.0 * friction);
  s.cxx = (s.cpp + friction * nqq / 2.0 + npq) / w2;
  return s;
}

BlockCov stationary_block(const ModelParams& params) {
  const double k = params.noise_factor();
  const auto& D = params.diffusion();
  return stationary_block(params.omega0(), params.effective_gamma(), k * D.dqq, k * D.dpq,
                          k * D.dpp);
}

namespace {

double min_eigenvalue_2x2(const BlockCov& s) {
  return 0.5 * (s.cxx + s.cpp) - std::hypot(0.5 * (s.cxx - s.cpp), s.cxp);
}

}  // namespace

GaussianState steady_covariance_lyapunov(const ModelParams& params) {
  const BlockCov s = stationary_block(params);
  const double lam = min_eigenvalue_2x2(s);
  const double scale = std::max({1.0, std::abs(s.cxx), std::abs(s.cpp)});
  if (!(lam > 1e-12 * scale))
    throw Error(ErrorKind::NotStationary,
                "stationary covariance not positive definite (min eigenvalue " +
                    std::to_string(lam) + ")");
  return GaussianState::centered_block(params.d(), s);
}

Matrix drift_matrix(const ModelParams& params) {
  const double w = params.omega0();
  const int d = params.d();
  Matrix m = Matrix::Zero(2 * d, 2 * d);
  for (int j = 0; j < d; ++j) {
    m(j, d + j) = 1.0;
    m(d + j, j) = -w * w;
    m(d + j, d + j) = -params.effective_gamma();
  }
  return m;
}

double lyapunov_residual(const ModelParams& params, const Matrix& sigma) {
  const Matrix m = drift_matrix(params);
  const Matrix r =
      m * sigma + sigma * m.transpose() + params.noise_factor() * build_diffusion_matrix(params);
  return r.cwiseAbs().maxCoeff();
}

ReconciliationReport reconcile_steady_states(const ModelParams& params) {
  Matrix s_closed;
  try {
    s_closed = closed_form_exponent(params).S;
  } catch (const Error& e) {
    throw Error(ErrorKind::SingularCovariance, std::string("closed-form exponent undefined: ") + e.what());
  }
  Eigen::FullPivLU<Matrix> lu_a(2.0 * s_closed);
  if (!lu_a.isInvertible())
    throw Error(ErrorKind::SingularCovariance, "closed-form exponent matrix is singular");

  const BlockCov block = stationary_block(params);
  const Matrix sigma_l = block.expand(params.d());
  Eigen::FullPivLU<Matrix> lu_l(sigma_l);
  if (!lu_l.isInvertible() || min_eigenvalue_2x2(block) == 0.0)
    throw Error(ErrorKind::SingularCovariance, "Lyapunov covariance is singular");

  ReconciliationReport rep;
  rep.conventions = params.conventions();
  rep.sigma_a = lu_a.inverse();
  rep.sigma_l = sigma_l;
  const Matrix sigma_l_inv = lu_l.inverse();
  rep.ratio = rep.sigma_a * sigma_l_inv;
  const auto n = rep.ratio.rows();
  rep.scalar_fit = rep.ratio.trace() / static_cast<double>(n);
  rep.scalar_deviation =
      (rep.ratio - rep.scalar_fit * Matrix::Identity(n, n)).cwiseAbs().maxCoeff();
  rep.entrywise_ratio = Matrix(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      rep.entrywise_ratio(i, j) = rep.sigma_l(i, j) != 0.0
                                      ? rep.sigma_a(i, j) / rep.sigma_l(i, j)
                                      : std::numeric_limits<double>::quiet_NaN();
  rep.lyapunov_exponent = {0.5 * sigma_l_inv, ExponentProvenance::LYAPUNOV};
  return rep;
}

Ensemble sample_steady(const GaussianState& state, std::int64_t n, std::uint64_t seed, int workers) {
  if (n < 1) throw Error(ErrorKind::NonPositiveInput, "sample count must be >= 1");
  const Matrix factor = symmetric_sqrt_psd(state.cov());
  const int width = state.phase_dim();
  const Vector& mean = state.mean();

  Ensemble ens;
  ens.width = width;
  ens.particles.resize(static_cast<size_t>(n * width));
  ens.seed = seed;
  const Philox4x32 gen(seed);

  for_each_chunk(n, workers, [&](std::int64_t, std::int64_t begin, std::int64_t end) {
    Vector z(width);
    for (std::int64_t i = begin; i < end; ++i) {
      for (int k = 0; k < width; k += 4) {
        const auto g = normals4(gen, static_cast<std::uint32_t>(i),
                                static_cast<std::uint32_t>(i >> 32),
                                static_cast<std::uint32_t>(k / 4), Stream::Sample);
        for (int r = 0; r < 4 && k + r < width; ++r) z(k + r) = g[static_cast<size_t>(r)];
      }
      auto out = ens.row(i);
      for (int a = 0; a < width; ++a) out[static_cast<size_t>(a)] = mean(a) + factor.row(a).dot(z);
    }
  });
  return ens;
}

namespace {

void require_same_dim(const GaussianState& a, const GaussianState& b) {
  if (a.phase_dim() != b.phase_dim())
    throw Error(ErrorKind::DimensionMismatch, "Gaussian states have different dimensions");
}

// log det via Cholesky; nullopt when not positive definite.
std::optional<double> log_det_pd(const Eigen::LLT<Matrix>& llt) {
  if (llt.info() != Eigen::Success) return std::nullopt;
  const auto diag = llt.matrixLLT().diagonal();
  double acc = 0.0;
  for (Eigen::Index i = 0; i < diag.size(); ++i) {
    if (!(diag(i) > 0.0)) return std::nullopt;
    acc += 2.0 * std::log(diag(i));
  }
  return acc;
}

// log of the Gaussian product integral  int phi_a phi_b  = N(m_a; m_b, S_a + S_b).
double log_overlap(const GaussianState& a, const GaussianState& b) {
  const Matrix sum = a.cov() + b.cov();
  Eigen::LLT<Matrix> llt(sum);
  const auto ld = log_det_pd(llt);
  if (!ld) throw Error(ErrorKind::SingularCovariance, "covariance sum is singular");
  const Vector delta = a.mean() - b.mean();
  const double quad = delta.dot(llt.solve(delta));
  const double n = static_cast<double>(a.phase_dim());
  return -0.5 * (n * std::log(2.0 * std::numbers::pi) + *ld + quad);
}

}  // namespace

double gaussian_kl(const GaussianState& g1, const GaussianState& g2) {
  require_same_dim(g1, g2);
  Eigen::LLT<Matrix> llt2(g2.cov());
  const auto ld2 = log_det_pd(llt2);
  if (!ld2) throw Error(ErrorKind::SingularCovariance, "reference covariance is singular");
  Eigen::LLT<Matrix> llt1(g1.cov());
  const auto ld1 = log_det_pd(llt1);
  if (!ld1) return std::numeric_limits<double>::infinity();

  const double n = static_cast<double>(g1.phase_dim());
  const double trace = llt2.solve(g1.cov()).trace();
  const Vector delta = g2.mean() - g1.mean();
  const double quad = delta.dot(llt2.solve(delta));
  return std::max(0.0, 0.5 * (trace - n + quad + *ld2 - *ld1));
}

double gaussian_l2_distance(const GaussianState& g1, const GaussianState& g2) {
  require_same_dim(g1, g2);
  Eigen::LLT<Matrix> c1(g1.cov());
  Eigen::LLT<Matrix> c2(g2.cov());
  if (!log_det_pd(c1) || !log_det_pd(c2))
    throw Error(ErrorKind::SingularCovariance, "L2 distance needs nonsingular covariances");
  const double i11 = std::exp(log_overlap(g1, g1));
  const double i22 = std::exp(log_overlap(g2, g2));
  const double i12 = std::exp(log_overlap(g1, g2));
  return std::sqrt(std::max(0.0, i11 + i22 - 2.0 * i12));
}

}  // namespace wfp
