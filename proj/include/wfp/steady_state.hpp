#pragma once

#include <cstdint>
#include <optional>

#include "wfp/linalg.hpp"
#include "wfp/model.hpp"

namespace wfp {

struct Ensemble;

/// Per-pair covariance block (cxx, cxp, cpp), identical for every j.
struct BlockCov {
  double cxx = 0.0;
  double cxp = 0.0;
  double cpp = 0.0;

  Matrix expand(int d) const { return block_isotropic(d, cxx, cxp, cpp); }
};

/// Phase-space Gaussian, coordinates ordered x_1..x_d, p_1..p_d.
class GaussianState {
 public:
  /// Validates symmetry (1e-12) and PSD (eigenvalues >= -1e-12).
  GaussianState(Vector mean, Matrix cov);

  static GaussianState from_block(int d, const Vector& mean, const BlockCov& block);
  static GaussianState centered_block(int d, const BlockCov& block);

  int phase_dim() const { return static_cast<int>(mean_.size()); }
  const Vector& mean() const { return mean_; }
  const Matrix& cov() const { return cov_; }
  const std::optional<BlockCov>& block_form() const { return block_; }

 private:
  GaussianState(Vector mean, Matrix cov, std::optional<BlockCov> block);

  Vector mean_;
  Matrix cov_;
  std::optional<BlockCov> block_;
};

enum class ExponentProvenance { PAPER_A, LYAPUNOV };

/// A(z) = z^T S z.
struct ExponentForm {
  Matrix S;
  ExponentProvenance provenance;
};

/// S = hessian_matrix(params), the exponent of w_inf ~ exp(-A).
ExponentForm closed_form_exponent(const ModelParams& params);

double quadratic_form_A(const ModelParams& params, const Vector& z);

/// Stationary block of M Sigma + Sigma M^T + k D = 0 with
/// M = [[0, 1], [-omega0^2, -gamma_eff]]; no definiteness check.
BlockCov stationary_block(double omega0, double friction, double nqq, double npq, double npp);
BlockCov stationary_block(const ModelParams& params);

/// Lyapunov steady state of the Langevin dynamics (mean zero, block form).
/// Throws Error(NotStationary) when Sigma is not positive definite.
GaussianState steady_covariance_lyapunov(const ModelParams& params);

/// Drift matrix [[0, I], [-omega0^2 I, -gamma_eff I]].
Matrix drift_matrix(const ModelParams& params);

/// || M Sigma + Sigma M^T + k D ||_inf (max abs entry).
double lyapunov_residual(const ModelParams& params, const Matrix& sigma);

struct ReconciliationReport {
  Conventions conventions;
  Matrix sigma_a;          // (2 S_closed_form)^{-1}
  Matrix sigma_l;          // Lyapunov stationary covariance
  Matrix ratio;            // sigma_a * sigma_l^{-1}
  double scalar_fit;       // tr(ratio) / 2d
  double scalar_deviation; // max |ratio - scalar_fit I|
  Matrix entrywise_ratio;  // sigma_a(i,j) / sigma_l(i,j), NaN where sigma_l(i,j) = 0
  ExponentForm lyapunov_exponent;  // S_L = (2 sigma_l)^{-1}
};

ReconciliationReport reconcile_steady_states(const ModelParams& params);

/// n i.i.d. draws through the symmetric square root of cov, keyed by
/// (seed, sample index) so the draw does not depend on evaluation order.
Ensemble sample_steady(const GaussianState& state, std::int64_t n, std::uint64_t seed,
                       int workers = 1);

double gaussian_kl(const GaussianState& g1, const GaussianState& g2);

/// || phi_1 - phi_2 ||_{L^2} between the two normalised densities.
double gaussian_l2_distance(const GaussianState& g1, const GaussianState& g2);

}  // namespace wfp
