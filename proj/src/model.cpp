#include "wfp/model.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace wfp {

std::string_view to_string(Q12Convention c) {
  return c == Q12Convention::DQQ ? "DQQ" : "DPQ";
}
std::string_view to_string(NoiseConvention c) {
  return c == NoiseConvention::TWO_D ? "TWO_D" : "ONE_D";
}
std::string_view to_string(FrictionConvention c) {
  return c == FrictionConvention::GAMMA ? "GAMMA" : "TWO_GAMMA";
}

Q12Convention parse_q12_convention(std::string_view s) {
  if (s == "DQQ") return Q12Convention::DQQ;
  if (s == "DPQ") return Q12Convention::DPQ;
  throw Error(ErrorKind::ConfigError, "unknown q12 convention '" + std::string(s) + "'");
}
NoiseConvention parse_noise_convention(std::string_view s) {
  if (s == "TWO_D") return NoiseConvention::TWO_D;
  if (s == "ONE_D") return NoiseConvention::ONE_D;
  throw Error(ErrorKind::ConfigError, "unknown noise convention '" + std::string(s) + "'");
}
FrictionConvention parse_friction_convention(std::string_view s) {
  if (s == "GAMMA") return FrictionConvention::GAMMA;
  if (s == "TWO_GAMMA") return FrictionConvention::TWO_GAMMA;
  throw Error(ErrorKind::ConfigError, "unknown friction convention '" + std::string(s) + "'");
}

ModelParams::ModelParams(int d, double omega0, double gamma, DiffusionSpec diffusion,
                         Conventions conventions)
    : d_(d), omega0_(omega0), gamma_(gamma), diffusion_(diffusion), conventions_(conventions) {
  validate(true);
}

ModelParams::ModelParams(Unchecked, int d, double omega0, double gamma, DiffusionSpec diffusion,
                         Conventions conventions)
    : d_(d),
      omega0_(omega0),
      gamma_(gamma),
      diffusion_(diffusion),
      conventions_(conventions),
      formula_only_(true) {
  validate(false);
}

ModelParams ModelParams::formula_only(int d, double omega0, double gamma, DiffusionSpec diffusion,
                                      Conventions conventions) {
  return ModelParams(Unchecked{}, d, omega0, gamma, diffusion, conventions);
}

void ModelParams::validate(bool require_psd) const {
  if (d_ < 1) throw Error(ErrorKind::InvalidParams, "d must be >= 1, got " + std::to_string(d_));
  if (!(omega0_ > 0.0) || !std::isfinite(omega0_))
    throw Error(ErrorKind::InvalidParams, "omega0 must be finite and > 0");
  if (!(gamma_ > 0.0) || !std::isfinite(gamma_))
    throw Error(ErrorKind::InvalidParams, "gamma must be finite and > 0");
  const auto& D = diffusion_;
  if (!std::isfinite(D.dqq) || !std::isfinite(D.dpq) || !std::isfinite(D.dpp))
    throw Error(ErrorKind::InvalidParams, "diffusion entries must be finite");
  if (D.dqq < 0.0 || D.dpp < 0.0)
    throw Error(ErrorKind::InvalidParams, "Dqq and Dpp must be >= 0");
  if (require_psd && !diffusion_psd())
    throw Error(ErrorKind::InvalidParams, "diffusion matrix is not positive semidefinite");
}

bool ModelParams::diffusion_psd() const {
  // PSD up to rounding of the two products.
  const auto& D = diffusion_;
  const double scale = std::abs(D.dqq * D.dpp) + D.dpq * D.dpq;
  return D.determinant() >= -1e-12 * scale;
}

ModelParams ModelParams::rebuild(int d, double omega0, double gamma, DiffusionSpec diffusion,
                                 Conventions conventions) const {
  if (formula_only_) return formula_only(d, omega0, gamma, diffusion, conventions);
  return ModelParams(d, omega0, gamma, diffusion, conventions);
}

double ModelParams::effective_gamma() const {
  return conventions_.friction == FrictionConvention::TWO_GAMMA ? 2.0 * gamma_ : gamma_;
}

double ModelParams::noise_factor() const {
  return conventions_.noise == NoiseConvention::TWO_D ? 2.0 : 1.0;
}

ModelParams ModelParams::with_dimension(int d) const {
  return rebuild(d, omega0_, gamma_, diffusion_, conventions_);
}
ModelParams ModelParams::with_omega0(double omega0) const {
  return rebuild(d_, omega0, gamma_, diffusion_, conventions_);
}
ModelParams ModelParams::with_gamma(double gamma) const {
  return rebuild(d_, omega0_, gamma, diffusion_, conventions_);
}
ModelParams ModelParams::with_diffusion(DiffusionSpec diffusion) const {
  return rebuild(d_, omega0_, gamma_, diffusion, conventions_);
}
ModelParams ModelParams::with_conventions(Conventions conventions) const {
  return rebuild(d_, omega0_, gamma_, diffusion_, conventions);
}

Matrix block_isotropic(int d, double a, double b, double c) {
  Matrix m = Matrix::Zero(2 * d, 2 * d);
  for (int j = 0; j < d; ++j) {
    m(j, j) = a;
    m(j, d + j) = b;
    m(d + j, j) = b;
    m(d + j, d + j) = c;
  }
  return m;
}

Matrix build_diffusion_matrix(const ModelParams& params) {
  const auto& D = params.diffusion();
  return block_isotropic(params.d(), D.dqq, D.dpq, D.dpp);
}

LindbladCheck check_lindblad(const ModelParams& params) {
  const double half_gamma = params.gamma() / 2.0;
  const double margin = params.diffusion().determinant() - half_gamma * half_gamma;
  return {margin >= 0.0, margin};
}

QCoefficients q_coefficients(const ModelParams& params) {
  const auto& D = params.diffusion();
  const double w = params.omega0();
  const double g = params.gamma();

  QCoefficients c{};
  c.q11 = D.dpp + w * w * D.dqq;
  const double cross = params.conventions().q12 == Q12Convention::DQQ ? D.dqq : D.dpq;
  c.q12 = 2.0 * w * g * cross;
  c.q22 = c.q11 + 4.0 * g * (D.dpq + g * D.dqq);
  c.q = c.q11 * c.q22 - c.q12 * c.q12;

  const double scale = std::max(std::abs(c.q11 * c.q22), c.q12 * c.q12);
  if (scale == 0.0 || std::abs(c.q) <= 1e-13 * scale)
    throw Error(ErrorKind::DegenerateQ, "Q = Q11*Q22 - Q12^2 vanishes");
  return c;
}

}  // namespace wfp
