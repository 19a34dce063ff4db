#include "wfp/spectral.hpp"

#include <algorithm>
#include <cmath>

namespace wfp {

std::string_view to_string(CaseTag tag) {
  switch (tag) {
    case CaseTag::GENERAL_D1: return "GENERAL_D1";
    case CaseTag::UNIT_FREQUENCY: return "UNIT_FREQUENCY";
    case CaseTag::CALDEIRA_LEGGETT: return "CALDEIRA_LEGGETT";
    case CaseTag::EQUAL_Q: return "EQUAL_Q";
    case CaseTag::RESCALED_GENERAL: return "RESCALED_GENERAL";
    case CaseTag::PERTURBATIVE: return "PERTURBATIVE";
  }
  return "Unknown";
}

namespace {

SpectralResult make_result(double plus, double minus, CaseTag tag, bool preserving) {
  SpectralResult r;
  r.lambda_plus = plus;
  r.lambda_minus = minus;
  r.kappa = std::min(plus, minus);
  r.case_tag = tag;
  r.spectrum_preserving = preserving;
  return r;
}

void require_unit_frequency(const ModelParams& params, std::string_view what) {
  if (params.omega0() != 1.0)
    throw Error(ErrorKind::ConstraintViolated, std::string(what) + " requires omega0 = 1");
}

}  // namespace

Matrix hessian_matrix(const ModelParams& params) {
  const auto c = q_coefficients(params);
  const double w = params.omega0();
  const double s = params.gamma() / c.q;
  return block_isotropic(params.d(), s * c.q11 * w * w, s * c.q12 * w, s * c.q22);
}

SpectralResult eigenvalues_d1(const ModelParams& params) {
  const auto c = q_coefficients(params);
  const double w = params.omega0();
  const double g = params.gamma();
  const double mean = g * (c.q11 * w * w + c.q22) / (2.0 * c.q);
  const double half_gap = g * (c.q11 * w * w - c.q22) / (2.0 * c.q);
  const double cross = g * w * c.q12 / c.q;
  const double root = std::hypot(half_gap, cross);
  return make_result(mean + root, mean - root, CaseTag::GENERAL_D1, true);
}

SpectralResult kappa_unit_frequency(const ModelParams& params) {
  require_unit_frequency(params, "kappa_unit_frequency");
  const auto c = q_coefficients(params);
  const auto& D = params.diffusion();
  const double g = params.gamma();
  const double shift = D.dpq + g * D.dqq;
  const double sign_q = c.q > 0.0 ? 1.0 : -1.0;
  const double base = sign_q * (c.q11 + 2.0 * g * shift);
  const double root = 2.0 * g * std::hypot(shift, D.dqq);
  const double pre = g / std::abs(c.q);
  // sign(Q) flips which branch is larger; "+" stays the +root branch of
  // gamma*(Q11 + 2 gamma shift)/Q.
  return make_result(pre * (base + root), pre * (base - root), CaseTag::UNIT_FREQUENCY, true);
}

SpectralResult kappa_caldeira_leggett(const ModelParams& params) {
  const auto& D = params.diffusion();
  if (D.dqq != 0.0)
    throw Error(ErrorKind::ConstraintViolated, "Caldeira-Leggett case requires Dqq = 0");
  if (D.dpp == 0.0)
    throw Error(ErrorKind::TrivialCase, "Dpp = 0 gives vanishing rates");
  const auto c = q_coefficients(params);
  if (c.q12 != 0.0)
    throw Error(ErrorKind::ConstraintViolated,
                "Caldeira-Leggett case requires Q12 = 0 under the active convention");
  const double g = params.gamma();
  const double w = params.omega0();
  const double lambda1 = g * w * w * D.dpp / c.q;
  // Dpp^2 + 4 gamma Dpq Dpp, factored exactly as Q is formed so the ratio is 1.
  const double momentum_block = D.dpp * (D.dpp + 4.0 * g * D.dpq);
  const double lambda2 = g * (momentum_block / c.q);
  auto r = make_result(lambda1, lambda2, CaseTag::CALDEIRA_LEGGETT, true);
  r.lindblad_margin = check_lindblad(params).margin;
  return r;
}

SpectralResult kappa_equal_q(const ModelParams& params) {
  const auto& D = params.diffusion();
  const double g = params.gamma();
  if (std::abs(D.dpq + g * D.dqq) > 1e-12 * std::max(1.0, std::abs(D.dpq)))
    throw Error(ErrorKind::ConstraintViolated, "equal-Q case requires Dpq = -gamma*Dqq");
  const auto c = q_coefficients(params);
  const double w = params.omega0();
  const double pre = g / c.q;
  const double plus = pre * (c.q11 * w + c.q12) * w;
  const double minus = pre * (c.q11 * w - c.q12) * w;
  // The w = x + p, z = x - p rotation diagonalises H only when both diagonal
  // blocks coincide, Q11 omega0^2 = Q22 = Q11.
  return make_result(plus, minus, CaseTag::EQUAL_Q, w == 1.0);
}

SpectralResult kappa_rescaled_general(const ModelParams& params) {
  const auto c = q_coefficients(params);
  if (!(c.q11 * c.q22 > 0.0))
    throw Error(ErrorKind::NegativeRatio, "Q11 and Q22 must share a strict sign");
  const double pre = params.gamma() / c.q;
  const double off = c.q12 * std::sqrt(c.q11 / c.q22);
  return make_result(pre * (c.q11 + off), pre * (c.q11 - off), CaseTag::RESCALED_GENERAL,
                     false);
}

SpectralResult kappa_perturbative(const ModelParams& params) {
  require_unit_frequency(params, "kappa_perturbative");
  const auto& D = params.diffusion();
  const double g = params.gamma();
  const double q11 = D.dpp + D.dqq;
  if (q11 == 0.0) throw Error(ErrorKind::DegenerateQ11, "Q11 = Dpp + Dqq vanishes");
  const double denom =
      q11 * q11 + 4.0 * g * (D.dpq + g * D.dqq) * q11 - (2.0 * g * D.dqq) * (2.0 * g * D.dqq);
  if (denom == 0.0) throw Error(ErrorKind::DegenerateDenominator, "perturbative denominator vanishes");
  const double base = 2.0 * D.dpp + (g + 1.0) * D.dqq;
  const double root = std::hypot(D.dpp + g * D.dqq, D.dqq);
  auto r = make_result(g * (base + root) / denom, g * (base - root) / denom,
                       CaseTag::PERTURBATIVE, false);
  r.approximate = true;
  return r;
}

std::pair<double, double> lemma2_eigenvalues(double a, double b) {
  if (a == 0.0 && b == 0.0) throw Error(ErrorKind::TrivialCase, "(a, b) = (0, 0)");
  const double half = b / 2.0;
  const double root = std::hypot(half, a);
  return {half + root, half - root};
}

Matrix block_pair_matrix(int d, double a, double b) { return block_isotropic(d, 0.0, a, b); }

MixingEstimate mixing_time(double kappa, double prefactor_C, double epsilon) {
  if (!(kappa > 0.0) || !(prefactor_C > 0.0) || !(epsilon > 0.0))
    throw Error(ErrorKind::NonPositiveInput, "kappa, C and epsilon must all be > 0");
  const double t = std::log(prefactor_C / epsilon) / kappa;
  return {kappa, prefactor_C, epsilon, std::max(0.0, t)};
}

}  // namespace wfp
