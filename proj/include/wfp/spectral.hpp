#pragma once

#include <optional>
#include <string_view>
#include <utility>

#include "wfp/model.hpp"

namespace wfp {

enum class CaseTag {
  GENERAL_D1,
  UNIT_FREQUENCY,
  CALDEIRA_LEGGETT,
  EQUAL_Q,
  RESCALED_GENERAL,
  PERTURBATIVE,
};

std::string_view to_string(CaseTag tag);

/// Pair of analytic rates for one closed-form case.
///
/// kappa is always min(lambda_plus, lambda_minus). lambda_plus carries the
/// "+" branch of the case's formula; for CALDEIRA_LEGGETT it holds the
/// position-block root gamma*omega0^2*Dpp/Q and lambda_minus the
/// momentum-block root (identically gamma).
///
/// spectrum_preserving says whether the case's change of coordinates keeps the
/// Hessian spectrum, i.e. whether both roots must appear (with multiplicity d)
/// in the dense spectrum of hessian_matrix.
struct SpectralResult {
  double lambda_plus = 0.0;
  double lambda_minus = 0.0;
  double kappa = 0.0;
  CaseTag case_tag = CaseTag::GENERAL_D1;
  bool spectrum_preserving = false;
  /// First-order perturbative value only.
  bool approximate = false;
  /// Attached when the case is known to violate the Lindblad condition.
  std::optional<double> lindblad_margin;
};

struct MixingEstimate {
  double kappa;
  double prefactor_C;
  double epsilon;
  double t_mix;
};

/// (gamma/Q) [[Q11 omega0^2 I, Q12 omega0 I], [Q12 omega0 I, Q22 I]].
Matrix hessian_matrix(const ModelParams& params);

SpectralResult eigenvalues_d1(const ModelParams& params);
SpectralResult kappa_unit_frequency(const ModelParams& params);
SpectralResult kappa_caldeira_leggett(const ModelParams& params);
SpectralResult kappa_equal_q(const ModelParams& params);
SpectralResult kappa_rescaled_general(const ModelParams& params);
SpectralResult kappa_perturbative(const ModelParams& params);

/// Eigenvalues b/2 +- sqrt((b/2)^2 + a^2) of [[0, a I], [a I, b I]], "+" first.
std::pair<double, double> lemma2_eigenvalues(double a, double b);

/// The 2d x 2d matrix [[0, a I_d], [a I_d, b I_d]].
Matrix block_pair_matrix(int d, double a, double b);

MixingEstimate mixing_time(double kappa, double prefactor_C, double epsilon);

}  // namespace wfp
