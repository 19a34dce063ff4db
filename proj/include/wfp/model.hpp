#pragma once

#include <Eigen/Core>

#include "wfp/error.hpp"

namespace wfp {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Which diffusion entry enters the cross coefficient Q12 = 2 omega0 gamma D_xx.
enum class Q12Convention { DQQ, DPQ };
/// Noise covariance rate of the Langevin SDE: 2D (matches the Fokker-Planck
/// diffusion term) or D.
enum class NoiseConvention { TWO_D, ONE_D };
/// Friction entering the drift: gamma * p or 2 gamma * p.
enum class FrictionConvention { GAMMA, TWO_GAMMA };

struct Conventions {
  Q12Convention q12 = Q12Convention::DQQ;
  NoiseConvention noise = NoiseConvention::TWO_D;
  FrictionConvention friction = FrictionConvention::GAMMA;

  friend bool operator==(const Conventions&, const Conventions&) = default;
};

std::string_view to_string(Q12Convention c);
std::string_view to_string(NoiseConvention c);
std::string_view to_string(FrictionConvention c);
Q12Convention parse_q12_convention(std::string_view s);
NoiseConvention parse_noise_convention(std::string_view s);
FrictionConvention parse_friction_convention(std::string_view s);

/// Scalars generating the block diffusion matrix [[Dqq I, Dpq I], [Dpq I, Dpp I]].
struct DiffusionSpec {
  double dqq = 0.0;
  double dpq = 0.0;
  double dpp = 0.0;

  double determinant() const { return dqq * dpp - dpq * dpq; }
  friend bool operator==(const DiffusionSpec&, const DiffusionSpec&) = default;
};

/// A validated harmonic Wigner-Fokker-Planck problem instance (hbar = m = 1).
/// Construction throws Error(InvalidParams) on any violated invariant.
class ModelParams {
 public:
  ModelParams(int d, double omega0, double gamma, DiffusionSpec diffusion,
              Conventions conventions = {});

  /// Same checks except positive semidefiniteness of D, for evaluating the
  /// closed-form rates on formal parameter sets (e.g. Dqq = 0 with Dpq != 0).
  /// Simulation and sampling still require a PSD noise and will refuse these.
  static ModelParams formula_only(int d, double omega0, double gamma, DiffusionSpec diffusion,
                                  Conventions conventions = {});

  /// False for formula_only instances whose D is indefinite.
  bool diffusion_psd() const;

  int d() const { return d_; }
  int phase_dim() const { return 2 * d_; }
  double omega0() const { return omega0_; }
  double gamma() const { return gamma_; }
  const DiffusionSpec& diffusion() const { return diffusion_; }
  const Conventions& conventions() const { return conventions_; }

  /// Friction used by the drift, after applying the friction convention.
  double effective_gamma() const;
  /// Multiplier k in the noise covariance rate k*D.
  double noise_factor() const;

  /// Copies keep the receiver's validation mode.
  ModelParams with_dimension(int d) const;
  ModelParams with_omega0(double omega0) const;
  ModelParams with_gamma(double gamma) const;
  ModelParams with_diffusion(DiffusionSpec diffusion) const;
  ModelParams with_conventions(Conventions conventions) const;

  friend bool operator==(const ModelParams&, const ModelParams&) = default;

 private:
  struct Unchecked {};
  ModelParams(Unchecked, int d, double omega0, double gamma, DiffusionSpec diffusion,
              Conventions conventions);
  void validate(bool require_psd) const;
  ModelParams rebuild(int d, double omega0, double gamma, DiffusionSpec diffusion,
                      Conventions conventions) const;

  int d_;
  double omega0_;
  double gamma_;
  DiffusionSpec diffusion_;
  Conventions conventions_;
  bool formula_only_ = false;
};

/// Coefficients of the steady-state exponent
/// A(x, p) = (gamma/Q) [Q11 omega0^2 x^2 + 2 Q12 omega0 x.p + Q22 p^2].
struct QCoefficients {
  double q11;
  double q12;
  double q22;
  double q;
};

/// [[a I_d, b I_d], [b I_d, c I_d]].
Matrix block_isotropic(int d, double a, double b, double c);

Matrix build_diffusion_matrix(const ModelParams& params);

struct LindbladCheck {
  bool satisfied;
  /// det(D) - (gamma/2)^2
  double margin;
};

LindbladCheck check_lindblad(const ModelParams& params);

/// Throws Error(DegenerateQ) when Q vanishes.
QCoefficients q_coefficients(const ModelParams& params);

}  // namespace wfp
