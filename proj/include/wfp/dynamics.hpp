#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "wfp/model.hpp"
#include "wfp/steady_state.hpp"

namespace wfp {

/// n particles, one row of `width` coordinates each (width = 2d for phase
/// space, d for the classical SGD diffusion), row-major.
struct Ensemble {
  int width = 0;
  std::vector<double> particles;
  double time = 0.0;
  std::uint64_t seed = 0;
  std::uint64_t step_index = 0;

  std::int64_t size() const {
    return width == 0 ? 0 : static_cast<std::int64_t>(particles.size()) / width;
  }
  std::span<double> row(std::int64_t i) {
    return {particles.data() + i * width, static_cast<size_t>(width)};
  }
  std::span<const double> row(std::int64_t i) const {
    return {particles.data() + i * width, static_cast<size_t>(width)};
  }
};

/// Moment-fitted Gaussian (sample mean, unbiased sample covariance).
/// The reduction order is fixed, so the result is independent of `workers`.
GaussianState empirical_gaussian(const Ensemble& ens, int workers = 1);

enum class Metric { KL, L2 };
std::string_view to_string(Metric m);
Metric parse_metric(std::string_view s);

struct SimConfig {
  double dt = 1e-3;
  double t_final = 1.0;
  std::int64_t n_particles = 1000;
  std::uint64_t seed = 0;
  int record_every = 1;
  Metric metric = Metric::KL;
  /// Degree of parallelism; never changes results.
  int workers = 1;

  /// Throws Error(ConfigError) on violated invariants.
  void validate() const;
  std::int64_t total_steps() const;
};

struct CurveSample {
  double t;
  double distance;
  double mean_norm;
  double cxx;
  double cxp;
  double cpp;
};

struct DecayCurve {
  std::vector<CurveSample> samples;
  Metric metric = Metric::KL;
  std::optional<ModelParams> params_snapshot;
};

/// One curve point: distance of g to target under `metric`, plus |mean| and
/// the block-averaged covariance entries of g.
CurveSample curve_sample(double t, const GaussianState& g, const GaussianState& target,
                         Metric metric);

struct RateFit {
  double rate;
  double std_error;
  int points;
};

/// Negated least-squares slope of ln(distance) against t over [t_lo, t_hi].
RateFit fit_decay_rate(const DecayCurve& curve, double t_lo, double t_hi);

/// (p, -omega0^2 x - gamma_eff p).
Vector drift(const ModelParams& params, const Vector& z);

/// z <- z + drift(z) dt + xi, xi ~ N(0, k D dt); noise keyed by
/// (seed, particle, step_index).
Ensemble euler_maruyama_step(const ModelParams& params, Ensemble ens, double dt, int workers = 1);

/// Samples `initial`, integrates with Euler-Maruyama and records the distance
/// of the moment-fitted Gaussian to the Lyapunov steady state at t = 0 and
/// every record_every steps. Points with an undefined (infinite) distance,
/// e.g. a point-mass start under L2, are not recorded.
DecayCurve simulate_decay(const ModelParams& params, const SimConfig& cfg,
                          const GaussianState& initial);

/// Linear drift block [[0, 1], [-omega0^2, -friction]] with noise rate matrix
/// [[nqq, npq], [npq, npp]] (already including the noise convention factor).
/// friction = 0 is allowed when the noise vanishes (Hamiltonian flow).
struct OscillatorBlock {
  double omega0;
  double friction;
  double nqq = 0.0;
  double npq = 0.0;
  double npp = 0.0;

  static OscillatorBlock from_params(const ModelParams& params);
  bool noiseless() const { return nqq == 0.0 && npq == 0.0 && npp == 0.0; }
};

/// exp(M t) of the 2x2 drift block, row-major {a11, a12, a21, a22}.
std::array<double, 4> block_exponential(const OscillatorBlock& block, double t);

std::vector<GaussianState> propagate_moments(const OscillatorBlock& block, int d, const Vector& m0,
                                             const Matrix& cov0, std::span<const double> times);

std::vector<GaussianState> exact_moment_propagation(const ModelParams& params, const Vector& m0,
                                                    const Matrix& cov0,
                                                    std::span<const double> times);

/// Same record schedule as simulate_decay, driven by exact moments.
DecayCurve exact_decay_curve(const ModelParams& params, const GaussianState& initial,
                             std::span<const double> times, Metric metric);

/// Classical continuous-time SGD on f(x) = hessian_scale * |x|^2 / 2:
/// dx = -hessian_scale x dt + sqrt(s) dW.
struct SgdSpec {
  double s;
  double hessian_scale;
  int d;

  void validate() const;
  bool degenerate() const { return s == 0.0; }
};

/// Stationary law of the SGD diffusion, N(0, s / (2 hessian_scale) I_d).
/// For s = 0 the covariance is zero (degenerate point mass).
GaussianState sgd_stationary(const SgdSpec& spec);

struct SgdRun {
  DecayCurve curve;
  Ensemble final_ensemble;
};

/// Starts from `initial` (dimension d). Distances are measured against
/// sgd_stationary; for s = 0 the recorded distance is |mean|.
SgdRun sgd_sde_simulate(const SgdSpec& spec, const SimConfig& cfg, const GaussianState& initial);
/// Starts every particle at x = (1, ..., 1).
SgdRun sgd_sde_simulate(const SgdSpec& spec, const SimConfig& cfg);

enum class Regime { FrictionDominated, Intermediate, HamiltonianDominated };
std::string_view describe(Regime r);

struct AnalogyMap {
  SgdSpec spec;
  /// Weight of the matched objective F(p) = friction_weight * |p|^2.
  double friction_weight;
  /// gamma / omega0.
  double dominance;
  Regime regime;
  bool degenerate;

  double objective(const Vector& p) const { return friction_weight * p.squaredNorm(); }
};

AnalogyMap sgd_analogy_map(const ModelParams& params);

}  // namespace wfp
