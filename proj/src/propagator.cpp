#include <cmath>

#include "wfp/dynamics.hpp"

namespace wfp {

OscillatorBlock OscillatorBlock::from_params(const ModelParams& params) {
  const double k = params.noise_factor();
  const auto& D = params.diffusion();
  return {params.omega0(), params.effective_gamma(), k * D.dqq, k * D.dpq, k * D.dpp};
}

std::array<double, 4> block_exponential(const OscillatorBlock& block, double t) {
  // M = [[0, 1], [-w^2, -g]], M - mu I with mu = -g/2 squares to disc * I, so
  // exp(Mt) = e^{mu t} [C(t) I + S(t) (M - mu I)] with C, S the even/odd parts
  // of exp(sqrt(disc) t).
  const double w2 = block.omega0 * block.omega0;
  const double g = block.friction;
  const double mu = -0.5 * g;
  const double disc = 0.25 * g * g - w2;

  double c = 0.0;
  double s = 0.0;
  if (std::abs(g * g - 4.0 * w2) < 1e-8 * std::max(g * g, 4.0 * w2)) {
    // Critical damping: the Jordan limit with the leading corrections.
    const double u = disc * t * t;
    c = 1.0 + u / 2.0 + u * u / 24.0;
    s = t * (1.0 + u / 6.0 + u * u / 120.0);
  } else if (disc > 0.0) {
    const double r = std::sqrt(disc);
    c = std::cosh(r * t);
    s = std::sinh(r * t) / r;
  } else {
    const double r = std::sqrt(-disc);
    c = std::cos(r * t);
    s = std::sin(r * t) / r;
  }
  const double e = std::exp(mu * t);
  return {e * (c - mu * s), e * s, e * (-w2 * s), e * (c + (-g - mu) * s)};
}

namespace {

Matrix expand_block(int d, const std::array<double, 4>& b) {
  Matrix m = Matrix::Zero(2 * d, 2 * d);
  for (int j = 0; j < d; ++j) {
    m(j, j) = b[0];
    m(j, d + j) = b[1];
    m(d + j, j) = b[2];
    m(d + j, d + j) = b[3];
  }
  return m;
}

}  // namespace

std::vector<GaussianState> propagate_moments(const OscillatorBlock& block, int d, const Vector& m0,
                                             const Matrix& cov0, std::span<const double> times) {
  if (m0.size() != 2 * d || cov0.rows() != 2 * d || cov0.cols() != 2 * d)
    throw Error(ErrorKind::DimensionMismatch, "initial moments must have dimension 2d");
  if (!(block.friction >= 0.0) || !(block.omega0 > 0.0))
    throw Error(ErrorKind::InvalidParams, "need omega0 > 0 and friction >= 0");
  if (!block.noiseless() && !(block.friction > 0.0))
    throw Error(ErrorKind::InvalidParams, "noisy propagation needs friction > 0");

  std::optional<Matrix> sigma_inf;
  if (!block.noiseless())
    sigma_inf = stationary_block(block.omega0, block.friction, block.nqq, block.npq, block.npp)
                    .expand(d);

  std::vector<GaussianState> out;
  out.reserve(times.size());
  double previous = 0.0;
  for (double t : times) {
    if (!(t >= previous)) throw Error(ErrorKind::InvalidParams, "times must be ascending and >= 0");
    previous = t;
    const Matrix phi = expand_block(d, block_exponential(block, t));
    Vector mean = phi * m0;
    Matrix cov = sigma_inf ? Matrix(*sigma_inf + phi * (cov0 - *sigma_inf) * phi.transpose())
                           : Matrix(phi * cov0 * phi.transpose());
    out.emplace_back(std::move(mean), std::move(cov));
  }
  return out;
}

std::vector<GaussianState> exact_moment_propagation(const ModelParams& params, const Vector& m0,
                                                    const Matrix& cov0,
                                                    std::span<const double> times) {
  return propagate_moments(OscillatorBlock::from_params(params), params.d(), m0, cov0, times);
}

DecayCurve exact_decay_curve(const ModelParams& params, const GaussianState& initial,
                             std::span<const double> times, Metric metric) {
  const auto target = steady_covariance_lyapunov(params);
  const auto states = exact_moment_propagation(params, initial.mean(), initial.cov(), times);
  DecayCurve curve;
  curve.metric = metric;
  curve.params_snapshot = params;
  curve.samples.reserve(states.size());
  for (size_t i = 0; i < states.size(); ++i)
    curve.samples.push_back(curve_sample(times[i], states[i], target, metric));
  return curve;
}

}  // namespace wfp
