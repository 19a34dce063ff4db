#include <cmath>

#include "wfp/dynamics.hpp"
#include "wfp/parallel.hpp"
#include "wfp/philox.hpp"

namespace wfp {

void SgdSpec::validate() const {
  if (!(s >= 0.0) || !std::isfinite(s)) throw Error(ErrorKind::InvalidParams, "s must be >= 0");
  if (!(hessian_scale > 0.0) || !std::isfinite(hessian_scale))
    throw Error(ErrorKind::InvalidParams, "hessian_scale must be > 0");
  if (d < 1) throw Error(ErrorKind::InvalidParams, "d must be >= 1");
}

GaussianState sgd_stationary(const SgdSpec& spec) {
  spec.validate();
  const double var = spec.s / (2.0 * spec.hessian_scale);
  return GaussianState(Vector::Zero(spec.d), var * Matrix::Identity(spec.d, spec.d));
}

namespace {

CurveSample sgd_sample(double t, const GaussianState& g, const GaussianState& target,
                       const SgdSpec& spec, Metric metric) {
  const double mean_norm = g.mean().norm();
  const double var = g.cov().trace() / static_cast<double>(spec.d);
  if (spec.degenerate()) return {t, mean_norm, mean_norm, var, 0.0, 0.0};
  auto s = curve_sample(t, g, target, metric);
  return {t, s.distance, mean_norm, var, 0.0, 0.0};
}

void advance_sgd(const SgdSpec& spec, Ensemble& ens, double dt, int workers) {
  const std::int64_t d = spec.d;
  const double decay = spec.hessian_scale * dt;
  const double amp = std::sqrt(spec.s * dt);
  const Philox4x32 gen(ens.seed);
  const std::uint64_t step = ens.step_index;
  const auto step_lo = static_cast<std::uint32_t>(step);
  const auto step_hi = static_cast<std::uint32_t>(step >> 32);

  // Coordinate q = i*d + k takes normal q%4 of Philox call q/4.
  for_each_chunk(ens.size(), workers, [&](std::int64_t, std::int64_t begin, std::int64_t end) {
    std::array<double, 4> nz{};
    std::int64_t cached_call = -1;
    for (std::int64_t q = begin * d; q < end * d; ++q) {
      const std::int64_t call = q >> 2;
      if (call != cached_call) {
        nz = normals4(gen, static_cast<std::uint32_t>(call), step_lo,
                      static_cast<std::uint32_t>(call >> 32) | (step_hi << 16), Stream::Sgd);
        cached_call = call;
      }
      double& x = ens.particles[static_cast<size_t>(q)];
      x = x - decay * x + amp * nz[static_cast<size_t>(q & 3)];
    }
  });
  ens.step_index += 1;
  ens.time = static_cast<double>(ens.step_index) * dt;
}

}  // namespace

SgdRun sgd_sde_simulate(const SgdSpec& spec, const SimConfig& cfg, const GaussianState& initial) {
  spec.validate();
  cfg.validate();
  if (initial.phase_dim() != spec.d)
    throw Error(ErrorKind::DimensionMismatch, "initial state must have dimension d");
  const auto target = sgd_stationary(spec);

  SgdRun run{DecayCurve{}, sample_steady(initial, cfg.n_particles, cfg.seed, cfg.workers)};
  run.curve.metric = cfg.metric;
  auto& ens = run.final_ensemble;

  auto record = [&](double t) {
    auto s = sgd_sample(t, empirical_gaussian(ens, cfg.workers), target, spec, cfg.metric);
    if (std::isfinite(s.distance)) run.curve.samples.push_back(s);
  };
  const std::int64_t steps = cfg.total_steps();
  record(0.0);
  for (std::int64_t k = 1; k <= steps; ++k) {
    advance_sgd(spec, ens, cfg.dt, cfg.workers);
    if (k % cfg.record_every == 0) record(static_cast<double>(k) * cfg.dt);
  }
  return run;
}

SgdRun sgd_sde_simulate(const SgdSpec& spec, const SimConfig& cfg) {
  spec.validate();
  return sgd_sde_simulate(
      spec, cfg, GaussianState(Vector::Ones(spec.d), Matrix::Zero(spec.d, spec.d)));
}

std::string_view describe(Regime r) {
  switch (r) {
    case Regime::FrictionDominated: return "friction-dominated regime";
    case Regime::Intermediate: return "intermediate regime";
    case Regime::HamiltonianDominated: return "Hamiltonian-dominated regime; analogy weak";
  }
  return "unknown";
}

AnalogyMap sgd_analogy_map(const ModelParams& params) {
  // Momentum block of D = s I / 2 fixes s; F = gamma |p|^2 has gradient 2 gamma p.
  const double s = 2.0 * params.diffusion().dpp;
  const double dominance = params.gamma() / params.omega0();
  Regime regime = Regime::Intermediate;
  if (dominance >= 10.0)
    regime = Regime::FrictionDominated;
  else if (dominance <= 1.0)
    regime = Regime::HamiltonianDominated;
  return {SgdSpec{s, 2.0 * params.gamma(), params.d()}, params.gamma(), dominance, regime,
          s == 0.0};
}

}  // namespace wfp
