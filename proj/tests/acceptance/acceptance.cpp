// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fail.
// Every criterion also has a wall-clock budget that counts toward its verdict.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "wfp/dynamics.hpp"
#include "wfp/harness.hpp"
#include "wfp/linalg.hpp"
#include "wfp/spectral.hpp"
#include "wfp/steady_state.hpp"

using namespace wfp;

namespace {

struct Verdict {
  bool pass;
  std::string detail;
};

char buf[512];

template <typename... A>
std::string fmt(const char* f, A... a) {
  std::snprintf(buf, sizeof buf, f, a...);
  return buf;
}

double rel(double a, double b) { return std::abs(a - b) / std::max({1e-300, std::abs(a), std::abs(b)}); }

/// Random valid parameters with Q bounded away from zero.
class Params {
 public:
  explicit Params(std::uint64_t seed) : rng_(seed) {}
  double u(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }

  ModelParams next(int d = 1, bool unit = false) {
    while (true) {
      const double w = unit ? 1.0 : u(0.2, 3.0), g = u(0.1, 3.0);
      const double dqq = u(0.0, 2.0), dpp = u(0.0, 2.0), dpq = u(-1, 1) * std::sqrt(dqq * dpp);
      const double q11 = dpp + w * w * dqq, q12 = 2 * w * g * dqq;
      const double q22 = q11 + 4 * g * (dpq + g * dqq), q = q11 * q22 - q12 * q12;
      if (std::abs(q) < 0.05 * std::max(std::abs(q11 * q22), q12 * q12) || q11 < 1e-2) continue;
      return ModelParams(d, w, g, DiffusionSpec{dqq, dpq, dpp});
    }
  }

 private:
  std::mt19937_64 rng_;
};

Verdict c1_block_closure() {
  Params r(101);
  double worst = 0;
  for (int i = 0; i < 200; ++i) {
    const double a = r.u(-5, 5), b = r.u(-5, 5);
    auto [hi, lo] = lemma2_eigenvalues(a, b);
    for (int d : {1, 2, 4, 8}) {
      auto s = dense_spectrum_oracle(block_pair_matrix(d, a, b));
      for (int k = 0; k < 2 * d; ++k) worst = std::max(worst, std::abs(s[k] - (k < d ? lo : hi)));
    }
  }
  return {worst <= 1e-10, fmt("max |dense - closed form| = %.2e (tol 1e-10), 200 (a,b) x d in {1,2,4,8}", worst)};
}

Verdict c2_dimension() {
  Params r(202);
  double worst = 0;
  for (int i = 0; i < 100; ++i) {
    ModelParams p = r.next();
    SpectralResult e = eigenvalues_d1(p);
    for (int d = 1; d <= 8; ++d) {
      auto s = dense_spectrum_oracle(hessian_matrix(p.with_dimension(d)));
      for (int k = 0; k < 2 * d; ++k)
        worst = std::max(worst, std::abs(s[k] - (k < d ? e.lambda_minus : e.lambda_plus)));
    }
  }
  return {worst <= 1e-10, fmt("max |dense - {l+,l-}| = %.2e (tol 1e-10), 100 sets x d = 1..8", worst)};
}

Verdict c3_cases() {
  Params r(303);
  double a = 0, c = 0, d = 0;
  bool b_exact = true;
  for (int i = 0; i < 200; ++i) {
    ModelParams p = r.next(1, true);
    a = std::max({a, rel(kappa_unit_frequency(p).kappa, eigenvalues_d1(p).kappa),
                  rel(kappa_unit_frequency(p).lambda_plus, eigenvalues_d1(p).lambda_plus)});

    const auto& D = p.diffusion();
    const double g = p.gamma();
    ModelParams cl = p.with_omega0(r.u(0.2, 3)).with_diffusion({0.0, 0.0, D.dpp + 0.05});
    b_exact = b_exact && kappa_caldeira_leggett(cl).lambda_minus == cl.gamma();
    // Formal Dqq = 0 sets with Dpq != 0 as well.
    ModelParams formal = ModelParams::formula_only(1, r.u(0.2, 3), g, {0.0, r.u(-0.1, 0.1), D.dpp + 1.0});
    b_exact = b_exact && kappa_caldeira_leggett(formal).lambda_minus == formal.gamma();

    ModelParams eq = p.with_diffusion({D.dqq, -g * D.dqq, std::max(D.dpp, g * g * D.dqq + 0.1)});
    const double k0 = eigenvalues_d1(eq).kappa;
    c = std::max({c, rel(kappa_equal_q(eq).kappa, k0), rel(kappa_rescaled_general(eq).kappa, k0)});

    ModelParams unit_cl = p.with_diffusion({0.0, 0.0, D.dpp + 0.05});
    d = std::max(d, rel(kappa_perturbative(unit_cl).kappa, kappa_caldeira_leggett(unit_cl).lambda_plus));
    ModelParams unit_formal = ModelParams::formula_only(1, 1.0, g, {0.0, r.u(-0.1, 0.1), D.dpp + 1.0});
    d = std::max(d, rel(kappa_perturbative(unit_formal).kappa,
                        kappa_caldeira_leggett(unit_formal).lambda_plus));
  }
  const bool ok = a <= 1e-12 && b_exact && c <= 1e-12 && d <= 1e-12;
  return {ok, fmt("(a) %.1e (b) lambda2 == gamma: %s (c) %.1e (d) %.1e (tol 1e-12 rel)", a,
                  b_exact ? "yes" : "NO", c, d)};
}

Verdict c4_lyapunov() {
  Params r(404);
  double worst = 0;
  for (int i = 0; i < 100; ++i) {
    ModelParams p = r.next(1 + i % 4);
    if (p.diffusion().dpp < 1e-3 && p.diffusion().dqq < 1e-3) continue;
    worst = std::max(worst, lyapunov_residual(p, steady_covariance_lyapunov(p).cov()));
  }
  double classical = 0;
  for (double g : {0.25, 1.0, 3.0}) {
    ModelParams p(2, 1.0, g, DiffusionSpec{0, 0, g});
    classical = std::max(classical, (steady_covariance_lyapunov(p).cov() - Matrix::Identity(4, 4))
                                        .cwiseAbs().maxCoeff());
  }
  return {worst <= 1e-12 && classical <= 1e-12,
          fmt("max residual %.2e, classical |Sigma - I| %.2e (tol 1e-12)", worst, classical)};
}

Verdict c5_monte_carlo() {
  const ModelParams p(1, 1.0, 1.0, DiffusionSpec{1.0, -1.0, 2.0});
  SimConfig cfg;
  cfg.dt = 1e-3;
  cfg.t_final = 10.0;
  cfg.n_particles = 100000;
  cfg.record_every = 100;
  cfg.seed = 20240501;
  const double n = static_cast<double>(cfg.n_particles);

  const GaussianState init = GaussianState::from_block(1, Eigen::Vector2d(2.0, 0.0), {0.5, 0.0, 0.5});
  const DecayCurve curve = simulate_decay(p, cfg, init);
  std::vector<double> times;
  for (const auto& s : curve.samples) times.push_back(s.t);
  const auto exact = exact_moment_propagation(p, init.mean(), init.cov(), times);
  double worst_z = 0;
  for (std::size_t k = 0; k < times.size(); ++k) {
    const Matrix& c = exact[k].cov();
    const CurveSample& s = curve.samples[k];
    // Standard error of a Gaussian sample covariance entry: sqrt((s_ii s_jj + s_ij^2) / n).
    const double se_xx = std::sqrt(2 * c(0, 0) * c(0, 0) / n);
    const double se_xp = std::sqrt((c(0, 0) * c(1, 1) + c(0, 1) * c(0, 1)) / n);
    const double se_pp = std::sqrt(2 * c(1, 1) * c(1, 1) / n);
    worst_z = std::max({worst_z, std::abs(s.cxx - c(0, 0)) / se_xx, std::abs(s.cxp - c(0, 1)) / se_xp,
                        std::abs(s.cpp - c(1, 1)) / se_pp});
  }

  SimConfig still = cfg;
  still.seed = cfg.seed + 1;
  const GaussianState steady = steady_covariance_lyapunov(p);
  const auto b = *steady.block_form();
  const DecayCurve flat = simulate_decay(p, still, steady);
  double worst_rel = 0;
  for (const auto& s : flat.samples)
    worst_rel = std::max({worst_rel, rel(s.cxx, b.cxx), rel(s.cxp, b.cxp), rel(s.cpp, b.cpp)});
  return {worst_z <= 4.0 && worst_rel <= 0.03,
          fmt("max |MC - exact| = %.2f SE over %zu times (tol 4); stationary max rel dev %.2f%% (tol 3%%)",
              worst_z, times.size(), 100 * worst_rel)};
}

Verdict c6_euler_order() {
  const ModelParams p(1, 1.0, 0.5, DiffusionSpec{0, 0, 0});
  const double T = 5.0;
  const Eigen::Vector2d z0(1.0, 0.0);
  const auto exact = exact_moment_propagation(p, z0, Matrix::Zero(2, 2), std::vector{T});
  std::vector<double> dts{4e-3, 2e-3, 1e-3}, errs;
  for (double dt : dts) {
    Ensemble e;
    e.width = 2;
    e.particles = {z0(0), z0(1)};
    const auto steps = std::llround(T / dt);
    for (long long k = 0; k < steps; ++k) e = euler_maruyama_step(p, std::move(e), dt);
    errs.push_back(std::hypot(e.particles[0] - exact[0].mean()(0), e.particles[1] - exact[0].mean()(1)));
  }
  // Least-squares slope of log err against log dt.
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (int i = 0; i < 3; ++i) {
    const double x = std::log(dts[i]), y = std::log(errs[i]);
    sx += x, sy += y, sxx += x * x, sxy += x * y;
  }
  const double order = (3 * sxy - sx * sy) / (3 * sxx - sx * sx);
  return {order >= 0.8 && order <= 1.2,
          fmt("observed order %.4f (errors %.3e, %.3e, %.3e; accept [0.8, 1.2])", order, errs[0], errs[1],
              errs[2])};
}

Verdict c7_decay_rate() {
  const ModelParams p(1, 1.0, 1.0, DiffusionSpec{0, 0, 1});
  auto displaced = [](const ModelParams& q) {
    Vector m = Vector::Zero(q.phase_dim());
    m.head(q.d()).setConstant(5.0);
    return GaussianState(m, steady_covariance_lyapunov(q).cov());
  };

  std::vector<double> times;
  for (int k = 0; k <= 1000; ++k) times.push_back(0.01 * k);
  std::vector<RateFit> exact;
  for (int d : {1, 2, 8}) {
    const ModelParams q = p.with_dimension(d);
    exact.push_back(fit_decay_rate(exact_decay_curve(q, displaced(q), times, Metric::KL), 0.0, 10.0));
  }
  const double spread = std::max(std::abs(exact[1].rate - exact[0].rate), std::abs(exact[2].rate - exact[0].rate));
  const bool exact_ok = exact[0].rate > 0 && exact[0].std_error < 0.01 * exact[0].rate && spread <= 1e-10;

  SimConfig cfg;
  cfg.dt = 1e-3;
  cfg.t_final = 5.0;
  cfg.n_particles = 20000;
  cfg.record_every = 50;
  cfg.seed = 77;
  std::vector<double> mc;
  for (int d : {1, 2, 8}) {
    const ModelParams q = p.with_dimension(d);
    mc.push_back(fit_decay_rate(simulate_decay(q, cfg, displaced(q)), 0.0, 5.0).rate);
  }
  double mc_dev = 0;
  for (double r : mc) mc_dev = std::max(mc_dev, rel(r, mc[0]));
  return {exact_ok && mc_dev <= 0.02,
          fmt("exact rate %.6f stderr %.2f%%, d-spread %.1e (tol 1e-10); MC rates %.4f %.4f %.4f, max dev "
              "%.2f%% (tol 2%%)",
              exact[0].rate, 100 * exact[0].std_error / exact[0].rate, spread, mc[0], mc[1], mc[2],
              100 * mc_dev)};
}

Verdict c8_sgd() {
  std::string detail;
  bool ok = true;
  for (auto [s, w2] : {std::pair{0.1, 1.0}, std::pair{1.0, 2.0}, std::pair{2.0, 1.0}}) {
    const SgdSpec spec{s, w2, 1};
    SimConfig cfg;
    cfg.dt = 1e-3;
    cfg.t_final = 5.0 / w2;
    cfg.n_particles = 100000;
    cfg.record_every = static_cast<int>(cfg.total_steps());
    cfg.seed = 8;
    const SgdRun run = sgd_sde_simulate(spec, cfg, GaussianState(Vector::Zero(1), Matrix::Zero(1, 1)));
    const double var = empirical_gaussian(run.final_ensemble).cov()(0, 0);
    const double want = s / (2 * w2);
    ok = ok && rel(var, want) <= 0.03;
    detail += fmt("(s=%g, w0^2=%g) var %.5f vs %.5f; ", s, w2, var, want);
  }
  return {ok, detail + "tol 3%"};
}

Verdict c9_reproducible() {
  using namespace wfp::harness;
  RunConfig cfg = parse_config(json::parse(R"({"model": {"d": 2, "dqq": 0.2, "dpq": -0.1, "dpp": 1},
     "sim": {"dt": 0.001, "t_final": 1, "n_particles": 20000, "record_every": 50, "seed": 9,
             "initial": {"mean_x": 3}}})"));
  const std::string first = cmd_simulate(cfg).primary;
  const std::string second = cmd_simulate(cfg).primary;
  RunConfig threaded = cfg;
  threaded.sim.workers = 4;
  const std::string third = cmd_simulate(threaded).primary;
  const bool ok = first == second && first == third && !first.empty();
  return {ok, fmt("repeat identical: %s, 1 vs 4 workers identical: %s (%zu bytes)",
                  first == second ? "yes" : "NO", first == third ? "yes" : "NO", first.size())};
}

Verdict c10_reconciliation() {
  double iso = 0;
  for (double g : {0.5, 1.0, 2.0}) {
    const auto rep = reconcile_steady_states(ModelParams(1, 1.0, g, DiffusionSpec{0, 0, g}));
    for (const Matrix* m : {&rep.sigma_a, &rep.sigma_l})
      iso = std::max({iso, std::abs((*m)(0, 1)), std::abs((*m)(1, 0)), std::abs((*m)(0, 0) - (*m)(1, 1))});
  }
  const auto rep = reconcile_steady_states(ModelParams(1, 1.0, 1.0, DiffusionSpec{1, -1, 2}));
  Matrix sa(2, 2), sl(2, 2);
  sa << 1.5, -1, -1, 1.5;
  sl << 2, -1, -1, 3;
  const double ea = (rep.sigma_a - sa).cwiseAbs().maxCoeff();
  const double el = (rep.sigma_l - sl).cwiseAbs().maxCoeff();
  const bool conv = rep.conventions == Conventions{};
  return {iso <= 1e-12 && ea <= 1e-10 && el <= 1e-10 && conv,
          fmt("classical isotropy dev %.1e (tol 1e-12); |Sigma_A - ref| %.1e, |Sigma_L - ref| %.1e (tol 1e-10)",
              iso, ea, el)};
}

struct Criterion {
  int id;
  const char* name;
  double budget_s;
  std::function<Verdict()> run;
};

}  // namespace

int main() {
  const std::vector<Criterion> criteria = {
      {1, "block matrix closure", 5, c1_block_closure},
      {2, "dimension independence of kappa", 10, c2_dimension},
      {3, "closed-form case consistency", 1, c3_cases},
      {4, "Lyapunov residual and classical limit", 1, c4_lyapunov},
      {5, "Monte-Carlo vs exact moments", 120, c5_monte_carlo},
      {6, "Euler weak order", 30, c6_euler_order},
      {7, "decay-rate measurement", 120, c7_decay_rate},
      {8, "SGD stationary variance", 60, c8_sgd},
      {9, "reproducibility", 60, c9_reproducible},
      {10, "steady-state reconciliation", 1, c10_reconciliation},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = c.run();
    } catch (const std::exception& e) {
      v = {false, std::string("threw: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool in_time = secs < c.budget_s;
    const bool pass = v.pass && in_time;
    failed += !pass;
    std::printf("[%s] C%d %s: %s | %.2f s (budget %.0f s%s)\n", pass ? "PASS" : "FAIL", c.id, c.name,
                v.detail.c_str(), secs, c.budget_s, in_time ? "" : ", EXCEEDED");
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
