#include "wfp/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "wfp/parallel.hpp"
#include "wfp/philox.hpp"

namespace wfp {

std::string_view to_string(Metric m) { return m == Metric::KL ? "KL" : "L2"; }

Metric parse_metric(std::string_view s) {
  if (s == "KL" || s == "kl") return Metric::KL;
  if (s == "L2" || s == "l2") return Metric::L2;
  throw Error(ErrorKind::ConfigError, "unknown metric '" + std::string(s) + "'");
}

void SimConfig::validate() const {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw Error(ErrorKind::ConfigError, "dt must be > 0");
  if (!(t_final > 0.0) || !std::isfinite(t_final))
    throw Error(ErrorKind::ConfigError, "t_final must be > 0");
  if (dt > t_final) throw Error(ErrorKind::ConfigError, "dt must not exceed t_final");
  if (n_particles < 1) throw Error(ErrorKind::ConfigError, "n_particles must be >= 1");
  if (n_particles > (std::int64_t{1} << 32))
    throw Error(ErrorKind::ConfigError, "n_particles must fit the 32-bit particle counter");
  if (record_every < 1) throw Error(ErrorKind::ConfigError, "record_every must be >= 1");
  if (workers < 1) throw Error(ErrorKind::ConfigError, "workers must be >= 1");
}

std::int64_t SimConfig::total_steps() const {
  return static_cast<std::int64_t>(std::llround(t_final / dt));
}

GaussianState empirical_gaussian(const Ensemble& ens, int workers) {
  const std::int64_t n = ens.size();
  const int w = ens.width;
  if (n < 1) throw Error(ErrorKind::InsufficientData, "empty ensemble");
  const std::int64_t chunks = chunk_count(n);

  std::vector<Vector> partial_sum(static_cast<size_t>(chunks), Vector::Zero(w));
  for_each_chunk(n, workers, [&](std::int64_t c, std::int64_t begin, std::int64_t end) {
    Vector& acc = partial_sum[static_cast<size_t>(c)];
    for (std::int64_t i = begin; i < end; ++i) {
      const auto r = ens.row(i);
      for (int a = 0; a < w; ++a) acc(a) += r[static_cast<size_t>(a)];
    }
  });
  Vector mean = Vector::Zero(w);
  for (const auto& p : partial_sum) mean += p;
  mean /= static_cast<double>(n);

  std::vector<Matrix> partial_cov(static_cast<size_t>(chunks), Matrix::Zero(w, w));
  for_each_chunk(n, workers, [&](std::int64_t c, std::int64_t begin, std::int64_t end) {
    Matrix& acc = partial_cov[static_cast<size_t>(c)];
    std::vector<double> dev(static_cast<size_t>(w));
    for (std::int64_t i = begin; i < end; ++i) {
      const auto r = ens.row(i);
      for (int a = 0; a < w; ++a) dev[static_cast<size_t>(a)] = r[static_cast<size_t>(a)] - mean(a);
      for (int a = 0; a < w; ++a)
        for (int b = a; b < w; ++b) acc(a, b) += dev[static_cast<size_t>(a)] * dev[static_cast<size_t>(b)];
    }
  });
  Matrix cov = Matrix::Zero(w, w);
  for (const auto& p : partial_cov) cov += p;
  const double denom = n > 1 ? static_cast<double>(n - 1) : 1.0;
  for (int a = 0; a < w; ++a)
    for (int b = a; b < w; ++b) {
      cov(a, b) /= denom;
      cov(b, a) = cov(a, b);
    }
  return GaussianState(std::move(mean), std::move(cov));
}

CurveSample curve_sample(double t, const GaussianState& g, const GaussianState& target,
                         Metric metric) {
  const auto blocks = block_averages(g.cov());
  double dist = std::numeric_limits<double>::infinity();
  if (metric == Metric::KL) {
    dist = gaussian_kl(g, target);
  } else {
    try {
      dist = gaussian_l2_distance(g, target);
    } catch (const Error& e) {
      // A singular moment fit (point mass) has no L2 density.
      if (e.kind() != ErrorKind::SingularCovariance) throw;
    }
  }
  return {t, dist, g.mean().norm(), blocks.cxx, blocks.cxp, blocks.cpp};
}

RateFit fit_decay_rate(const DecayCurve& curve, double t_lo, double t_hi) {
  std::vector<double> ts;
  std::vector<double> ys;
  for (const auto& s : curve.samples) {
    if (s.t < t_lo || s.t > t_hi) continue;
    if (!(s.distance > 0.0))
      throw Error(ErrorKind::NonPositiveDistance, "distance <= 0 at t = " + std::to_string(s.t));
    ts.push_back(s.t);
    ys.push_back(std::log(s.distance));
  }
  const auto n = static_cast<int>(ts.size());
  if (n < 5) throw Error(ErrorKind::InsufficientData, "need >= 5 samples in the fit window");

  double t_mean = 0.0;
  double y_mean = 0.0;
  for (int i = 0; i < n; ++i) {
    t_mean += ts[static_cast<size_t>(i)];
    y_mean += ys[static_cast<size_t>(i)];
  }
  t_mean /= n;
  y_mean /= n;
  double sxx = 0.0;
  double sxy = 0.0;
  for (int i = 0; i < n; ++i) {
    const double dt = ts[static_cast<size_t>(i)] - t_mean;
    sxx += dt * dt;
    sxy += dt * (ys[static_cast<size_t>(i)] - y_mean);
  }
  if (!(sxx > 0.0)) throw Error(ErrorKind::InsufficientData, "fit window has no time spread");
  const double slope = sxy / sxx;
  double ssr = 0.0;
  for (int i = 0; i < n; ++i) {
    const double r = ys[static_cast<size_t>(i)] - (y_mean + slope * (ts[static_cast<size_t>(i)] - t_mean));
    ssr += r * r;
  }
  const double se = std::sqrt(ssr / (n - 2) / sxx);
  return {slope == 0.0 ? 0.0 : -slope, se, n};
}

Vector drift(const ModelParams& params, const Vector& z) {
  const int d = params.d();
  if (z.size() != 2 * d)
    throw Error(ErrorKind::DimensionMismatch, "phase-space vector must have length 2d");
  const double w2 = params.omega0() * params.omega0();
  Vector out(2 * d);
  out.head(d) = z.tail(d);
  out.tail(d) = -w2 * z.head(d) - params.effective_gamma() * z.tail(d);
  return out;
}

namespace {

void advance(const ModelParams& params, Ensemble& ens, double dt, int workers) {
  const int d = params.d();
  if (ens.width != 2 * d)
    throw Error(ErrorKind::DimensionMismatch, "ensemble width must be 2d");
  if (!(dt > 0.0)) throw Error(ErrorKind::NonPositiveInput, "dt must be > 0");

  const double w2 = params.omega0() * params.omega0();
  const double g = params.effective_gamma();
  const auto& D = params.diffusion();
  // xi = sqrt(k dt) * sqrt(D) * (n1, n2) per pair.
  const auto root = sqrt_psd_2x2(D.dqq, D.dpq, D.dpp);
  const double amp = std::sqrt(params.noise_factor() * dt);
  const double l11 = amp * root.s11, l12 = amp * root.s12, l22 = amp * root.s22;

  const Philox4x32 gen(ens.seed);
  const std::uint64_t step = ens.step_index;
  const auto step_lo = static_cast<std::uint32_t>(step);
  const auto step_hi = static_cast<std::uint32_t>(step >> 32);

  // Pair q = i*d + j draws its two normals from half of Philox call q/2.
  for_each_chunk(ens.size(), workers, [&](std::int64_t, std::int64_t begin, std::int64_t end) {
    const std::int64_t q0 = begin * d;
    const std::int64_t q1 = end * d;
    const std::int64_t first_call = q0 >> 1;
    const std::int64_t calls = ((q1 - 1) >> 1) - first_call + 1;
    std::vector<double> normals(static_cast<size_t>(4 * calls));
    for (std::int64_t c = 0; c < calls; ++c) {
      const std::int64_t call = first_call + c;
      const auto nz = normals4(gen, static_cast<std::uint32_t>(call), step_lo,
                               static_cast<std::uint32_t>(call >> 32) | (step_hi << 16),
                               Stream::Langevin);
      std::copy(nz.begin(), nz.end(), normals.begin() + 4 * c);
    }
    const double* nb = normals.data() + 2 * (q0 - 2 * first_call);
    for (std::int64_t i = begin; i < end; ++i) {
      double* z = ens.particles.data() + i * 2 * d;
      for (int j = 0; j < d; ++j, nb += 2) {
        const double x = z[j];
        const double p = z[d + j];
        z[j] = x + p * dt + (l11 * nb[0] + l12 * nb[1]);
        z[d + j] = p + (-w2 * x - g * p) * dt + (l12 * nb[0] + l22 * nb[1]);
      }
    }
  });
  ens.step_index += 1;
  ens.time = static_cast<double>(ens.step_index) * dt;
}

}  // namespace

Ensemble euler_maruyama_step(const ModelParams& params, Ensemble ens, double dt, int workers) {
  advance(params, ens, dt, workers);
  return ens;
}

DecayCurve simulate_decay(const ModelParams& params, const SimConfig& cfg,
                          const GaussianState& initial) {
  cfg.validate();
  if (initial.phase_dim() != params.phase_dim())
    throw Error(ErrorKind::DimensionMismatch, "initial state must have dimension 2d");
  const auto target = steady_covariance_lyapunov(params);

  Ensemble ens = sample_steady(initial, cfg.n_particles, cfg.seed, cfg.workers);
  DecayCurve curve;
  curve.metric = cfg.metric;
  curve.params_snapshot = params;

  const std::int64_t steps = cfg.total_steps();
  auto record = [&](double t) {
    auto s = curve_sample(t, empirical_gaussian(ens, cfg.workers), target, cfg.metric);
    if (std::isfinite(s.distance)) curve.samples.push_back(s);
  };
  record(0.0);
  for (std::int64_t k = 1; k <= steps; ++k) {
    advance(params, ens, cfg.dt, cfg.workers);
    if (k % cfg.record_every == 0) record(static_cast<double>(k) * cfg.dt);
  }
  return curve;
}

}  // namespace wfp
