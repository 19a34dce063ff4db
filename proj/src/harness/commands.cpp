#include <algorithm>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "wfp/error.hpp"
#include "wfp/harness.hpp"
#include "wfp/linalg.hpp"
#include "wfp/parallel.hpp"
#include "wfp/steady_state.hpp"

namespace wfp::harness {

namespace {

constexpr CaseTag kAllCases[] = {CaseTag::GENERAL_D1,       CaseTag::UNIT_FREQUENCY,
                                 CaseTag::CALDEIRA_LEGGETT, CaseTag::EQUAL_Q,
                                 CaseTag::RESCALED_GENERAL, CaseTag::PERTURBATIVE};

constexpr double kDenseTolerance = 1e-10;

SpectralResult evaluate_case(CaseTag tag, const ModelParams& p) {
  switch (tag) {
    case CaseTag::GENERAL_D1: return eigenvalues_d1(p);
    case CaseTag::UNIT_FREQUENCY: return kappa_unit_frequency(p);
    case CaseTag::CALDEIRA_LEGGETT: return kappa_caldeira_leggett(p);
    case CaseTag::EQUAL_Q: return kappa_equal_q(p);
    case CaseTag::RESCALED_GENERAL: return kappa_rescaled_general(p);
    case CaseTag::PERTURBATIVE: return kappa_perturbative(p);
  }
  throw Error(ErrorKind::ConfigError, "unknown case");
}

json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json opt_number(const std::optional<double>& v) {
  return v ? number_or_null(*v) : json(nullptr);
}

json error_json(const Error& e) {
  return {{"error", to_string(e.kind())}, {"message", e.what()}};
}

json matrix_json(const Matrix& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(number_or_null(m(i, j)));
    rows.push_back(std::move(row));
  }
  return rows;
}

json block_json(const BlockCov& b) { return {{"cxx", b.cxx}, {"cxp", b.cxp}, {"cpp", b.cpp}}; }

std::string csv_cell(const json& v) {
  if (v.is_null()) return "";
  if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
  if (v.is_number_float()) return format_double(v.get<double>());
  if (v.is_number_unsigned()) return std::to_string(v.get<std::uint64_t>());
  if (v.is_number_integer()) return std::to_string(v.get<std::int64_t>());
  if (v.is_string()) {
    const auto s = v.get<std::string>();
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string quoted = "\"";
    for (char c : s) {
      if (c == '"') quoted += '"';
      quoted += c;
    }
    return quoted + "\"";
  }
  return v.dump();
}

/// Flat rows (all with the same keys, in order) to CSV.
std::string rows_csv(const std::vector<json>& rows, const std::vector<std::string>& header) {
  std::string out;
  for (std::size_t k = 0; k < header.size(); ++k) out += (k ? "," : "") + header[k];
  out += '\n';
  for (const json& row : rows) {
    for (std::size_t k = 0; k < header.size(); ++k) {
      if (k) out += ',';
      out += csv_cell(row.contains(header[k]) ? row.at(header[k]) : json(nullptr));
    }
    out += '\n';
  }
  return out;
}

std::vector<std::string> keys_of(const json& row) {
  std::vector<std::string> keys;
  for (const auto& [k, _] : row.items()) keys.push_back(k);
  return keys;
}

json param_columns(int d, double omega0, double gamma, double dqq, double dpq, double dpp,
                   const Conventions& c) {
  return {{"d", d},           {"omega0", omega0},
          {"gamma", gamma},   {"dqq", dqq},
          {"dpq", dpq},       {"dpp", dpp},
          {"q12_convention", to_string(c.q12)},
          {"noise_convention", to_string(c.noise)},
          {"friction_convention", to_string(c.friction)}};
}

json params_columns(const ModelParams& p) {
  const auto& D = p.diffusion();
  return param_columns(p.d(), p.omega0(), p.gamma(), D.dqq, D.dpq, D.dpp, p.conventions());
}

json rate_row_json(const RateRow& row) {
  json j;
  j["case"] = to_string(row.case_tag);
  j["status"] = row.result ? "ok" : "skipped";
  j["reason"] = row.skip_reason;
  const auto* r = row.result ? &*row.result : nullptr;
  j["lambda_plus"] = r ? number_or_null(r->lambda_plus) : json(nullptr);
  j["lambda_minus"] = r ? number_or_null(r->lambda_minus) : json(nullptr);
  j["kappa"] = r ? number_or_null(r->kappa) : json(nullptr);
  j["spectrum_preserving"] = r ? json(r->spectrum_preserving) : json(nullptr);
  j["approximate"] = r ? json(r->approximate) : json(nullptr);
  j["dense_min"] = row.dense_spectrum.empty() ? json(nullptr) : json(row.dense_spectrum.front());
  j["dense_max"] = row.dense_spectrum.empty() ? json(nullptr) : json(row.dense_spectrum.back());
  j["dense_check"] = opt_number(row.dense_check);
  if (r && r->spectrum_preserving && row.dense_check)
    j["dense_check_ok"] = *row.dense_check <= kDenseTolerance;
  else
    j["dense_check_ok"] = nullptr;
  return j;
}

json error_rate_row(CaseTag tag, const std::string& reason) {
  RateRow row{tag, std::nullopt, reason, {}, std::nullopt};
  json j = rate_row_json(row);
  j["status"] = "error";
  return j;
}

void merge_into(json& dst, const json& src) {
  for (const auto& [k, v] : src.items()) dst[k] = v;
}

json fit_json(const DecayCurve& curve, std::pair<double, double> window) {
  json j;
  j["window"] = {window.first, window.second};
  try {
    RateFit fit = fit_decay_rate(curve, window.first, window.second);
    j["rate"] = number_or_null(fit.rate);
    j["std_error"] = number_or_null(fit.std_error);
    j["points"] = fit.points;
  } catch (const Error& e) {
    j["rate"] = nullptr;
    j["std_error"] = nullptr;
    merge_into(j, error_json(e));
  }
  return j;
}

json analytic_json(const ModelParams& params, const RunConfig& cfg) {
  json j;
  try {
    SpectralResult r = eigenvalues_d1(params);
    j["case"] = to_string(r.case_tag);
    j["lambda_plus"] = r.lambda_plus;
    j["lambda_minus"] = r.lambda_minus;
    j["kappa"] = r.kappa;
    try {
      MixingEstimate m = mixing_time(r.kappa, cfg.prefactor_C, cfg.epsilon);
      j["mixing"] = {{"kappa", m.kappa},
                     {"prefactor_C", m.prefactor_C},
                     {"epsilon", m.epsilon},
                     {"t_mix", m.t_mix}};
    } catch (const Error& e) {
      j["mixing"] = error_json(e);
    }
  } catch (const Error& e) {
    j = error_json(e);
  }
  return j;
}

json curve_json(const DecayCurve& curve) {
  json samples = json::array();
  for (const auto& s : curve.samples)
    samples.push_back({{"t", s.t},
                       {"distance", number_or_null(s.distance)},
                       {"mean_norm", s.mean_norm},
                       {"cxx", s.cxx},
                       {"cxp", s.cxp},
                       {"cpp", s.cpp}});
  return {{"metric", to_string(curve.metric)}, {"samples", samples}};
}

json summary_header(const RunConfig& cfg, std::string_view command) {
  json j;
  j["schema_version"] = kSchemaVersion;
  j["command"] = command;
  j["config"] = to_json(cfg);
  return j;
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

GaussianState sgd_initial(const SgdSpec& spec, double x0, bool stationary) {
  Vector mean = Vector::Constant(spec.d, x0);
  if (stationary && !spec.degenerate()) return GaussianState(mean, sgd_stationary(spec).cov());
  return GaussianState(mean, Matrix::Zero(spec.d, spec.d));
}

std::vector<double> record_times(const SimConfig& sim) {
  std::vector<double> times{0.0};
  const std::int64_t steps = sim.total_steps();
  for (std::int64_t k = sim.record_every; k <= steps; k += sim.record_every)
    times.push_back(static_cast<double>(k) * sim.dt);
  return times;
}

}  // namespace

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string curve_csv(const DecayCurve& curve, std::string_view prefix_column,
                      std::string_view prefix_value) {
  std::string out;
  if (!prefix_column.empty()) out.append(prefix_column).append(",");
  out += "t,metric,distance,mean_norm,cxx,cxp,cpp\n";
  const std::string metric(to_string(curve.metric));
  for (const auto& s : curve.samples) {
    if (!prefix_column.empty()) out.append(prefix_value).append(",");
    out += format_double(s.t) + "," + metric + "," + format_double(s.distance) + "," +
           format_double(s.mean_norm) + "," + format_double(s.cxx) + "," +
           format_double(s.cxp) + "," + format_double(s.cpp) + "\n";
  }
  return out;
}

int exit_code_for(ErrorKind kind) {
  return kind == ErrorKind::ConfigError || kind == ErrorKind::InvalidParams ? 2 : 3;
}

std::vector<RateRow> compute_rates(const ModelParams& params) {
  std::vector<double> dense;
  try {
    dense = dense_spectrum_oracle(hessian_matrix(params));
  } catch (const Error&) {
    // Same failure resurfaces per case as its skip reason.
  }
  const int d = params.d();
  std::vector<RateRow> rows;
  for (CaseTag tag : kAllCases) {
    RateRow row{tag, std::nullopt, "", dense, std::nullopt};
    try {
      SpectralResult r = evaluate_case(tag, params);
      row.result = r;
      if (!dense.empty()) {
        const double lo = std::min(r.lambda_plus, r.lambda_minus);
        const double hi = std::max(r.lambda_plus, r.lambda_minus);
        double diff = 0.0;
        for (int k = 0; k < 2 * d; ++k)
          diff = std::max(diff, std::abs(dense[k] - (k < d ? lo : hi)));
        row.dense_check = diff;
      }
    } catch (const Error& e) {
      row.skip_reason = std::string(to_string(e.kind()));
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

CommandOutput cmd_rates(const RunConfig& cfg) {
  const ModelParams& p = cfg.model;
  const LindbladCheck lindblad = check_lindblad(p);
  std::vector<json> rows;
  for (const RateRow& r : compute_rates(p)) {
    json row = params_columns(p);
    row["lindblad_margin"] = lindblad.margin;
    row["lindblad_satisfied"] = lindblad.satisfied;
    merge_into(row, rate_row_json(r));
    rows.push_back(std::move(row));
  }
  if (cfg.format == Format::JSON) {
    json doc = summary_header(cfg, "rates");
    doc["rows"] = rows;
    return {dump(doc), std::nullopt};
  }
  return {rows_csv(rows, keys_of(rows.front())), std::nullopt};
}

CommandOutput cmd_steady_state(const RunConfig& cfg) {
  const ModelParams& p = cfg.model;
  const GaussianState steady = steady_covariance_lyapunov(p);
  json doc = summary_header(cfg, "steady-state");
  doc["lyapunov"] = {{"block", block_json(*steady.block_form())},
                     {"cov", matrix_json(steady.cov())},
                     {"residual", lyapunov_residual(p, steady.cov())}};
  const LindbladCheck lindblad = check_lindblad(p);
  doc["lindblad"] = {{"satisfied", lindblad.satisfied}, {"margin", lindblad.margin}};

  std::vector<json> table;
  auto add_matrix = [&](const char* name, const Matrix& m) {
    for (Eigen::Index i = 0; i < m.rows(); ++i)
      for (Eigen::Index j = 0; j < m.cols(); ++j)
        table.push_back({{"quantity", name}, {"i", i}, {"j", j}, {"value", number_or_null(m(i, j))}});
  };
  add_matrix("sigma_lyapunov", steady.cov());

  try {
    const QCoefficients q = q_coefficients(p);
    doc["exponent"] = {{"q11", q.q11}, {"q12", q.q12}, {"q22", q.q22}, {"q", q.q},
                       {"S", matrix_json(closed_form_exponent(p).S)}};
    add_matrix("S_closed_form", closed_form_exponent(p).S);
  } catch (const Error& e) {
    doc["exponent"] = error_json(e);
  }
  try {
    const ReconciliationReport rep = reconcile_steady_states(p);
    doc["reconciliation"] = {{"sigma_a", matrix_json(rep.sigma_a)},
                             {"sigma_l", matrix_json(rep.sigma_l)},
                             {"ratio", matrix_json(rep.ratio)},
                             {"scalar_fit", rep.scalar_fit},
                             {"scalar_deviation", rep.scalar_deviation},
                             {"entrywise_ratio", matrix_json(rep.entrywise_ratio)},
                             {"lyapunov_exponent", matrix_json(rep.lyapunov_exponent.S)}};
    add_matrix("sigma_a", rep.sigma_a);
    add_matrix("ratio", rep.ratio);
    add_matrix("S_lyapunov", rep.lyapunov_exponent.S);
  } catch (const Error& e) {
    doc["reconciliation"] = error_json(e);
  }
  if (cfg.format == Format::JSON) return {dump(doc), std::nullopt};
  return {rows_csv(table, {"quantity", "i", "j", "value"}), dump(doc)};
}

CommandOutput cmd_simulate(const RunConfig& cfg) {
  const ModelParams& p = cfg.model;
  const DecayCurve curve = simulate_decay(p, cfg.sim, cfg.initial.build(p));
  json summary = summary_header(cfg, "simulate");
  summary["fit"] = fit_json(curve, cfg.window());
  summary["analytic"] = analytic_json(p, cfg);
  summary["curve_points"] = curve.samples.size();
  if (cfg.format == Format::JSON) {
    json doc = summary_header(cfg, "simulate");
    doc["curve"] = curve_json(curve);
    return {dump(doc), dump(summary)};
  }
  return {curve_csv(curve), dump(summary)};
}

CommandOutput cmd_sgd(const RunConfig& cfg) {
  const SgdSpec spec{cfg.sgd.s, cfg.sgd.hessian_scale, cfg.model.d()};
  const SgdRun run =
      sgd_sde_simulate(spec, cfg.sim, sgd_initial(spec, cfg.sgd.x0, cfg.sgd.stationary_cov));
  const GaussianState final_state = empirical_gaussian(run.final_ensemble, cfg.sim.workers);

  json summary = summary_header(cfg, "sgd");
  summary["fit"] = fit_json(run.curve, cfg.window());
  summary["stationary_variance"] = {
      {"analytic", spec.s / (2.0 * spec.hessian_scale)},
      {"empirical", final_state.cov().diagonal().mean()}};
  summary["analytic_mean_rate"] = spec.hessian_scale;
  summary["curve_points"] = run.curve.samples.size();
  if (cfg.format == Format::JSON) {
    json doc = summary_header(cfg, "sgd");
    doc["curve"] = curve_json(run.curve);
    return {dump(doc), dump(summary)};
  }
  return {curve_csv(run.curve), dump(summary)};
}

CommandOutput cmd_compare(const RunConfig& cfg) {
  const ModelParams& p = cfg.model;
  const AnalogyMap map = sgd_analogy_map(p);

  const DecayCurve quantum = simulate_decay(p, cfg.sim, cfg.initial.build(p));
  json report = summary_header(cfg, "compare");
  report["dominance"] = map.dominance;
  report["regime"] = describe(map.regime);
  report["analogy"] = {{"s", map.spec.s},
                       {"hessian_scale", map.spec.hessian_scale},
                       {"friction_weight", map.friction_weight},
                       {"degenerate", map.degenerate}};
  report["quantum"] = {{"fit", fit_json(quantum, cfg.window())},
                       {"analytic", analytic_json(p, cfg)},
                       {"curve_points", quantum.samples.size()}};

  std::optional<DecayCurve> classical;
  if (map.degenerate) {
    report["classical"] = {{"skipped", true},
                           {"note", "degenerate analogy: Dpp = 0 gives learning rate s = 0"}};
  } else {
    // The classical relaxation runs on its own clock 1/hessian_scale.
    const double h = map.spec.hessian_scale;
    SimConfig sim = cfg.sim;
    sim.dt = std::min(cfg.sim.dt, 0.01 / h);
    sim.t_final = 250.0 * sim.dt;
    sim.record_every = 5;
    const SgdRun run =
        sgd_sde_simulate(map.spec, sim, sgd_initial(map.spec, cfg.sgd.x0, /*stationary=*/true));
    classical = run.curve;
    report["classical"] = {{"skipped", false},
                           {"dt", sim.dt},
                           {"t_final", sim.t_final},
                           {"fit", fit_json(run.curve, {0.0, sim.t_final})},
                           {"analytic_mean_rate", h},
                           {"curve_points", run.curve.samples.size()}};
  }

  if (cfg.format == Format::JSON) {
    json doc = report;
    doc["quantum"]["curve"] = curve_json(quantum);
    if (classical) doc["classical"]["curve"] = curve_json(*classical);
    return {dump(doc), dump(report)};
  }
  std::string csv = curve_csv(quantum, "side", "quantum");
  if (classical) {
    std::string c = curve_csv(*classical, "side", "classical");
    csv += c.substr(c.find('\n') + 1);
  }
  return {csv, dump(report)};
}

CommandOutput cmd_sweep(const RunConfig& cfg) {
  if (!cfg.sweep) throw Error(ErrorKind::ConfigError, "sweep requires a sweep section");
  const SweepSpec& sweep = *cfg.sweep;
  std::int64_t cells = 1;
  for (const auto& axis : sweep.axes) {
    if (axis.values.empty())
      throw Error(ErrorKind::ConfigError, "sweep axis '" + axis.name + "' is empty");
    cells *= static_cast<std::int64_t>(axis.values.size());
  }

  const ModelParams& base = cfg.model;
  std::vector<std::vector<json>> per_cell(static_cast<std::size_t>(cells));
  for_each_index(cells, cfg.sim.workers, [&](std::int64_t cell) {
    double d = base.d(), omega0 = base.omega0(), gamma = base.gamma();
    double dqq = base.diffusion().dqq, dpq = base.diffusion().dpq, dpp = base.diffusion().dpp;
    std::int64_t rest = cell;
    for (std::size_t a = sweep.axes.size(); a-- > 0;) {
      const auto& axis = sweep.axes[a];
      const auto n = static_cast<std::int64_t>(axis.values.size());
      const double v = axis.values[static_cast<std::size_t>(rest % n)];
      rest /= n;
      if (axis.name == "model.d") d = v;
      else if (axis.name == "model.omega0") omega0 = v;
      else if (axis.name == "model.gamma") gamma = v;
      else if (axis.name == "model.dqq") dqq = v;
      else if (axis.name == "model.dpq") dpq = v;
      else if (axis.name == "model.dpp") dpp = v;
    }
    if (sweep.constraint == "equal_q") dpq = -gamma * dqq;

    const int d_int = static_cast<int>(d);
    json prefix = {{"cell", cell}};
    merge_into(prefix, param_columns(d_int, omega0, gamma, dqq, dpq, dpp, base.conventions()));
    if (d != std::floor(d)) prefix["d"] = d;

    auto& out = per_cell[static_cast<std::size_t>(cell)];
    std::optional<ModelParams> params;
    std::string cell_error;
    try {
      if (d != std::floor(d) || d < 1 || d > 4096)
        throw Error(ErrorKind::InvalidParams, "d must be a positive integer");
      params.emplace(d_int, omega0, gamma, DiffusionSpec{dqq, dpq, dpp}, base.conventions());
    } catch (const Error& e) {
      cell_error = std::string(to_string(e.kind()));
    }

    json lindblad_cols;
    json fit_cols = {{"fitted_rate", nullptr}, {"fit_std_error", nullptr}, {"fit_status", nullptr}};
    if (params) {
      const LindbladCheck l = check_lindblad(*params);
      lindblad_cols = {{"lindblad_margin", l.margin}, {"lindblad_satisfied", l.satisfied}};
      if (sweep.fit) {
        try {
          const auto times = record_times(cfg.sim);
          const DecayCurve curve =
              exact_decay_curve(*params, cfg.initial.build(*params), times, cfg.sim.metric);
          const auto w = cfg.window();
          const RateFit fit = fit_decay_rate(curve, w.first, w.second);
          fit_cols = {{"fitted_rate", fit.rate}, {"fit_std_error", fit.std_error}, {"fit_status", "ok"}};
        } catch (const Error& e) {
          fit_cols["fit_status"] = to_string(e.kind());
        }
      }
    } else {
      lindblad_cols = {{"lindblad_margin", nullptr}, {"lindblad_satisfied", nullptr}};
    }

    if (params) {
      for (const RateRow& r : compute_rates(*params)) {
        json row = prefix;
        merge_into(row, lindblad_cols);
        merge_into(row, rate_row_json(r));
        if (sweep.fit) merge_into(row, fit_cols);
        out.push_back(std::move(row));
      }
    } else {
      for (CaseTag tag : kAllCases) {
        json row = prefix;
        merge_into(row, lindblad_cols);
        merge_into(row, error_rate_row(tag, cell_error));
        if (sweep.fit) merge_into(row, fit_cols);
        out.push_back(std::move(row));
      }
    }
  });

  std::vector<json> rows;
  for (auto& cell_rows : per_cell)
    for (auto& row : cell_rows) rows.push_back(std::move(row));
  if (cfg.format == Format::JSON) {
    json doc = summary_header(cfg, "sweep");
    doc["cells"] = cells;
    doc["rows"] = rows;
    return {dump(doc), std::nullopt};
  }
  return {rows_csv(rows, keys_of(rows.front())), std::nullopt};
}

}  // namespace wfp::harness
