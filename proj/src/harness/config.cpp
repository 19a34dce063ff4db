#include <algorithm>
#include <cmath>
#include <initializer_list>
#include <set>
#include <string>

#include "wfp/error.hpp"
#include "wfp/harness.hpp"

namespace wfp::harness {

namespace {

[[noreturn]] void config_error(const std::string& message) {
  throw Error(ErrorKind::ConfigError, message);
}

void require_object(const json& j, const std::string& where) {
  if (!j.is_object()) config_error(where + " must be an object");
}

void reject_unknown(const json& j, const std::string& where,
                    std::initializer_list<const char*> allowed) {
  for (const auto& [key, _] : j.items()) {
    bool ok = std::any_of(allowed.begin(), allowed.end(),
                          [&](const char* a) { return key == a; });
    if (!ok) config_error("unknown key '" + where + "." + key + "'");
  }
}

double get_number(const json& j, const char* key, double fallback, const std::string& where) {
  if (!j.contains(key)) return fallback;
  const json& v = j.at(key);
  if (!v.is_number()) config_error(where + "." + key + " must be a number");
  double x = v.get<double>();
  if (!std::isfinite(x)) config_error(where + "." + key + " must be finite");
  return x;
}

std::int64_t get_integer(const json& j, const char* key, std::int64_t fallback,
                         const std::string& where) {
  if (!j.contains(key)) return fallback;
  const json& v = j.at(key);
  if (v.is_number_integer()) return v.get<std::int64_t>();
  if (v.is_number_float()) {
    double x = v.get<double>();
    if (std::isfinite(x) && x == std::floor(x) && std::abs(x) < 9.0e15)
      return static_cast<std::int64_t>(x);
  }
  config_error(where + "." + key + " must be an integer");
}

std::uint64_t get_seed(const json& j, const char* key, std::uint64_t fallback,
                       const std::string& where) {
  if (!j.contains(key)) return fallback;
  const json& v = j.at(key);
  if (v.is_number_unsigned()) return v.get<std::uint64_t>();
  if (v.is_number_integer() && v.get<std::int64_t>() >= 0)
    return static_cast<std::uint64_t>(v.get<std::int64_t>());
  config_error(where + "." + key + " must be a non-negative integer");
}

std::string get_string(const json& j, const char* key, const std::string& fallback,
                       const std::string& where) {
  if (!j.contains(key)) return fallback;
  const json& v = j.at(key);
  if (!v.is_string()) config_error(where + "." + key + " must be a string");
  return v.get<std::string>();
}

bool get_bool(const json& j, const char* key, bool fallback, const std::string& where) {
  if (!j.contains(key)) return fallback;
  const json& v = j.at(key);
  if (!v.is_boolean()) config_error(where + "." + key + " must be a boolean");
  return v.get<bool>();
}

const json& section(const json& doc, const char* key) {
  static const json empty = json::object();
  if (!doc.contains(key)) return empty;
  require_object(doc.at(key), key);
  return doc.at(key);
}

const std::set<std::string>& sweepable() {
  static const std::set<std::string> names{"model.d",   "model.omega0", "model.gamma",
                                           "model.dqq", "model.dpq",    "model.dpp"};
  return names;
}

}  // namespace

std::string_view to_string(Format f) { return f == Format::CSV ? "csv" : "json"; }

Format parse_format(std::string_view s) {
  if (s == "csv" || s == "CSV") return Format::CSV;
  if (s == "json" || s == "JSON") return Format::JSON;
  throw Error(ErrorKind::ConfigError, "unknown output format '" + std::string(s) + "'");
}

GaussianState InitialSpec::build(const ModelParams& params) const {
  const int d = params.d();
  Vector mean(2 * d);
  mean.head(d).setConstant(mean_x);
  mean.tail(d).setConstant(mean_p);
  switch (cov) {
    case Cov::Steady:
      return GaussianState::from_block(d, mean, *steady_covariance_lyapunov(params).block_form());
    case Cov::Zero:
      return GaussianState::from_block(d, mean, BlockCov{0.0, 0.0, 0.0});
    case Cov::Explicit:
      return GaussianState::from_block(d, mean, block);
  }
  return GaussianState::from_block(d, mean, block);
}

json default_config_json() { return to_json(RunConfig{}); }

RunConfig parse_config(const json& doc) {
  require_object(doc, "config");
  reject_unknown(doc, "config",
                 {"schema_version", "model", "conventions", "sim", "mixing", "sgd", "output",
                  "sweep"});
  RunConfig cfg;

  const json& conv = section(doc, "conventions");
  reject_unknown(conv, "conventions", {"q12", "noise", "friction"});
  Conventions conventions;
  conventions.q12 =
      parse_q12_convention(get_string(conv, "q12", std::string(to_string(conventions.q12)), "conventions"));
  conventions.noise = parse_noise_convention(
      get_string(conv, "noise", std::string(to_string(conventions.noise)), "conventions"));
  conventions.friction = parse_friction_convention(
      get_string(conv, "friction", std::string(to_string(conventions.friction)), "conventions"));

  const json& model = section(doc, "model");
  reject_unknown(model, "model", {"d", "omega0", "gamma", "dqq", "dpq", "dpp"});
  const ModelParams& m0 = cfg.model;
  std::int64_t d = get_integer(model, "d", m0.d(), "model");
  if (d < 1 || d > 4096) config_error("model.d must be in [1, 4096]");
  DiffusionSpec diff{get_number(model, "dqq", m0.diffusion().dqq, "model"),
                     get_number(model, "dpq", m0.diffusion().dpq, "model"),
                     get_number(model, "dpp", m0.diffusion().dpp, "model")};
  cfg.model = ModelParams(static_cast<int>(d), get_number(model, "omega0", m0.omega0(), "model"),
                          get_number(model, "gamma", m0.gamma(), "model"), diff, conventions);

  const json& sim = section(doc, "sim");
  reject_unknown(sim, "sim",
                 {"dt", "t_final", "n_particles", "seed", "record_every", "metric", "workers",
                  "fit_window", "initial"});
  SimConfig& s = cfg.sim;
  s.dt = get_number(sim, "dt", s.dt, "sim");
  s.t_final = get_number(sim, "t_final", s.t_final, "sim");
  s.n_particles = get_integer(sim, "n_particles", s.n_particles, "sim");
  s.seed = get_seed(sim, "seed", s.seed, "sim");
  std::int64_t record_every = get_integer(sim, "record_every", s.record_every, "sim");
  if (record_every < 1 || record_every > (1LL << 30)) config_error("sim.record_every must be >= 1");
  s.record_every = static_cast<int>(record_every);
  s.metric = parse_metric(get_string(sim, "metric", std::string(to_string(s.metric)), "sim"));
  std::int64_t workers = get_integer(sim, "workers", s.workers, "sim");
  if (workers < 1 || workers > 1024) config_error("sim.workers must be in [1, 1024]");
  s.workers = static_cast<int>(workers);
  s.validate();

  if (sim.contains("fit_window") && !sim.at("fit_window").is_null()) {
    const json& w = sim.at("fit_window");
    if (!w.is_array() || w.size() != 2 || !w[0].is_number() || !w[1].is_number())
      config_error("sim.fit_window must be [t_lo, t_hi]");
    double lo = w[0].get<double>(), hi = w[1].get<double>();
    if (!(lo < hi)) config_error("sim.fit_window needs t_lo < t_hi");
    cfg.fit_window = std::pair{lo, hi};
  }

  if (sim.contains("initial")) {
    const json& init = sim.at("initial");
    require_object(init, "sim.initial");
    reject_unknown(init, "sim.initial", {"mean_x", "mean_p", "cov"});
    cfg.initial.mean_x = get_number(init, "mean_x", 0.0, "sim.initial");
    cfg.initial.mean_p = get_number(init, "mean_p", 0.0, "sim.initial");
    if (init.contains("cov")) {
      const json& c = init.at("cov");
      if (c.is_string()) {
        const auto name = c.get<std::string>();
        if (name == "steady") cfg.initial.cov = InitialSpec::Cov::Steady;
        else if (name == "zero") cfg.initial.cov = InitialSpec::Cov::Zero;
        else config_error("sim.initial.cov must be \"steady\", \"zero\" or {cxx,cxp,cpp}");
      } else {
        require_object(c, "sim.initial.cov");
        reject_unknown(c, "sim.initial.cov", {"cxx", "cxp", "cpp"});
        cfg.initial.cov = InitialSpec::Cov::Explicit;
        cfg.initial.block = BlockCov{get_number(c, "cxx", 0.0, "sim.initial.cov"),
                                     get_number(c, "cxp", 0.0, "sim.initial.cov"),
                                     get_number(c, "cpp", 0.0, "sim.initial.cov")};
        const BlockCov& b = cfg.initial.block;
        if (b.cxx < 0 || b.cpp < 0 || b.cxx * b.cpp - b.cxp * b.cxp < -1e-12 * (b.cxx * b.cpp + 1))
          config_error("sim.initial.cov is not positive semidefinite");
      }
    }
  }

  const json& mixing = section(doc, "mixing");
  reject_unknown(mixing, "mixing", {"prefactor_C", "epsilon"});
  cfg.prefactor_C = get_number(mixing, "prefactor_C", cfg.prefactor_C, "mixing");
  cfg.epsilon = get_number(mixing, "epsilon", cfg.epsilon, "mixing");
  if (cfg.prefactor_C <= 0 || cfg.epsilon <= 0)
    config_error("mixing.prefactor_C and mixing.epsilon must be positive");

  const json& sgd = section(doc, "sgd");
  reject_unknown(sgd, "sgd", {"s", "hessian_scale", "x0", "start"});
  cfg.sgd.s = get_number(sgd, "s", cfg.sgd.s, "sgd");
  cfg.sgd.hessian_scale = get_number(sgd, "hessian_scale", cfg.sgd.hessian_scale, "sgd");
  cfg.sgd.x0 = get_number(sgd, "x0", cfg.sgd.x0, "sgd");
  const auto start = get_string(sgd, "start", "point", "sgd");
  if (start != "point" && start != "stationary") config_error("sgd.start must be point|stationary");
  cfg.sgd.stationary_cov = start == "stationary";
  if (cfg.sgd.s < 0) config_error("sgd.s must be non-negative");
  if (cfg.sgd.hessian_scale <= 0) config_error("sgd.hessian_scale must be positive");

  const json& output = section(doc, "output");
  reject_unknown(output, "output", {"path", "format"});
  cfg.output_path = get_string(output, "path", "", "output");
  cfg.format = parse_format(get_string(output, "format", "csv", "output"));

  if (doc.contains("sweep") && !doc.at("sweep").is_null()) {
    const json& sw = doc.at("sweep");
    require_object(sw, "sweep");
    reject_unknown(sw, "sweep", {"axes", "constraint", "fit"});
    SweepSpec spec;
    if (!sw.contains("axes") || !sw.at("axes").is_array() || sw.at("axes").empty())
      config_error("sweep.axes must be a non-empty array");
    for (const json& axis : sw.at("axes")) {
      require_object(axis, "sweep.axes[]");
      reject_unknown(axis, "sweep.axes[]", {"name", "values"});
      SweepAxis a;
      a.name = get_string(axis, "name", "", "sweep.axes[]");
      if (a.name.find('.') == std::string::npos) a.name = "model." + a.name;
      if (!sweepable().contains(a.name)) config_error("sweep axis '" + a.name + "' is not a parameter");
      if (std::any_of(spec.axes.begin(), spec.axes.end(),
                      [&](const SweepAxis& o) { return o.name == a.name; }))
        config_error("sweep axis '" + a.name + "' given twice");
      if (!axis.contains("values") || !axis.at("values").is_array() || axis.at("values").empty())
        config_error("sweep axis '" + a.name + "' has no values");
      for (const json& v : axis.at("values")) {
        if (!v.is_number() || !std::isfinite(v.get<double>()))
          config_error("sweep axis '" + a.name + "' values must be finite numbers");
        a.values.push_back(v.get<double>());
      }
      spec.axes.push_back(std::move(a));
    }
    spec.constraint = get_string(sw, "constraint", "none", "sweep");
    if (spec.constraint != "none" && spec.constraint != "equal_q")
      config_error("sweep.constraint must be none|equal_q");
    if (spec.constraint == "equal_q" &&
        std::any_of(spec.axes.begin(), spec.axes.end(),
                    [](const SweepAxis& a) { return a.name == "model.dpq"; }))
      config_error("sweep.constraint equal_q fixes model.dpq; it cannot also be an axis");
    spec.fit = get_bool(sw, "fit", false, "sweep");
    std::size_t cells = 1;
    for (const auto& a : spec.axes) {
      cells *= a.values.size();
      if (cells > 1'000'000) config_error("sweep grid exceeds 1e6 cells");
    }
    cfg.sweep = std::move(spec);
  }
  return cfg;
}

json to_json(const RunConfig& cfg) {
  const ModelParams& m = cfg.model;
  json doc;
  doc["schema_version"] = kSchemaVersion;
  doc["model"] = {{"d", m.d()},
                  {"omega0", m.omega0()},
                  {"gamma", m.gamma()},
                  {"dqq", m.diffusion().dqq},
                  {"dpq", m.diffusion().dpq},
                  {"dpp", m.diffusion().dpp}};
  doc["conventions"] = {{"q12", to_string(m.conventions().q12)},
                        {"noise", to_string(m.conventions().noise)},
                        {"friction", to_string(m.conventions().friction)}};
  const SimConfig& s = cfg.sim;
  json init = {{"mean_x", cfg.initial.mean_x}, {"mean_p", cfg.initial.mean_p}};
  switch (cfg.initial.cov) {
    case InitialSpec::Cov::Steady: init["cov"] = "steady"; break;
    case InitialSpec::Cov::Zero: init["cov"] = "zero"; break;
    case InitialSpec::Cov::Explicit:
      init["cov"] = {{"cxx", cfg.initial.block.cxx},
                     {"cxp", cfg.initial.block.cxp},
                     {"cpp", cfg.initial.block.cpp}};
      break;
  }
  doc["sim"] = {{"dt", s.dt},
                {"t_final", s.t_final},
                {"n_particles", s.n_particles},
                {"seed", s.seed},
                {"record_every", s.record_every},
                {"metric", to_string(s.metric)},
                {"workers", s.workers},
                {"initial", init}};
  if (cfg.fit_window) doc["sim"]["fit_window"] = {cfg.fit_window->first, cfg.fit_window->second};
  doc["mixing"] = {{"prefactor_C", cfg.prefactor_C}, {"epsilon", cfg.epsilon}};
  doc["sgd"] = {{"s", cfg.sgd.s},
                {"hessian_scale", cfg.sgd.hessian_scale},
                {"x0", cfg.sgd.x0},
                {"start", cfg.sgd.stationary_cov ? "stationary" : "point"}};
  doc["output"] = {{"path", cfg.output_path}, {"format", to_string(cfg.format)}};
  if (cfg.sweep) {
    json axes = json::array();
    for (const auto& a : cfg.sweep->axes) axes.push_back({{"name", a.name}, {"values", a.values}});
    doc["sweep"] = {{"axes", axes}, {"constraint", cfg.sweep->constraint}, {"fit", cfg.sweep->fit}};
  }
  return doc;
}

void apply_override(json& doc, const std::string& dotted_path, const std::string& raw_value) {
  if (dotted_path.empty() || dotted_path.front() == '.' || dotted_path.back() == '.')
    config_error("malformed override path '" + dotted_path + "'");
  json value = json::parse(raw_value, nullptr, /*allow_exceptions=*/false);
  if (value.is_discarded()) value = raw_value;

  json* node = &doc;
  std::size_t start = 0;
  while (true) {
    std::size_t dot = dotted_path.find('.', start);
    std::string key = dotted_path.substr(start, dot - start);
    if (key.empty()) config_error("malformed override path '" + dotted_path + "'");
    if (!node->is_object()) {
      if (!node->is_null()) config_error("override path '" + dotted_path + "' crosses a value");
      *node = json::object();
    }
    if (dot == std::string::npos) {
      (*node)[key] = value;
      return;
    }
    node = &(*node)[key];
    start = dot + 1;
  }
}

}  // namespace wfp::harness
