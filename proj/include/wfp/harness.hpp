#pragma once

#include <nlohmann/json.hpp>
#include <optional>
#include <string>
#include <vector>

#include "wfp/dynamics.hpp"
#include "wfp/model.hpp"
#include "wfp/spectral.hpp"

namespace wfp::harness {

using json = nlohmann::ordered_json;

inline constexpr int kSchemaVersion = 1;

enum class Format { CSV, JSON };
std::string_view to_string(Format f);
Format parse_format(std::string_view s);

/// Initial phase-space state: mean (mean_x 1_d, mean_p 1_d) and a block
/// covariance that is either the Lyapunov steady state, zero, or explicit.
struct InitialSpec {
  enum class Cov { Steady, Zero, Explicit };
  double mean_x = 0.0;
  double mean_p = 0.0;
  Cov cov = Cov::Steady;
  BlockCov block{};

  GaussianState build(const ModelParams& params) const;
};

struct SgdSection {
  double s = 0.1;
  double hessian_scale = 1.0;
  double x0 = 1.0;
  /// Start from a point mass (false) or from N(x0 1_d, stationary cov).
  bool stationary_cov = false;
};

struct SweepAxis {
  std::string name;
  std::vector<double> values;
};

struct SweepSpec {
  std::vector<SweepAxis> axes;
  /// "none" or "equal_q" (sets Dpq = -gamma Dqq per cell).
  std::string constraint = "none";
  /// Adds the exact-moment fitted KL rate per cell.
  bool fit = false;
};

struct RunConfig {
  ModelParams model{1, 1.0, 1.0, DiffusionSpec{0.0, 0.0, 1.0}};
  SimConfig sim{};
  InitialSpec initial{};
  std::optional<std::pair<double, double>> fit_window;
  double prefactor_C = 1.0;
  double epsilon = 1e-3;
  SgdSection sgd{};
  std::string output_path;
  Format format = Format::CSV;
  std::optional<SweepSpec> sweep;

  std::pair<double, double> window() const {
    return fit_window.value_or(std::pair{0.0, sim.t_final});
  }
};

/// Default document with every recognised key.
json default_config_json();

/// Strict parse: unknown keys, wrong types and invalid values raise
/// Error(ConfigError). Model invariants surface as Error(ConfigError) too.
RunConfig parse_config(const json& doc);

/// Echo of every field, accepted back by parse_config.
json to_json(const RunConfig& cfg);

/// Sets doc at a dotted path such as "model.gamma"; the raw text is parsed as
/// JSON when possible, otherwise taken as a string.
void apply_override(json& doc, const std::string& dotted_path, const std::string& raw_value);

/// Output of one subcommand: the primary table/document and an optional
/// summary document.
struct CommandOutput {
  std::string primary;
  std::optional<std::string> summary;
};

struct RateRow {
  CaseTag case_tag;
  std::optional<SpectralResult> result;
  std::string skip_reason;
  std::vector<double> dense_spectrum;
  /// max |sorted dense spectrum - {lambda_lo x d, lambda_hi x d}|.
  std::optional<double> dense_check;
};

std::vector<RateRow> compute_rates(const ModelParams& params);

CommandOutput cmd_rates(const RunConfig& cfg);
CommandOutput cmd_steady_state(const RunConfig& cfg);
CommandOutput cmd_simulate(const RunConfig& cfg);
CommandOutput cmd_sgd(const RunConfig& cfg);
CommandOutput cmd_compare(const RunConfig& cfg);
CommandOutput cmd_sweep(const RunConfig& cfg);

/// 17 significant digits.
std::string format_double(double v);

std::string curve_csv(const DecayCurve& curve, std::string_view prefix_column = {},
                      std::string_view prefix_value = {});

/// Exit code for an error kind: 2 configuration, 3 numerical.
int exit_code_for(ErrorKind kind);

}  // namespace wfp::harness
