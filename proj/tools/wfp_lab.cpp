// wfp_lab: batch front-end for rates, steady states, simulations and sweeps.
//
//   wfp_lab <rates|steady-state|simulate|sgd|compare|sweep>
//           [--config PATH] [--out PATH] [--summary PATH] [--seed N]
//           [--format csv|json] [--workers N] [--model.gamma=2 ...]
//
// Dotted flags address the JSON config by path and win over the file.

#include <CLI11.hpp>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "wfp/error.hpp"
#include "wfp/harness.hpp"

namespace {

using wfp::Error;
using wfp::ErrorKind;
using namespace wfp::harness;

constexpr const char* kSections[] = {"model.", "sim.",    "conventions.", "mixing.",
                                     "sgd.",   "output.", "sweep."};

bool is_dotted(const std::string& arg) {
  if (arg.rfind("--", 0) != 0) return false;
  for (const char* s : kSections)
    if (arg.compare(2, std::string(s).size(), s) == 0) return true;
  return false;
}

struct Override {
  std::string path;
  std::string value;
};

/// Pulls --section.key=value / --section.key value out of argv.
std::vector<Override> take_overrides(std::vector<std::string>& args) {
  std::vector<Override> overrides;
  std::vector<std::string> rest;
  for (std::size_t i = 0; i < args.size(); ++i) {
    const std::string& a = args[i];
    if (!is_dotted(a)) {
      rest.push_back(a);
      continue;
    }
    const auto eq = a.find('=');
    if (eq != std::string::npos) {
      overrides.push_back({a.substr(2, eq - 2), a.substr(eq + 1)});
    } else {
      if (i + 1 >= args.size())
        throw Error(ErrorKind::ConfigError, "override " + a + " needs a value");
      overrides.push_back({a.substr(2), args[++i]});
    }
  }
  args = std::move(rest);
  return overrides;
}

json load_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::ConfigError, "cannot read config '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  json doc = json::parse(buf.str(), nullptr, /*allow_exceptions=*/false);
  if (doc.is_discarded()) throw Error(ErrorKind::ConfigError, "config '" + path + "' is not JSON");
  return doc;
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::ConfigError, "output path '" + path + "' is not writable");
  out << text;
  if (!out.flush()) throw Error(ErrorKind::ConfigError, "failed writing '" + path + "'");
}

int fail(int code, std::string_view kind, const std::string& message) {
  json err = {{"error", kind}, {"message", message}, {"exit_code", code}};
  std::cerr << err.dump() << "\n";
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  std::vector<Override> overrides;
  try {
    overrides = take_overrides(args);
  } catch (const Error& e) {
    return fail(2, to_string(e.kind()), e.what());
  }

  CLI::App app{"Harmonic Wigner-Fokker-Planck rate / steady-state / simulation harness"};
  app.require_subcommand(1);
  std::string config_path, out_path, summary_path, format;
  std::optional<std::uint64_t> seed;
  std::optional<int> workers;
  app.add_option("--config", config_path, "JSON config file");
  app.add_option("--out", out_path, "primary output file (default stdout)");
  app.add_option("--summary", summary_path, "summary JSON file (default <out>.summary.json)");
  app.add_option("--seed", seed, "RNG seed (sim.seed)");
  app.add_option("--format", format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
  app.add_option("--workers", workers, "worker threads (sim.workers)")->check(CLI::PositiveNumber);
  app.fallthrough();

  using Command = CommandOutput (*)(const RunConfig&);
  std::vector<std::pair<CLI::App*, Command>> commands = {
      {app.add_subcommand("rates", "closed-form decay rates per case"), cmd_rates},
      {app.add_subcommand("steady-state", "Lyapunov steady state and reconciliation"),
       cmd_steady_state},
      {app.add_subcommand("simulate", "Monte-Carlo decay curve and fitted rate"), cmd_simulate},
      {app.add_subcommand("sgd", "continuous-time SGD on a quadratic"), cmd_sgd},
      {app.add_subcommand("compare", "quantum vs classical analogue"), cmd_compare},
      {app.add_subcommand("sweep", "rates over a parameter grid"), cmd_sweep},
  };

  std::reverse(args.begin(), args.end());
  try {
    app.parse(args);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return fail(2, "ConfigError", e.what());
  }

  try {
    json doc = config_path.empty() ? json::object() : load_file(config_path);
    for (const auto& o : overrides) apply_override(doc, o.path, o.value);
    if (seed) doc["sim"]["seed"] = *seed;
    if (workers) doc["sim"]["workers"] = *workers;
    if (!format.empty()) doc["output"]["format"] = format;
    if (!out_path.empty()) doc["output"]["path"] = out_path;
    const RunConfig cfg = parse_config(doc);

    Command command = nullptr;
    for (const auto& [sub, fn] : commands)
      if (sub->parsed()) command = fn;
    const CommandOutput result = command(cfg);

    if (!cfg.output_path.empty()) {
      write_file(cfg.output_path, result.primary);
      if (result.summary)
        write_file(summary_path.empty() ? cfg.output_path + ".summary.json" : summary_path,
                   *result.summary);
    } else {
      std::cout << result.primary;
      if (result.summary && !summary_path.empty()) write_file(summary_path, *result.summary);
    }
    return 0;
  } catch (const Error& e) {
    return fail(exit_code_for(e.kind()), to_string(e.kind()), e.what());
  } catch (const std::exception& e) {
    return fail(3, "InternalError", e.what());
  }
}
