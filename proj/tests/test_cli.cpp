#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

#include <nlohmann/json.hpp>

#ifndef WFP_LAB_PATH
#error "WFP_LAB_PATH must point at the wfp_lab binary"
#endif

namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

fs::path scratch() {
  static fs::path dir = [] {
    fs::path d = fs::temp_directory_path() / ("wfp_cli_" + std::to_string(::getpid()));
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

Run run(const std::string& args) {
  const fs::path out = scratch() / "stdout", err = scratch() / "stderr";
  const std::string cmd = std::string(WFP_LAB_PATH) + " " + args + " >" + out.string() + " 2>" +
                          err.string();
  const int status = std::system(cmd.c_str());
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, slurp(out), slurp(err)};
}

void write(const fs::path& p, const std::string& text) { std::ofstream(p) << text; }

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("rates to stdout") {
  Run r = run("rates --model.gamma=1 --model.dqq=1 --model.dpq=-1 --model.dpp=2");
  CHECK(r.code == 0);
  CHECK(r.err.empty());
  CHECK(r.out.find("GENERAL_D1,ok") != std::string::npos);
  Run j = run("rates --format json");
  CHECK(j.code == 0);
  CHECK(nlohmann::json::parse(j.out)["schema_version"] == 1);
}

TEST_CASE("config file plus overrides") {
  const fs::path cfg = scratch() / "cfg.json";
  write(cfg, R"({"model": {"gamma": 3, "dqq": 0, "dpp": 1}})");
  Run r = run("rates --config " + cfg.string() + " --model.gamma 2");
  CHECK(r.code == 0);
  // Both Caldeira roots equal gamma = 2 here (the override wins over the file).
  CHECK(r.out.find("CALDEIRA_LEGGETT,ok,,2,2,2,") != std::string::npos);
}

TEST_CASE("config errors exit 2 with a JSON error object") {
  Run bad_key = run("rates --model.hbar=1");
  CHECK(bad_key.code == 2);
  auto err = nlohmann::json::parse(bad_key.err);
  CHECK(err["error"] == "ConfigError");
  CHECK(err["exit_code"] == 2);

  Run bad_value = run("rates --model.gamma=-1");
  CHECK(bad_value.code == 2);
  CHECK(nlohmann::json::parse(bad_value.err)["error"] == "InvalidParams");

  CHECK(run("rates --config /nonexistent/x.json").code == 2);
  CHECK(run("frobnicate").code == 2);
  CHECK(run("rates --format xml").code == 2);
  CHECK(run("rates --out /nonexistent/dir/out.csv").code == 2);

  const fs::path cfg = scratch() / "empty_axis.json";
  write(cfg, R"({"sweep": {"axes": [{"name": "d", "values": []}]}})");
  CHECK(run("sweep --config " + cfg.string()).code == 2);
}

TEST_CASE("numerical errors exit 3") {
  Run r = run("steady-state --model.dpp=0");
  CHECK(r.code == 3);
  CHECK(nlohmann::json::parse(r.err)["error"] == "NotStationary");
}

TEST_CASE("simulate writes the curve and summary; reruns are byte-identical") {
  const std::string common =
      " --model.d=2 --sim.dt=0.01 --sim.t_final=1 --sim.n_particles=3000 --sim.record_every=10"
      " --sim.initial.mean_x=2";
  const fs::path a = scratch() / "a.csv", b = scratch() / "b.csv", c = scratch() / "c.csv";
  REQUIRE(run("simulate" + common + " --seed 17 --out " + a.string()).code == 0);
  REQUIRE(run("simulate" + common + " --seed 17 --out " + b.string()).code == 0);
  REQUIRE(run("simulate" + common + " --seed 17 --workers 4 --out " + c.string()).code == 0);
  CHECK(slurp(a) == slurp(b));
  CHECK(slurp(a) == slurp(c));
  CHECK(slurp(a).rfind("t,metric,distance,mean_norm,cxx,cxp,cpp\n", 0) == 0);
  auto summary = nlohmann::json::parse(slurp(a.string() + ".summary.json"));
  CHECK(summary["schema_version"] == 1);
  CHECK(summary["config"]["sim"]["seed"] == 17);
  CHECK(summary["config"]["model"]["d"] == 2);
  auto other = nlohmann::json::parse(slurp(b.string() + ".summary.json"));
  other["config"]["output"]["path"] = summary["config"]["output"]["path"];
  CHECK(other == summary);

  REQUIRE(run("simulate" + common + " --seed 18 --out " + b.string()).code == 0);
  CHECK(slurp(a) != slurp(b));
}

TEST_CASE("steady-state, sgd, compare and sweep run") {
  CHECK(run("steady-state --model.dqq=1 --model.dpq=-1 --model.dpp=2 --format json").code == 0);
  CHECK(run("sgd --sim.t_final=0.5 --sim.dt=0.01 --sim.n_particles=500").code == 0);
  CHECK(run("compare --sim.t_final=0.5 --sim.dt=0.01 --sim.n_particles=500 --model.dqq=0").code == 0);
  const fs::path cfg = scratch() / "sweep.json";
  write(cfg, R"({"sweep": {"axes": [{"name": "d", "values": [1, 2]}, {"name": "gamma", "values": [1, 2]}]}})");
  Run s = run("sweep --config " + cfg.string());
  CHECK(s.code == 0);
  CHECK(std::count(s.out.begin(), s.out.end(), '\n') == 1 + 4 * 6);
}

}  // TEST_SUITE
