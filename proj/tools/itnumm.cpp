// itnumm: batch front-end (solve | density | validate | converge).
#include <exception>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "itnumm/commands.hpp"
#include "itnumm/error.hpp"
#include "itnumm/parallel.hpp"

namespace {

constexpr int kExitNumeric = 1;
constexpr int kExitConfig = 2;

void emit(const nlohmann::ordered_json& j, const std::string& path) {
  if (path.empty()) {
    std::cout << j.dump(2) << '\n';
    return;
  }
  std::ofstream os(path);
  if (!os) throw itnumm::ConfigError("cannot write " + path);
  os << j.dump(2) << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Eigenstates of trapped particles from the imaginary-time propagator on "
               "Boltzmann-distributed meshes"};
  app.require_subcommand(1);
  int threads = 0;
  app.add_option("--threads", threads, "worker threads (default: ITNUMM_THREADS or all cores)")
      ->check(CLI::NonNegativeNumber);

  auto* solve = app.add_subcommand("solve", "run the pipeline for a configuration or manifest");
  std::string config_path;
  std::string out_dir;
  solve->add_option("config", config_path, "JSON configuration")->required();
  solve->add_option("-o,--output", out_dir, "override output.directory");

  auto* density = app.add_subcommand("density", "one-body densities from a solve artifact");
  std::string artifact;
  std::optional<int> state;
  std::vector<double> thermal;
  std::string statistics = "distinguishable";
  density->add_option("artifact", artifact, "artifact directory written by solve")->required();
  auto* state_opt = density->add_option("--state", state, "state index");
  auto* thermal_opt =
      density->add_option("--thermal", thermal, "hbar*omega*beta values")->expected(1, -1);
  state_opt->excludes(thermal_opt);
  density->add_option("--statistics", statistics, "distinguishable, boson or fermion");

  auto* validate = app.add_subcommand("validate", "compare against the oracles");
  std::string suite;
  std::string report_path;
  itnumm::ValidateOptions vopt;
  validate->add_option("suite", suite, "ho, lj2, dense or all")->required();
  validate->add_option("--output", report_path, "write the JSON report here instead of stdout");
  validate->add_option("--lj2-n", vopt.lj2_N, "mesh size for lj2");
  validate->add_option("--lj2-dtau", vopt.lj2_dtau, "dtau for lj2 in units of hbar/eps");
  validate->add_option("--seed", vopt.seed, "mesh seed for lj2");

  auto* converge = app.add_subcommand("converge", "ground-state error against mesh size");
  std::string conv_config;
  std::vector<int> sizes{50, 100, 200, 400, 800};
  std::string policy = "constant_guard";
  converge->add_option("config", conv_config, "1D JSON configuration")->required();
  converge->add_option("-N,--sizes", sizes, "mesh sizes")->expected(1, -1);
  converge->add_option("--policy", policy, "dtau policy: fixed, constant_guard, guard_triggered");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (threads > 0) itnumm::set_thread_count(static_cast<unsigned>(threads));

    if (solve->parsed()) {
      itnumm::RunConfig cfg = itnumm::load_config(config_path);
      if (!out_dir.empty()) {
        cfg.output.directory = out_dir;
        cfg.source["output"]["directory"] = out_dir;
      }
      const auto dir = itnumm::cmd_solve(cfg);
      std::cerr << "wrote " << dir.string() << '\n';
      return 0;
    }
    if (density->parsed()) {
      itnumm::DensityRequest req;
      req.state = state;
      req.thermal = thermal;
      req.statistics = itnumm::statistics_from_string(statistics);
      emit(itnumm::cmd_density(artifact, req), "");
      return 0;
    }
    if (validate->parsed()) {
      bool passed = false;
      emit(itnumm::cmd_validate(suite, vopt, passed), report_path);
      return passed ? 0 : kExitNumeric;
    }
    if (converge->parsed()) {
      itnumm::DtauPolicy pol;
      if (policy == "fixed")
        pol.kind = itnumm::DtauPolicy::Kind::fixed;
      else if (policy == "constant_guard")
        pol.kind = itnumm::DtauPolicy::Kind::constant_guard;
      else if (policy == "guard_triggered")
        pol.kind = itnumm::DtauPolicy::Kind::guard_triggered;
      else
        throw itnumm::ConfigError("--policy: unknown value '" + policy + "'");
      const itnumm::RunConfig cfg = itnumm::load_config(conv_config);
      emit(itnumm::cmd_converge(cfg, sizes, pol), "");
      return 0;
    }
  } catch (const itnumm::ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitNumeric;
  }
  return 0;
}
