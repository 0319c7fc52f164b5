#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "itnumm/config.hpp"
#include "itnumm/oracle.hpp"

namespace itnumm {

// Runs the full pipeline and writes the artifact directory. Output goes to
// `<dir>.partial` first and is moved into place only on success.
std::filesystem::path cmd_solve(const RunConfig& config);

struct DensityRequest {
  std::optional<int> state;
  std::vector<double> thermal;  // hbar omega beta values
  Statistics statistics = Statistics::distinguishable;
};

// Reads a solve artifact directory, writes density_<n>.csv or
// thermal_<beta>.csv files and density_summary.json. Returns the summary.
nlohmann::ordered_json cmd_density(const std::filesystem::path& artifact,
                                   const DensityRequest& request);

struct ValidateOptions {
  int lj2_N = 6709;
  double lj2_dtau = 0.15;  // units of hbar/eps
  unsigned long long seed = 1;
};

// Oracle comparisons; `passed` is set from the individual checks.
nlohmann::ordered_json cmd_validate(const std::string& suite, const ValidateOptions& options,
                                    bool& passed);

// Convergence sweep over N for a 1D configuration.
nlohmann::ordered_json cmd_converge(const RunConfig& config, const std::vector<int>& sizes,
                                    const DtauPolicy& policy);

nlohmann::ordered_json convergence_json(const ConvergenceReport& report);

}  // namespace itnumm
