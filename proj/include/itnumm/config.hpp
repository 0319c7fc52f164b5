#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "itnumm/model.hpp"
#include "itnumm/observables.hpp"
#include "itnumm/symmetry.hpp"

namespace itnumm {

// Unit in which run.dtau is given. Internally dtau is always in the
// coordinate units of the spec (hbar = m = r_e = 1 for resolved systems).
enum class DtauUnit { internal, hbar_over_epsilon, inverse_omega };

DtauUnit dtau_unit_from_string(const std::string& name);
std::string to_string(DtauUnit unit);
double dtau_to_internal(double dtau, DtauUnit unit, const SystemSpec& spec);

struct OutputOptions {
  std::filesystem::path directory = "itnumm_out";
  bool emit_mesh = false;
  bool emit_kernel = false;
};

struct Grid2DRequest {
  Grid2D grid;
  std::vector<int> states{0};
  std::vector<Statistics> statistics{Statistics::distinguishable, Statistics::boson,
                                     Statistics::fermion};
};

struct RunConfig {
  nlohmann::ordered_json source;  // the configuration as read
  SystemSpec spec;
  RunParams run;
  DtauUnit dtau_unit = DtauUnit::internal;
  OutputOptions output;
  DensityOptions density;
  std::vector<double> thermal_betas;  // in units of 1/(hbar omega)
  std::optional<Grid2DRequest> grid2d;
};

// Parses and validates a configuration. A run manifest (an object with a
// "config" member) is accepted in place of a configuration. Throws
// ConfigError naming the offending field.
RunConfig parse_config(const nlohmann::ordered_json& j);
RunConfig load_config(const std::filesystem::path& path);

// FNV-1a 64 of the compact JSON dump, as 16 hex digits.
std::string config_hash(const nlohmann::ordered_json& j);

}  // namespace itnumm
