#include "itnumm/config.hpp"

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <set>

#include "itnumm/error.hpp"

namespace itnumm {

using json = nlohmann::ordered_json;

namespace {

void reject_unknown(const json& obj, const std::string& section,
                    const std::set<std::string>& allowed) {
  for (const auto& item : obj.items())
    if (!allowed.count(item.key()))
      throw ConfigError(section + "." + item.key() + ": unknown field");
}

const json& object_at(const json& j, const std::string& key, const std::string& where) {
  const json& v = j.at(key);
  if (!v.is_object()) throw ConfigError(where + " must be an object");
  return v;
}

template <typename T>
T get(const json& obj, const std::string& key, const std::string& where) {
  try {
    return obj.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ConfigError(where + ": missing or wrong type");
  }
}

template <typename T>
T get_or(const json& obj, const std::string& key, const std::string& where, T fallback) {
  if (!obj.contains(key)) return fallback;
  return get<T>(obj, key, where);
}

SystemSpec parse_system(const json& s) {
  reject_unknown(s, "system", {"potential_kind", "D", "lambda_deboer", "epsilon", "trap_ratio",
                               "omega", "a_core", "mass", "r_e", "hbar"});
  SystemSpec spec;
  spec.kind = potential_kind_from_string(get<std::string>(s, "potential_kind", "system.potential_kind"));
  spec.mass = get_or(s, "mass", "system.mass", 1.0);
  spec.r_e = get_or(s, "r_e", "system.r_e", 1.0);
  spec.hbar = get_or(s, "hbar", "system.hbar", 1.0);
  spec.D = get_or(s, "D", "system.D", 1);

  const bool lj = spec.kind != PotentialKind::harmonic_1d;
  const bool has_lambda = s.contains("lambda_deboer");
  const bool has_eps = s.contains("epsilon");
  if (lj) {
    if (has_lambda == has_eps)
      throw ConfigError("system: exactly one of lambda_deboer and epsilon must be given");
    if (has_lambda) {
      const double lam = get<double>(s, "lambda_deboer", "system.lambda_deboer");
      if (!(lam > 0)) throw ConfigError("system.lambda_deboer must be > 0");
      const double root = std::pow(2.0, 1.0 / 6.0) * spec.hbar / (lam * spec.r_e);
      spec.epsilon = root * root / spec.mass;
    } else {
      spec.epsilon = get<double>(s, "epsilon", "system.epsilon");
    }
  } else if (has_lambda || has_eps) {
    throw ConfigError("system: lambda_deboer/epsilon are not used by harmonic_1d");
  }

  const bool has_ratio = s.contains("trap_ratio");
  const bool has_omega = s.contains("omega");
  if (spec.kind == PotentialKind::lj_harmonic_trap) {
    if (has_ratio == has_omega)
      throw ConfigError("system: exactly one of trap_ratio and omega must be given");
    if (has_ratio) {
      const double ratio = get<double>(s, "trap_ratio", "system.trap_ratio");
      if (!(ratio > 0)) throw ConfigError("system.trap_ratio must be > 0");
      spec.omega = ratio * std::sqrt(spec.epsilon / spec.mass) / spec.r_e;
    } else {
      spec.omega = get<double>(s, "omega", "system.omega");
    }
    spec.a_core = get_or(s, "a_core", "system.a_core", 0.63 * spec.r_e);
  } else {
    if (has_ratio) throw ConfigError("system.trap_ratio: only used by lj_harmonic_trap");
    spec.omega = get_or(s, "omega", "system.omega", 1.0);
    spec.a_core = get_or(s, "a_core", "system.a_core", 0.0);
  }
  spec.validate();
  return spec;
}

}  // namespace

DtauUnit dtau_unit_from_string(const std::string& name) {
  if (name == "internal") return DtauUnit::internal;
  if (name == "hbar_over_epsilon") return DtauUnit::hbar_over_epsilon;
  if (name == "inverse_omega") return DtauUnit::inverse_omega;
  throw ConfigError("run.dtau_unit: unknown value '" + name +
                    "' (expected internal, hbar_over_epsilon or inverse_omega)");
}

std::string to_string(DtauUnit unit) {
  switch (unit) {
    case DtauUnit::internal: return "internal";
    case DtauUnit::hbar_over_epsilon: return "hbar_over_epsilon";
    case DtauUnit::inverse_omega: return "inverse_omega";
  }
  return "internal";
}

double dtau_to_internal(double dtau, DtauUnit unit, const SystemSpec& spec) {
  switch (unit) {
    case DtauUnit::internal: return dtau;
    case DtauUnit::hbar_over_epsilon: return dtau * lj_time_unit(spec);
    case DtauUnit::inverse_omega: return dtau / spec.omega;
  }
  return dtau;
}

RunConfig parse_config(const json& input) {
  if (!input.is_object()) throw ConfigError("configuration must be a JSON object");
  const json& j = input.contains("config") && input.at("config").is_object() ? input.at("config")
                                                                             : input;
  reject_unknown(j, "config", {"description", "stretch", "system", "run", "output", "density",
                               "thermal", "grid2d"});
  if (!j.contains("system")) throw ConfigError("system: missing section");
  if (!j.contains("run")) throw ConfigError("run: missing section");

  RunConfig cfg;
  cfg.source = j;
  cfg.spec = parse_system(object_at(j, "system", "system"));

  const json& r = object_at(j, "run", "run");
  reject_unknown(r, "run", {"N", "dtau", "dtau_unit", "n_states", "threshold", "seed", "domain",
                            "acceptance_draws"});
  cfg.run.N = get<int>(r, "N", "run.N");
  cfg.dtau_unit = dtau_unit_from_string(get_or<std::string>(r, "dtau_unit", "run.dtau_unit", "internal"));
  const double dtau = get<double>(r, "dtau", "run.dtau");
  if (!(dtau > 0)) throw ConfigError("run.dtau must be > 0");
  cfg.run.dtau = dtau_to_internal(dtau, cfg.dtau_unit, cfg.spec);
  cfg.run.n_states = get_or(r, "n_states", "run.n_states", 50);
  cfg.run.threshold = get_or(r, "threshold", "run.threshold", 1e-10);
  cfg.run.seed = get_or<unsigned long long>(r, "seed", "run.seed", 1ULL);
  cfg.run.acceptance_draws =
      get_or<long long>(r, "acceptance_draws", "run.acceptance_draws", 1LL << 22);
  if (r.contains("domain")) {
    const auto d = get<std::vector<double>>(r, "domain", "run.domain");
    if (d.size() != 2) throw ConfigError("run.domain must be [lo, hi]");
    cfg.run.domain = std::make_pair(d[0], d[1]);
  }
  cfg.run.validate();

  if (j.contains("output")) {
    const json& o = object_at(j, "output", "output");
    reject_unknown(o, "output", {"directory", "emit_mesh", "emit_kernel"});
    cfg.output.directory = get_or<std::string>(o, "directory", "output.directory", "itnumm_out");
    cfg.output.emit_mesh = get_or(o, "emit_mesh", "output.emit_mesh", false);
    cfg.output.emit_kernel = get_or(o, "emit_kernel", "output.emit_kernel", false);
  }
  if (cfg.output.directory.empty()) throw ConfigError("output.directory must not be empty");

  if (j.contains("density")) {
    const json& d = object_at(j, "density", "density");
    reject_unknown(d, "density", {"kgrid", "xgrid", "window"});
    if (d.contains("kgrid")) {
      const json& k = object_at(d, "kgrid", "density.kgrid");
      reject_unknown(k, "density.kgrid", {"k_max", "n_k"});
      KGrid kg = default_kgrid(cfg.spec);
      kg.k_max = get_or(k, "k_max", "density.kgrid.k_max", kg.k_max);
      kg.n_k = get_or(k, "n_k", "density.kgrid.n_k", kg.n_k);
      if (!(kg.k_max > 0) || kg.n_k < 2) throw ConfigError("density.kgrid: need k_max > 0, n_k >= 2");
      cfg.density.kgrid = kg;
    }
    if (d.contains("xgrid")) {
      const json& x = object_at(d, "xgrid", "density.xgrid");
      reject_unknown(x, "density.xgrid", {"x_min", "x_max", "n_x"});
      XGrid xg{get<double>(x, "x_min", "density.xgrid.x_min"),
               get<double>(x, "x_max", "density.xgrid.x_max"),
               get<int>(x, "n_x", "density.xgrid.n_x")};
      if (!(xg.x_max > xg.x_min) || xg.n_x < 2)
        throw ConfigError("density.xgrid: need x_max > x_min and n_x >= 2");
      cfg.density.xgrid = xg;
    }
    if (d.contains("window")) cfg.density.window = get<bool>(d, "window", "density.window");
  }

  if (j.contains("thermal")) {
    const json& t = object_at(j, "thermal", "thermal");
    reject_unknown(t, "thermal", {"betas"});
    cfg.thermal_betas = get<std::vector<double>>(t, "betas", "thermal.betas");
    for (double b : cfg.thermal_betas)
      if (!(b > 0)) throw ConfigError("thermal.betas must be > 0");
  }

  if (j.contains("grid2d")) {
    const json& g = object_at(j, "grid2d", "grid2d");
    reject_unknown(g, "grid2d", {"bounds", "resolution", "states", "statistics"});
    Grid2DRequest req;
    const auto b = get<std::vector<double>>(g, "bounds", "grid2d.bounds");
    if (b.size() != 2 || !(b[1] > b[0])) throw ConfigError("grid2d.bounds must be [lo, hi], lo < hi");
    req.grid.lo = b[0];
    req.grid.hi = b[1];
    req.grid.resolution = get_or(g, "resolution", "grid2d.resolution", 101);
    if (req.grid.resolution < 2) throw ConfigError("grid2d.resolution must be >= 2");
    if (g.contains("states")) req.states = get<std::vector<int>>(g, "states", "grid2d.states");
    for (int n : req.states)
      if (n < 0 || n >= cfg.run.n_states) throw ConfigError("grid2d.states: index out of range");
    if (g.contains("statistics")) {
      req.statistics.clear();
      for (const auto& s : get<std::vector<std::string>>(g, "statistics", "grid2d.statistics"))
        req.statistics.push_back(statistics_from_string(s));
    }
    if (cfg.spec.D != 2) throw ConfigError("grid2d: wavefunction grids need system.D = 2");
    cfg.grid2d = req;
  }
  return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot read configuration " + path.string());
  json j;
  try {
    j = json::parse(is);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("configuration " + path.string() + ": " + e.what());
  }
  return parse_config(j);
}

std::string config_hash(const json& j) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : j.dump()) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace itnumm
