#include "itnumm/commands.hpp"

#include <chrono>
#include <cstdio>
#include <iostream>
#include <sstream>

#include "itnumm/artifacts.hpp"
#include "itnumm/error.hpp"
#include "itnumm/parallel.hpp"
#include "itnumm/solver.hpp"

namespace itnumm {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

constexpr const char* kVersion = "0.1.0";

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string format_value(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

json check(const std::string& name, double value, double tolerance, const std::string& detail = {}) {
  json c;
  c["name"] = name;
  c["value"] = value;
  c["tolerance"] = tolerance;
  c["passed"] = value <= tolerance;
  if (!detail.empty()) c["detail"] = detail;
  return c;
}

json validate_ho() {
  SystemSpec spec;
  RunParams p;
  p.N = 500;
  p.dtau = 0.0055;
  p.n_states = 50;
  const SpectrumResult r = solve(spec, p);
  double worst = 0.0;
  int worst_n = 0;
  for (int n = 0; n < r.n_states(); ++n) {
    const double e = std::abs(r.energies[n] - ho_energy(n, spec)) / ho_energy(n, spec);
    if (e > worst) worst = e, worst_n = n;
  }
  json out = json::array();
  out.push_back(check("ho.ground_relative_error",
                      std::abs(r.energies[0] - ho_energy(0, spec)) / ho_energy(0, spec), 1e-4));
  out.push_back(check("ho.max_relative_error_50", worst, 1e-3, "worst n=" + std::to_string(worst_n)));
  return out;
}

json validate_lj2(const ValidateOptions& o) {
  const SystemSpec spec = resolve_natural_units(0.16, 0.5);
  RunParams p;
  p.N = o.lj2_N;
  p.dtau = o.lj2_dtau * lj_time_unit(spec);
  p.n_states = 10;
  p.seed = o.seed;
  const SpectrumResult r = solve(spec, p);
  const TwoParticleLevels ref = two_particle_exact(spec, 10);
  const double shift = h1_minimum_shift(spec);
  json out = json::array();
  double worst = 0.0;
  std::vector<double> errors;
  for (int n = 0; n < 10; ++n) {
    const double e = std::abs(r.energies[n] - ref.energies[n]) / std::abs(ref.energies[n] - shift);
    errors.push_back(e);
    worst = std::max(worst, e);
  }
  json c = check("lj2.max_relative_error_10", worst, 0.005,
                 "energies measured from min H1 = " + format_value(shift));
  c["relative_errors"] = errors;
  c["ground_relative_error"] = errors[0];
  out.push_back(c);
  return out;
}

json validate_dense() {
  SystemSpec spec;
  RunParams p;
  p.N = 500;
  p.dtau = 0.0055;
  const Mesh mesh = build_mesh(spec, p);
  const SparseKernel S = assemble(mesh, spec, p.threshold, true);
  const EigenPairs kry = top_eigenpairs(S, 50);
  const EigenPairs den = dense_reference(S, 50);
  double worst = 0.0;
  for (int i = 0; i < 50; ++i)
    worst = std::max(worst, std::abs(kry.values[i] - den.values[i]) / std::abs(den.values[i]));
  json out = json::array();
  out.push_back(check("dense.max_relative_eigenvalue_difference", worst, 1e-10));
  return out;
}

}  // namespace

fs::path cmd_solve(const RunConfig& cfg) {
  const fs::path final_dir = cfg.output.directory;
  const fs::path tmp = final_dir.string() + ".partial";
  fs::remove_all(tmp);
  fs::create_directories(tmp);
  try {
    const auto t0 = std::chrono::steady_clock::now();
    auto mesh = std::make_shared<const Mesh>(build_mesh(cfg.spec, cfg.run));
    const double t_mesh = seconds_since(t0);
    if (cfg.output.emit_mesh) save_mesh(*mesh, tmp / "mesh.csv", tmp / "mesh.json");
    if (cfg.output.emit_kernel)
      dump_kernel(assemble(*mesh, cfg.spec, cfg.run.threshold), tmp / "kernel.txt");

    const auto t1 = std::chrono::steady_clock::now();
    SolveDiagnostics diag;
    auto result = std::make_shared<const SpectrumResult>(
        solve_spectrum(mesh, cfg.spec, cfg.run.n_states, cfg.run.threshold, {}, &diag));
    const double t_solve = seconds_since(t1);
    if (diag.diagonal.warning) std::cerr << "warning: " << diag.diagonal.message << '\n';

    write_text(tmp / "spectrum.json", spectrum_json(*result).dump(2) + "\n");
    save_solution(*result, tmp / "solution.bin");

    if (cfg.grid2d) {
      const StateEvaluator eval(result);
      for (int n : cfg.grid2d->states)
        for (Statistics s : cfg.grid2d->statistics) {
          const auto grid = wavefunction_grid_2d(eval, n, s, cfg.grid2d->grid);
          write_grid_csv(grid, cfg.grid2d->grid,
                         tmp / ("wavefunction_" + std::to_string(n) + "_" +
                                std::string(to_string(s)) + ".csv"));
        }
    }

    json m;
    m["version"] = kVersion;
    m["config"] = cfg.source;
    m["config_hash"] = config_hash(cfg.source);
    json resolved;
    resolved["potential_kind"] = std::string(to_string(cfg.spec.kind));
    resolved["D"] = cfg.spec.D;
    resolved["mass"] = cfg.spec.mass;
    resolved["omega"] = cfg.spec.omega;
    resolved["epsilon"] = cfg.spec.epsilon;
    resolved["r_e"] = cfg.spec.r_e;
    resolved["a_core"] = cfg.spec.a_core;
    resolved["hbar"] = cfg.spec.hbar;
    resolved["dtau_internal"] = cfg.run.dtau;
    resolved["dtau_unit"] = to_string(cfg.dtau_unit);
    m["resolved"] = resolved;
    m["seed"] = cfg.run.seed;
    m["threshold"] = cfg.run.threshold;
    m["threads"] = thread_count();
    json d;
    d["diagonal_dominance"] = diag.diagonal.value;
    d["diagonal_warning"] = diag.diagonal.warning;
    d["nnz"] = diag.nnz;
    d["r_cut"] = result->r_cut;
    d["matvecs"] = result->matvecs;
    d["restarts"] = result->restarts;
    d["acceptance_rate"] = mesh->acceptance_rate;
    d["acceptance_stderr"] = mesh->acceptance_stderr;
    m["diagnostics"] = d;
    json t;
    t["mesh_s"] = t_mesh;
    t["solve_s"] = t_solve;
    t["total_s"] = seconds_since(t0);
    m["timings"] = t;
    write_text(tmp / "manifest.json", m.dump(2) + "\n");
  } catch (...) {
    std::error_code ec;
    fs::remove_all(tmp, ec);
    throw;
  }
  fs::remove_all(final_dir);
  if (final_dir.has_parent_path()) fs::create_directories(final_dir.parent_path());
  fs::rename(tmp, final_dir);
  return final_dir;
}

json cmd_density(const fs::path& artifact, const DensityRequest& req) {
  if (!req.state && req.thermal.empty())
    throw ConfigError("density: give a state index or thermal values");
  const RunConfig cfg = load_config(artifact / "manifest.json");
  const SpectrumResult r = load_solution(artifact / "solution.bin", cfg.spec);
  const double hw = cfg.spec.hbar * cfg.spec.omega;

  json summary;
  summary["statistics"] = std::string(to_string(req.statistics));
  summary["profiles"] = json::array();
  auto record = [&](const DensityProfile& p, const std::string& stem, json extra) {
    save_density(p, artifact / (stem + ".csv"), artifact / (stem + ".json"));
    extra["file"] = stem + ".csv";
    extra["integral"] = integrate(p);
    extra["normalization"] = p.normalization;
    extra["contrast"] = contrast(p);
    extra["peaks"] = count_peaks(p);
    if (p.truncation) {
      extra["truncation"] = *p.truncation;
      extra["truncation_warning"] = p.truncation_warning;
    }
    summary["profiles"].push_back(extra);
  };
  if (req.state) {
    if (*req.state < 0 || *req.state >= r.n_states())
      throw ConfigError("density: state index " + std::to_string(*req.state) + " >= n_states " +
                        std::to_string(r.n_states()));
    const DensityProfile p = state_density(r, *req.state, req.statistics, cfg.density);
    json e;
    e["state"] = *req.state;
    record(p, "density_" + std::to_string(*req.state), e);
  }
  for (double v : req.thermal) {
    if (!(v > 0)) throw ConfigError("density: thermal values must be > 0");
    const DensityProfile p = thermal_density(r, v / hw, req.statistics, cfg.density);
    json e;
    e["hbar_omega_beta"] = v;
    record(p, "thermal_" + format_value(v), e);
  }
  write_text(artifact / "density_summary.json", summary.dump(2) + "\n");
  return summary;
}

json cmd_validate(const std::string& suite, const ValidateOptions& options, bool& passed) {
  if (suite != "ho" && suite != "lj2" && suite != "dense" && suite != "all")
    throw ConfigError("validate: unknown suite '" + suite + "' (expected ho, lj2, dense or all)");
  json checks = json::array();
  auto append = [&](const json& a) {
    for (const auto& c : a) checks.push_back(c);
  };
  if (suite == "ho" || suite == "all") append(validate_ho());
  if (suite == "dense" || suite == "all") append(validate_dense());
  if (suite == "lj2" || suite == "all") append(validate_lj2(options));
  passed = true;
  for (const auto& c : checks) passed = passed && c["passed"].get<bool>();
  json out;
  out["suite"] = suite;
  out["checks"] = checks;
  out["passed"] = passed;
  return out;
}

json convergence_json(const ConvergenceReport& rep) {
  json j;
  j["N"] = rep.N;
  j["dtau"] = rep.dtau;
  j["sigma"] = rep.sigma;
  j["prefactor"] = rep.fit.prefactor;
  j["exponent"] = rep.fit.exponent;
  j["residual"] = rep.fit.residual;
  j["flags"] = rep.flags;
  return j;
}

json cmd_converge(const RunConfig& cfg, const std::vector<int>& sizes, const DtauPolicy& base) {
  DtauPolicy policy = base;
  policy.dtau_ref = cfg.run.dtau;
  policy.N_ref = cfg.run.N;
  const ConvergenceReport rep =
      convergence_fit(cfg.spec, sizes, policy, cfg.run.threshold,
                      [](const std::string& line) { std::cerr << line << '\n'; });
  const json j = convergence_json(rep);
  fs::create_directories(cfg.output.directory);
  write_text(cfg.output.directory / "convergence.json", j.dump(2) + "\n");
  return j;
}

}  // namespace itnumm
