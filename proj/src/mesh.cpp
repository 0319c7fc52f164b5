#include "itnumm/mesh.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <functional>
#include <iomanip>
#include <limits>
#include <numbers>
#include <sstream>
#include <string>

#include <json.hpp>

#include "itnumm/error.hpp"
#include "itnumm/parallel.hpp"
#include "itnumm/rng.hpp"

namespace itnumm {

namespace {

// Density tails below exp(-kTailLog) relative to the peak are dropped when a
// confining potential picks its own integration bounds.
constexpr double kTailLog = 80.0;

// Largest admissible dtau V2 / hbar; beyond it exp(-dtau V2/hbar) underflows.
constexpr double kMaxBoltzmannExponent = 700.0;

constexpr std::array<double, 5> kGaussNodes = {
    -0.9061798459386640, -0.5384693101056831, 0.0, 0.5384693101056831,
    0.9061798459386640};
constexpr std::array<double, 5> kGaussWeights = {
    0.2369268850561891, 0.4786286704993665, 0.5688888888888889,
    0.4786286704993665, 0.2369268850561891};

Interval auto_bounds(const ScalarPotential& pot, double dtau) {
  const double v0 = pot.eval(0.0);
  double half = 1.0;
  for (int iter = 0; iter < 200; ++iter) {
    const double lo = dtau * (pot.eval(-half) - v0) / pot.hbar;
    const double hi = dtau * (pot.eval(half) - v0) / pot.hbar;
    if (lo > kTailLog && hi > kTailLog) return {-half, half};
    half *= 1.5;
  }
  throw ConfigError("could not bracket the Boltzmann density; supply run.domain");
}

}  // namespace

ScalarPotential scalar_potential(const SystemSpec& spec) {
  if (spec.D != 1)
    throw ConfigError("1D quadrature mesh requires system.D = 1");
  ScalarPotential pot;
  pot.hbar = spec.hbar;
  switch (spec.kind) {
    case PotentialKind::harmonic_1d:
    case PotentialKind::lj_harmonic_trap:
      pot.eval = [spec](double q) { return v1(std::span<const double>(&q, 1), spec); };
      pot.confining = true;
      break;
    case PotentialKind::lj_pair_1d:
      pot.eval = [spec](double q) { return v_lj(q, spec); };
      pot.confining = false;
      break;
  }
  return pot;
}

Mesh inverse_cdf_grid_1d(const ScalarPotential& potential, double dtau, int N,
                         std::optional<Interval> domain) {
  if (N < 2) throw ConfigError("inverse_cdf_grid_1d: N must be >= 2");
  if (!(dtau > 0)) throw ConfigError("inverse_cdf_grid_1d: dtau must be > 0");
  if (!domain && !potential.confining)
    throw ConfigError(
        "run.domain: the Boltzmann density of this potential is not "
        "normalizable on the real line; explicit bounds are required");
  const Interval bounds = domain ? *domain : auto_bounds(potential, dtau);
  if (!(bounds.lo < bounds.hi)) throw ConfigError("run.domain must be increasing");

  const std::size_t panels = std::max<std::size_t>(50 * static_cast<std::size_t>(N), 4096);
  const double h = (bounds.hi - bounds.lo) / static_cast<double>(panels);
  const double scale = dtau / potential.hbar;

  // Potential at nodes and panel midpoints, shifted by its minimum.
  std::vector<double> v_node(panels + 1), v_mid(panels);
  for (std::size_t i = 0; i <= panels; ++i) v_node[i] = potential.eval(bounds.lo + h * i);
  for (std::size_t i = 0; i < panels; ++i) v_mid[i] = potential.eval(bounds.lo + h * (i + 0.5));
  double v_ref = std::numeric_limits<double>::infinity();
  for (double v : v_node) v_ref = std::min(v_ref, v);
  for (double v : v_mid) v_ref = std::min(v_ref, v);
  auto density = [&](double q) { return std::exp(-scale * (potential.eval(q) - v_ref)); };

  std::vector<double> cdf(panels + 1, 0.0);
  for (std::size_t i = 0; i < panels; ++i) {
    const double fa = std::exp(-scale * (v_node[i] - v_ref));
    const double fm = std::exp(-scale * (v_mid[i] - v_ref));
    const double fb = std::exp(-scale * (v_node[i + 1] - v_ref));
    cdf[i + 1] = cdf[i] + h * (fa + 4.0 * fm + fb) / 6.0;
  }
  const double total = cdf.back();
  if (!(total > 0) || !std::isfinite(total))
    throw NumericError("inverse_cdf_grid_1d: density integral is not finite and positive");

  auto partial = [&](double a, double b) {
    const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
    double s = 0.0;
    for (std::size_t k = 0; k < kGaussNodes.size(); ++k)
      s += kGaussWeights[k] * density(mid + half * kGaussNodes[k]);
    return s * half;
  };

  Mesh mesh;
  mesh.D = 1;
  mesh.points.resize(N);
  mesh.density_kind = DensityKind::full_H1;
  mesh.dtau = dtau;
  mesh.log_Z = std::log(total) - scale * v_ref;
  for (int j = 0; j < N; ++j) {
    const double u = (j + 0.5) / N;
    const double target = u * total;
    auto it = std::upper_bound(cdf.begin(), cdf.end(), target);
    std::size_t i = static_cast<std::size_t>(std::clamp<std::ptrdiff_t>(
        (it - cdf.begin()) - 1, 0, static_cast<std::ptrdiff_t>(panels) - 1));
    double a = bounds.lo + h * i, b = a + h;
    const double want = target - cdf[i];
    const double width = cdf[i + 1] - cdf[i];
    double x = width > 0 ? a + h * std::clamp(want / width, 0.0, 1.0) : 0.5 * (a + b);
    // Safeguarded Newton on F(x) = int_a^x p - want.
    for (int iter = 0; iter < 100; ++iter) {
      const double f = partial(bounds.lo + h * i, x) - want;
      if (std::abs(f) < 1e-13 * total) break;
      if (f > 0) b = x; else a = x;
      const double fp = density(x);
      double next = fp > 0 ? x - f / fp : 0.5 * (a + b);
      if (!(next > a && next < b)) next = 0.5 * (a + b);
      if (b - a < 1e-15 * std::max(1.0, std::abs(x))) break;
      x = next;
    }
    mesh.points[j] = x;
  }
  return mesh;
}

bool in_ordered_subspace(std::span<const double> q, double a) {
  for (std::size_t l = 0; l + 1 < q.size(); ++l)
    if (!(q[l] - q[l + 1] >= a)) return false;
  return true;
}

double log_ordering_constant(int D, double acceptance_rate) {
  if (!(acceptance_rate > 0 && acceptance_rate <= 1))
    throw NumericError("acceptance rate must lie in (0, 1]");
  return std::lgamma(D + 1.0) - std::log(acceptance_rate);
}

double configuration_integral(const SystemSpec& spec, double dtau,
                              double acceptance_rate) {
  if (!(dtau > 0)) throw ConfigError("dtau must be > 0");
  const double gauss = 2.0 * std::numbers::pi * spec.hbar /
                       (dtau * spec.mass * spec.omega * spec.omega);
  return 0.5 * spec.D * std::log(gauss) - log_ordering_constant(spec.D, acceptance_rate);
}

Mesh sample_ordered_subspace(const SystemSpec& spec, double dtau, int N,
                             unsigned long long seed, long long min_draws) {
  if (spec.kind != PotentialKind::lj_harmonic_trap)
    throw ConfigError("ordered-subspace sampling requires lj_harmonic_trap");
  if (spec.D < 2) throw ConfigError("ordered-subspace sampling requires D >= 2");
  if (N < 1) throw ConfigError("run.N must be >= 1");
  const int D = spec.D;
  const double sigma = std::sqrt(spec.hbar / (dtau * spec.mass * spec.omega * spec.omega));
  const double cap = kMaxBoltzmannExponent * spec.hbar / dtau;
  const Philox4x32 rng(seed);
  const int blocks = (D + 1) / 2;

  constexpr std::size_t kBatch = 1 << 16;
  std::vector<double> batch_points(kBatch * D);
  std::vector<unsigned char> batch_ok(kBatch);

  auto run_batch = [&](long long first) {
    parallel_for(kBatch, [&](std::size_t begin, std::size_t end) {
      std::vector<double> q(D);
      for (std::size_t i = begin; i < end; ++i) {
        const auto c = static_cast<std::uint64_t>(first + static_cast<long long>(i));
        for (int s = 0; s < blocks; ++s) {
          const auto z = Philox4x32::normal_pair(rng(c, static_cast<std::uint64_t>(s)));
          q[2 * s] = sigma * z[0];
          if (2 * s + 1 < D) q[2 * s + 1] = sigma * z[1];
        }
        std::sort(q.begin(), q.end(), std::greater<>());
        bool ok = in_ordered_subspace(q, spec.a_core);
        if (ok) {
          bool distinct = true;
          for (int l = 0; l + 1 < D; ++l) distinct = distinct && q[l] > q[l + 1];
          ok = distinct && v2(q, spec) <= cap;
        }
        batch_ok[i] = ok;
        std::copy(q.begin(), q.end(), batch_points.begin() + static_cast<std::ptrdiff_t>(i * D));
      }
    });
  };

  Mesh mesh;
  mesh.D = D;
  mesh.points.reserve(static_cast<std::size_t>(N) * D);
  mesh.density_kind = DensityKind::V1_only;
  mesh.dtau = dtau;
  mesh.subspace = true;
  mesh.a_core = spec.a_core;
  mesh.seed = seed;

  long long draws = 0, accepted = 0;
  int kept = 0;
  while (kept < N || draws < min_draws) {
    run_batch(draws);
    for (std::size_t i = 0; i < kBatch; ++i) {
      if (kept >= N && draws >= min_draws) break;
      ++draws;
      if (!batch_ok[i]) continue;
      ++accepted;
      if (kept < N) {
        mesh.points.insert(mesh.points.end(), batch_points.begin() + static_cast<std::ptrdiff_t>(i * D),
                           batch_points.begin() + static_cast<std::ptrdiff_t>((i + 1) * D));
        ++kept;
      }
    }
    if (draws >= 10'000'000 && static_cast<double>(accepted) < 1e-6 * static_cast<double>(draws))
      throw InfeasibleError(
          "ordered-subspace acceptance below 1e-6: a_core is too large for the "
          "trap at this dtau");
    if (draws >= 4'000'000'000LL)
      throw InfeasibleError("ordered-subspace sampling exhausted its draw budget");
  }
  const double g = static_cast<double>(accepted) / static_cast<double>(draws);
  mesh.acceptance_rate = g;
  mesh.acceptance_stderr = std::sqrt(g * (1.0 - g) / static_cast<double>(draws));
  mesh.candidate_draws = draws;
  mesh.log_Z = configuration_integral(spec, dtau, g);
  return mesh;
}

Mesh build_mesh(const SystemSpec& spec, const RunParams& params) {
  spec.validate();
  params.validate();
  if (spec.kind == PotentialKind::lj_harmonic_trap && spec.D >= 2)
    return sample_ordered_subspace(spec, params.dtau, params.N, params.seed,
                                   params.acceptance_draws);
  if (spec.D != 1)
    throw ConfigError("system.D must be 1 for " + std::string(to_string(spec.kind)));
  std::optional<Interval> domain;
  if (params.domain) domain = Interval{params.domain->first, params.domain->second};
  if (spec.kind == PotentialKind::lj_pair_1d && domain && domain->lo <= 0)
    throw ConfigError("run.domain must be positive for lj_pair_1d");
  Mesh mesh = inverse_cdf_grid_1d(scalar_potential(spec), params.dtau, params.N, domain);
  mesh.seed = params.seed;
  return mesh;
}

std::vector<double> log_quadrature_weights(const Mesh& mesh, const SystemSpec& spec) {
  const std::size_t n = mesh.size();
  std::vector<double> out(n);
  const double base = mesh.log_Z - std::log(static_cast<double>(n));
  const double scale = mesh.dtau / spec.hbar;
  for (std::size_t j = 0; j < n; ++j) {
    const auto q = mesh.point(j);
    const double u = mesh.density_kind == DensityKind::V1_only ? v1(q, spec) : h1(q, spec);
    out[j] = base + scale * u;
  }
  return out;
}

namespace {
std::string_view density_kind_name(DensityKind k) {
  return k == DensityKind::full_H1 ? "full_H1" : "V1_only";
}
}  // namespace

void save_mesh(const Mesh& mesh, const std::filesystem::path& csv_path,
               const std::filesystem::path& json_path) {
  std::ofstream csv(csv_path);
  if (!csv) throw ConfigError("cannot write " + csv_path.string());
  for (int l = 0; l < mesh.D; ++l) csv << (l ? "," : "") << "q_" << (l + 1);
  csv << '\n' << std::setprecision(17);
  for (std::size_t j = 0; j < mesh.size(); ++j) {
    const auto q = mesh.point(j);
    for (int l = 0; l < mesh.D; ++l) csv << (l ? "," : "") << q[l];
    csv << '\n';
  }
  nlohmann::json meta = {{"n", mesh.size()},
                         {"D", mesh.D},
                         {"dtau", mesh.dtau},
                         {"log_Z", mesh.log_Z},
                         {"a_core", mesh.a_core},
                         {"seed", mesh.seed},
                         {"acceptance_rate", mesh.acceptance_rate},
                         {"acceptance_stderr", mesh.acceptance_stderr},
                         {"candidate_draws", mesh.candidate_draws},
                         {"subspace", mesh.subspace},
                         {"density_kind", density_kind_name(mesh.density_kind)}};
  std::ofstream js(json_path);
  if (!js) throw ConfigError("cannot write " + json_path.string());
  js << meta.dump(2) << '\n';
}

Mesh load_mesh(const std::filesystem::path& csv_path, const std::filesystem::path& json_path) {
  std::ifstream js(json_path);
  if (!js) throw ConfigError("cannot read " + json_path.string());
  const auto meta = nlohmann::json::parse(js);
  Mesh mesh;
  mesh.D = meta.at("D").get<int>();
  mesh.dtau = meta.at("dtau").get<double>();
  mesh.log_Z = meta.at("log_Z").get<double>();
  mesh.a_core = meta.at("a_core").get<double>();
  mesh.seed = meta.at("seed").get<unsigned long long>();
  mesh.acceptance_rate = meta.at("acceptance_rate").get<double>();
  mesh.acceptance_stderr = meta.value("acceptance_stderr", 0.0);
  mesh.candidate_draws = meta.value("candidate_draws", 0LL);
  mesh.subspace = meta.value("subspace", false);
  mesh.density_kind = meta.value("density_kind", std::string("full_H1")) == "V1_only"
                          ? DensityKind::V1_only
                          : DensityKind::full_H1;
  const auto n = meta.at("n").get<std::size_t>();

  std::ifstream csv(csv_path);
  if (!csv) throw ConfigError("cannot read " + csv_path.string());
  std::string line;
  std::getline(csv, line);  // header
  mesh.points.reserve(n * mesh.D);
  while (std::getline(csv, line)) {
    if (line.empty()) continue;
    std::stringstream row(line);
    std::string cell;
    while (std::getline(row, cell, ',')) mesh.points.push_back(std::stod(cell));
  }
  if (mesh.points.size() != n * static_cast<std::size_t>(mesh.D))
    throw ConfigError("mesh CSV does not match its sidecar point count");
  return mesh;
}

}  // namespace itnumm
