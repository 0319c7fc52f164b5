#include "itnumm/model.hpp"

#include <cmath>
#include <string>

#include "itnumm/error.hpp"

namespace itnumm {

std::string_view to_string(PotentialKind kind) {
  switch (kind) {
    case PotentialKind::harmonic_1d:
      return "harmonic_1d";
    case PotentialKind::lj_pair_1d:
      return "lj_pair_1d";
    case PotentialKind::lj_harmonic_trap:
      return "lj_harmonic_trap";
  }
  return "unknown";
}

PotentialKind potential_kind_from_string(std::string_view name) {
  if (name == "harmonic_1d") return PotentialKind::harmonic_1d;
  if (name == "lj_pair_1d") return PotentialKind::lj_pair_1d;
  if (name == "lj_harmonic_trap") return PotentialKind::lj_harmonic_trap;
  throw ConfigError("system.potential_kind: unknown value '" +
                    std::string(name) + "'");
}

void SystemSpec::validate() const {
  if (D < 1) throw ConfigError("system.D must be >= 1");
  if (!(mass > 0)) throw ConfigError("system.mass must be > 0");
  if (!(omega > 0)) throw ConfigError("system.omega must be > 0");
  if (!(epsilon > 0)) throw ConfigError("system.epsilon must be > 0");
  if (!(r_e > 0)) throw ConfigError("system.r_e must be > 0");
  if (!(hbar > 0)) throw ConfigError("system.hbar must be > 0");
  if (!(a_core >= 0 && a_core < r_e))
    throw ConfigError("system.a_core must satisfy 0 <= a_core < r_e");
  if (kind == PotentialKind::lj_pair_1d && D != 1)
    throw ConfigError("system.D must be 1 for lj_pair_1d");
}

void RunParams::validate() const {
  if (n_states < 1) throw ConfigError("run.n_states must be >= 1");
  if (N < n_states) throw ConfigError("run.N must be >= run.n_states");
  if (!(dtau > 0)) throw ConfigError("run.dtau must be > 0");
  if (!(threshold > 0 && threshold < 1))
    throw ConfigError("run.threshold must lie in (0, 1)");
  if (domain && !(domain->first < domain->second))
    throw ConfigError("run.domain must be an increasing pair");
}

double v_lj(double r, const SystemSpec& spec) {
  if (!(r > 0)) throw DomainError("v_lj: separation must be > 0");
  const double x = spec.r_e / r;
  const double x6 = x * x * x * x * x * x;
  return spec.epsilon * (x6 * x6 - 2.0 * x6);
}

double v1(std::span<const double> q, const SystemSpec& spec) {
  double s = 0.0;
  for (double x : q) s += x * x;
  return 0.5 * spec.mass * spec.omega * spec.omega * s;
}

double v2(std::span<const double> q, const SystemSpec& spec) {
  double s = 0.0;
  for (std::size_t l = 0; l < q.size(); ++l) {
    for (std::size_t m = l + 1; m < q.size(); ++m) {
      const double r = std::abs(q[l] - q[m]);
      if (r == 0.0) throw DomainError("v2: coincident coordinates");
      s += v_lj(r, spec);
    }
  }
  return s;
}

double h1(std::span<const double> q, const SystemSpec& spec) {
  switch (spec.kind) {
    case PotentialKind::harmonic_1d:
      return v1(q, spec);
    case PotentialKind::lj_pair_1d:
      return v_lj(q[0], spec);
    case PotentialKind::lj_harmonic_trap:
      return v1(q, spec) + v2(q, spec);
  }
  return 0.0;
}

double de_boer_length(const SystemSpec& spec) {
  return std::pow(2.0, 1.0 / 6.0) * spec.hbar /
         (spec.r_e * std::sqrt(spec.mass * spec.epsilon));
}

SystemSpec resolve_natural_units(double lambda, double trap_ratio,
                                 BaseUnits units) {
  if (!(lambda > 0)) throw DomainError("de Boer length must be > 0");
  if (!(trap_ratio > 0)) throw DomainError("trap ratio must be > 0");
  SystemSpec spec;
  spec.kind = PotentialKind::lj_harmonic_trap;
  spec.D = 2;
  spec.hbar = units.hbar;
  spec.mass = units.mass;
  spec.r_e = units.r_e;
  // Lambda = 2^(1/6) hbar / (r_e sqrt(m eps))  =>  eps = (2^(1/6) hbar / (Lambda r_e))^2 / m
  const double root = std::pow(2.0, 1.0 / 6.0) * units.hbar / (lambda * units.r_e);
  spec.epsilon = root * root / units.mass;
  spec.omega = trap_ratio * std::sqrt(spec.epsilon / units.mass) / units.r_e;
  spec.a_core = 0.63 * units.r_e;
  return spec;
}

double h1_minimum_shift(const SystemSpec& spec) {
  return -spec.epsilon * spec.D * (spec.D - 1) / 2.0;
}

double lj_time_unit(const SystemSpec& spec) { return spec.hbar / spec.epsilon; }

}  // namespace itnumm
