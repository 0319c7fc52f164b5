#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>

namespace itnumm {

enum class PotentialKind { harmonic_1d, lj_pair_1d, lj_harmonic_trap };

std::string_view to_string(PotentialKind kind);
PotentialKind potential_kind_from_string(std::string_view name);

// Physical problem definition. All coordinates share one mass.
struct SystemSpec {
  int D = 1;
  double mass = 1.0;
  double omega = 1.0;
  double epsilon = 1.0;
  double r_e = 1.0;
  double a_core = 0.0;
  double hbar = 1.0;
  PotentialKind kind = PotentialKind::harmonic_1d;

  // Throws ConfigError when an invariant is violated.
  void validate() const;

  // True for the potentials whose Boltzmann density is normalizable on R^D.
  bool confining() const { return kind != PotentialKind::lj_pair_1d; }
};

struct RunParams {
  int N = 500;
  double dtau = 0.0055;
  int n_states = 50;
  double threshold = 1e-10;
  unsigned long long seed = 1;
  // Explicit bounds for non-confining 1D potentials.
  std::optional<std::pair<double, double>> domain;
  // Lower bound on the number of candidate draws used to estimate the
  // ordered-subspace acceptance rate (D >= 2 only).
  long long acceptance_draws = 1LL << 22;

  void validate() const;
};

// Lennard-Jones pair energy eps*[(r_e/r)^12 - 2 (r_e/r)^6].
double v_lj(double r, const SystemSpec& spec);

// One-body harmonic part: sum_l m w^2 q_l^2 / 2.
double v1(std::span<const double> q, const SystemSpec& spec);

// Pairwise LJ part: sum_{l<m} V_LJ(|q_l - q_m|). Zero for D = 1.
double v2(std::span<const double> q, const SystemSpec& spec);

// Full classical potential H1 for the configured potential kind.
double h1(std::span<const double> q, const SystemSpec& spec);

// Lambda = 2^(1/6) hbar / (r_e sqrt(m eps)).
double de_boer_length(const SystemSpec& spec);

// Base units used when resolving a trapped LJ system from its two
// dimensionless numbers. Defaults give hbar = m = r_e = 1.
struct BaseUnits {
  double hbar = 1.0;
  double mass = 1.0;
  double r_e = 1.0;
};

// Builds a lj_harmonic_trap spec from the de Boer length and the trap ratio
// omega r_e sqrt(m/eps). D defaults to 2 and a_core to 0.63 r_e.
SystemSpec resolve_natural_units(double lambda, double trap_ratio,
                                 BaseUnits units = {});

// min(H1) = -eps D (D-1)/2, the reporting shift for trapped LJ spectra.
double h1_minimum_shift(const SystemSpec& spec);

// hbar / eps, the natural time unit of the LJ systems.
double lj_time_unit(const SystemSpec& spec);

}  // namespace itnumm
