#pragma once

#include <functional>
#include <string>
#include <vector>

#include "itnumm/eigensolver.hpp"
#include "itnumm/kernel.hpp"
#include "itnumm/model.hpp"

namespace itnumm {

// (n + 1/2) hbar omega.
double ho_energy(int n, const SystemSpec& spec);

struct TwoParticleOptions {
  // Finest-level grid points are 4 * base_points.
  int base_points = 8000;
  // Relative disagreement between successive Richardson estimates that is
  // reported as an oracle failure.
  double tolerance = 1e-6;
};

struct TwoParticleLevels {
  std::vector<double> energies;  // lowest total energies, ascending
  std::vector<double> relative;  // relative-coordinate levels used
  double richardson_change = 0.0;  // max relative change between estimates
  double v_min = 0.0;     // minimum of the relative potential
  double omega_well = 0.0;  // harmonic frequency of the relative well
};

// Two trapped LJ particles separate into centre of mass (levels
// hbar w (n + 1/2)) and relative motion (reduced mass m/2, potential
// V_LJ(r) + m w^2 r^2 / 4), which is solved by finite differences on
// [a_core/2, r_max] with a Dirichlet wall, or on the full line when eps = 0.
// Throws NumericError when grid doubling disagrees beyond the tolerance.
TwoParticleLevels two_particle_exact(const SystemSpec& spec, int n_levels,
                                     const TwoParticleOptions& options = {});

// Top-k eigenpairs of a symmetrized kernel by dense diagonalization.
// Refuses n > 4000.
EigenPairs dense_reference(const SparseKernel& S, int k);

struct PowerLawFit {
  double prefactor = 0.0;
  double exponent = 0.0;
  double residual = 0.0;  // rms of log residuals
};

// Least-squares fit of log y = log a + b log x. Needs >= 2 positive points.
PowerLawFit fit_power_law(const std::vector<double>& x, const std::vector<double>& y);

// How dtau follows N in a convergence sweep.
struct DtauPolicy {
  enum class Kind { fixed, constant_guard, guard_triggered };
  Kind kind = Kind::constant_guard;
  double dtau_ref = 0.0055;
  int N_ref = 500;

  // fixed: dtau_ref. constant_guard: dtau_ref (N_ref/N)^(1/D), which keeps
  // the kernel diagonal Z (m/2 pi hbar dtau)^(D/2)/N unchanged for the
  // harmonic oscillator. guard_triggered: dtau_ref while N >= N_ref,
  // otherwise dtau_ref (N_ref/N)^(2/D).
  double dtau(int N, int D) const;
};

struct ConvergenceReport {
  std::vector<int> N;
  std::vector<double> dtau;
  std::vector<double> sigma;  // |E0 - hbar w/2| / (hbar w/2)
  PowerLawFit fit;
  std::vector<std::string> flags;
};

// Ground-state relative error of the harmonic oscillator against N.
// Failing sizes are flagged and left out of the fit.
// `log` receives one line per mesh size.
ConvergenceReport convergence_fit(const SystemSpec& spec, const std::vector<int>& sizes,
                                  const DtauPolicy& policy, double threshold = 1e-10,
                                  const std::function<void(const std::string&)>& log = {});

}  // namespace itnumm
