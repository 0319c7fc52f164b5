#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <vector>

#include "itnumm/solver.hpp"
#include "itnumm/symmetry.hpp"

namespace itnumm {

// Midpoint grid k_m = -k_max + (m + 1/2) dk, dk = 2 k_max / n_k.
struct KGrid {
  double k_max = 0.0;
  int n_k = 1024;
};

struct XGrid {
  double x_min = 0.0;
  double x_max = 0.0;
  int n_x = 0;

  double spacing() const { return n_x > 1 ? (x_max - x_min) / (n_x - 1) : 0.0; }
  double at(int i) const { return x_min + spacing() * i; }
};

struct DensityOptions {
  std::optional<KGrid> kgrid;
  std::optional<XGrid> xgrid;
  // Gaussian window exp(-(k/k_c)^2), k_c = k_max/2. Defaults to on for
  // stochastic meshes.
  std::optional<bool> window;
};

struct DensityProfile {
  int D = 1;
  std::vector<double> x;
  std::vector<double> total;
  std::vector<std::vector<double>> per_coordinate;  // D profiles
  double normalization = 1.0;  // expected integral of `total`
  double k_max = 0.0;
  int n_k = 0;
  bool windowed = false;
  // Thermal profiles only: exp(-beta (E_last - E_0)).
  std::optional<double> truncation;
  bool truncation_warning = false;
};

// Defaults derived from the system: k_max = 16 pi / L with L = r_e for
// trapped LJ and sqrt(hbar/(m omega)) otherwise; x range covers the trap.
KGrid default_kgrid(const SystemSpec& spec);
XGrid default_xgrid(const SystemSpec& spec, const KGrid& kgrid);

// One-body density of every coordinate from the Fourier transform of the
// weighted sample, inverted on the x grid. Throws ConfigError when the x
// spacing exceeds pi / k_max.
DensityProfile one_body_density(const WeightedSample& sample, const SystemSpec& spec,
                                bool stochastic, const DensityOptions& options = {});

// Pure state n.
DensityProfile state_density(const SpectrumResult& spectrum, int n, Statistics stats,
                             const DensityOptions& options = {});

// Boltzmann mixture over the computed states at inverse temperature beta.
DensityProfile thermal_density(const SpectrumResult& spectrum, double beta,
                               Statistics stats, const DensityOptions& options = {});

// Trapezoid integral of `total`.
double integrate(const DensityProfile& profile);

// Local maxima of v with prominence >= min_prominence, in increasing x.
struct Peak {
  int index;
  double value;
  double prominence;
};
std::vector<Peak> find_peaks(std::span<const double> v, double min_prominence = 0.0);

// Peaks of `total` whose prominence exceeds rel_prominence * max(total).
int count_peaks(const DensityProfile& profile, double rel_prominence = 0.05);

// (rho_maxpeak - rho_minvalley) / (rho_maxpeak + rho_minvalley) over the
// D most prominent maxima and the minima between them; 0 with fewer than
// two maxima.
double contrast(const DensityProfile& profile);

// CSV x,rho_total,rho_1..rho_D and a JSON sidecar with the grid metadata.
void save_density(const DensityProfile& profile, const std::filesystem::path& csv_path,
                  const std::filesystem::path& json_path);

}  // namespace itnumm
