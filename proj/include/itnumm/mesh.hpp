#pragma once

#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "itnumm/model.hpp"

namespace itnumm {

// Which Boltzmann density the points were drawn from. full_H1 pairs with the
// pure Gaussian kernel, V1_only with the kernel carrying the V2 column factor.
enum class DensityKind { full_H1, V1_only };

// N scattered points in D dimensions (row-major, point j at [j*D, j*D+D)).
struct Mesh {
  int D = 1;
  std::vector<double> points;
  DensityKind density_kind = DensityKind::full_H1;
  double dtau = 0.0;
  // log of the configuration integral of the sampled density.
  double log_Z = 0.0;
  bool subspace = false;
  double a_core = 0.0;
  // Ordered-subspace acceptance g and its binomial standard error; 1 and 0
  // for deterministic meshes.
  double acceptance_rate = 1.0;
  double acceptance_stderr = 0.0;
  long long candidate_draws = 0;
  unsigned long long seed = 0;

  std::size_t size() const { return D > 0 ? points.size() / D : 0; }
  std::span<const double> point(std::size_t j) const {
    return {points.data() + j * D, static_cast<std::size_t>(D)};
  }
};

struct Interval {
  double lo;
  double hi;
};

// Potential entering the 1D Boltzmann density exp(-dtau H1(q)/hbar).
struct ScalarPotential {
  std::function<double(double)> eval;
  // Present when the density is normalizable on R; used only to pick
  // integration bounds.
  bool confining = false;
  double hbar = 1.0;
};

// Potential for a 1D SystemSpec (harmonic_1d, lj_pair_1d, or D = 1 trap).
ScalarPotential scalar_potential(const SystemSpec& spec);

// Deterministic quantile grid q_j = P^{-1}((j - 1/2)/N) of the density
// exp(-dtau V(q)/hbar). The CDF is built by composite Simpson integration on
// at least 50 N panels and inverted by safeguarded Newton to 1e-10.
// `domain` is required when the potential is not confining.
Mesh inverse_cdf_grid_1d(const ScalarPotential& potential, double dtau, int N,
                         std::optional<Interval> domain = std::nullopt);

// True when sorted (decreasing) q satisfies q_l - q_{l+1} >= a for all l.
bool in_ordered_subspace(std::span<const double> q, double a);

// Rejection-sampled Boltzmann mesh of the harmonic trap restricted to the
// ordered subspace q_1 > q_2 + a > ... . Draw c of the candidate stream is a
// pure function of (seed, c), so results do not depend on the worker count.
// Points whose V2 would drive exp(-dtau V2/hbar) below exp(-700) are treated
// as part of the excluded hard-core region.
Mesh sample_ordered_subspace(const SystemSpec& spec, double dtau, int N,
                             unsigned long long seed,
                             long long min_draws = 0);

// log Z_V1 = (D/2) log(2 pi hbar / (dtau m w^2)) - log C_D(a), C_D = D!/g.
double configuration_integral(const SystemSpec& spec, double dtau,
                              double acceptance_rate);

// log C_D(a) = log D! - log g.
double log_ordering_constant(int D, double acceptance_rate);

// Builds the mesh matching the spec's potential kind.
Mesh build_mesh(const SystemSpec& spec, const RunParams& params);

// Quadrature weight log w_j = log(1/(N p(q_j))) = log Z - log N + dtau U(q_j)/hbar,
// U = V1 for V1_only meshes and H1 for full_H1 meshes.
std::vector<double> log_quadrature_weights(const Mesh& mesh,
                                           const SystemSpec& spec);

// CSV (header q_1,...,q_D) plus JSON sidecar with the metadata.
void save_mesh(const Mesh& mesh, const std::filesystem::path& csv_path,
               const std::filesystem::path& json_path);
Mesh load_mesh(const std::filesystem::path& csv_path,
               const std::filesystem::path& json_path);

}  // namespace itnumm
