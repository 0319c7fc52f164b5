#pragma once

#include <filesystem>
#include <memory>
#include <span>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "itnumm/neighbors.hpp"
#include "itnumm/solver.hpp"

namespace itnumm {

enum class Statistics { distinguishable, boson, fermion };

std::string_view to_string(Statistics s);
Statistics statistics_from_string(std::string_view name);

// +1 for even, -1 for odd permutations of 0..n-1. Throws DomainError if
// `perm` is not a permutation.
int permutation_parity(std::span<const int> perm);

// Off-mesh evaluation of the computed eigenfunctions through the propagator:
//   phi_n(q) = lambda_n^{-1} sum_k K(q, q_k) Phi_n(q_k).
// For subspace meshes boson and fermion amplitudes are built from the
// ordered-subspace solution by (anti)symmetrization with 1/sqrt(D!).
class StateEvaluator {
 public:
  explicit StateEvaluator(std::shared_ptr<const SpectrumResult> spectrum);

  double operator()(std::span<const double> q, int n,
                    Statistics stats = Statistics::distinguishable) const;

  // Value of the mesh-interpolated state at q with no symmetry handling.
  double raw(std::span<const double> q, int n) const;

  const SpectrumResult& spectrum() const { return *spectrum_; }

 private:
  std::shared_ptr<const SpectrumResult> spectrum_;
  CellList cells_;
};

// Convenience wrapper; builds the neighbour structure on every call.
double evaluate_state(const std::shared_ptr<const SpectrumResult>& spectrum,
                      std::span<const double> q, int n, Statistics stats);

struct Grid2D {
  double lo = -3.0;
  double hi = 3.0;
  int resolution = 101;
};

// phi_n on a square grid; entry (i, j) is at q_1 = x_i, q_2 = x_j. D = 2 only.
Eigen::MatrixXd wavefunction_grid_2d(const StateEvaluator& evaluator, int n,
                                     Statistics stats, const Grid2D& grid);

// CSV with header q1,q2,value.
void write_grid_csv(const Eigen::MatrixXd& values, const Grid2D& grid,
                    const std::filesystem::path& path);

// Points carrying a quadrature weight and a non-negative probability, the
// input of the density estimators.
struct WeightedSample {
  int D = 1;
  std::vector<double> points;      // row-major
  std::vector<double> log_weight;
  std::vector<double> probability;

  std::size_t size() const { return log_weight.size(); }
};

// Mesh points with probability sum_n c_n Phi_n^2. On a subspace mesh with
// boson or fermion statistics every point is replaced by its D! images
// q_pi, each carrying (s_pi Phi_n / sqrt(D!))^2.
WeightedSample state_sample(const SpectrumResult& spectrum,
                            std::span<const double> state_weights, Statistics stats);

}  // namespace itnumm
