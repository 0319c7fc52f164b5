#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "itnumm/mesh.hpp"
#include "itnumm/model.hpp"

namespace itnumm {

// Matrix-element form of the propagator.
//   gaussian:  K_jk = c exp(-m d^2 / 2 hbar dtau)                      (full_H1 mesh)
//   v2_column: K_jk = c exp(-m d^2 / 2 hbar dtau - dtau V2(q_k)/hbar)   (V1_only mesh)
// with c = (Z/N)(m / 2 pi hbar dtau)^(D/2).
enum class KernelForm { gaussian, v2_column };

// Thresholded propagator matrix in CSR layout with sorted column indices.
// Immutable after construction.
struct SparseKernel {
  std::size_t n = 0;
  int D = 1;
  KernelForm form = KernelForm::gaussian;
  std::vector<std::size_t> row_ptr;
  std::vector<std::uint32_t> col;
  std::vector<double> val;
  double dtau = 0.0;
  double hbar = 1.0;
  double log_prefactor = 0.0;
  double threshold = 0.0;
  double r_cut = 0.0;
  bool symmetrized = false;
  // dtau V2(q_j)/hbar per point, clamped to the underflow cap; empty for the
  // gaussian form.
  std::vector<double> v2_exponent;

  std::size_t nnz() const { return val.size(); }
  // Value at (row, col), 0 if not stored.
  double at(std::size_t row, std::size_t column) const;
};

// r_cut = sqrt(2 hbar dtau ln(1/theta) / m).
double cutoff_radius(double mass, double hbar, double dtau, double threshold);

// Assembles K over the mesh. The form follows the mesh density kind.
// With `symmetric` set, the similarity-symmetrized matrix S is produced
// directly (same as symmetrize(assemble(...)) without the intermediate).
SparseKernel assemble(const Mesh& mesh, const SystemSpec& spec, double threshold,
                      bool symmetric = false);

// S = W^{1/2} K W^{-1/2}, W = diag(exp(-dtau V2/hbar)). Exactly symmetric.
SparseKernel symmetrize(const SparseKernel& K);

// y = K x, row-parallel with per-row sequential accumulation.
void matvec(const SparseKernel& K, std::span<const double> x, std::span<double> y);

struct DiagonalReport {
  double value = 0.0;
  bool warning = false;
  std::string message;
};

// Guard on the gaussian-form diagonal Z (m/2 pi hbar dtau)^(D/2) / N, which
// must stay well below 1 for the propagator to couple mesh points.
DiagonalReport diagonal_dominance_report(const SparseKernel& K);

// `row col value` lines, 17 significant digits, sorted by (row, col).
void dump_kernel(const SparseKernel& K, const std::filesystem::path& path);

}  // namespace itnumm
