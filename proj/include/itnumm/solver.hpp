#pragma once

#include <memory>
#include <vector>

#include <Eigen/Dense>

#include "itnumm/eigensolver.hpp"
#include "itnumm/kernel.hpp"
#include "itnumm/mesh.hpp"
#include "itnumm/model.hpp"

namespace itnumm {

// Eigenpairs of the propagator on one mesh, with everything needed to
// evaluate the states off-mesh and to integrate against them.
struct SpectrumResult {
  SystemSpec spec;
  std::shared_ptr<const Mesh> mesh;
  double threshold = 0.0;
  double r_cut = 0.0;
  double log_prefactor = 0.0;
  std::vector<double> lambdas;    // descending
  std::vector<double> energies;   // ascending
  std::vector<double> residuals;  // ||S psi - lambda psi|| / lambda_1
  Eigen::MatrixXd states;         // N x n_states, column n is Phi_n
  std::vector<double> log_w;      // log quadrature weights of the mesh
  std::vector<double> v2_exponent;  // dtau V2/hbar per point (empty: none)
  int matvecs = 0;
  int restarts = 0;

  int n_states() const { return static_cast<int>(lambdas.size()); }
  double dtau() const { return mesh->dtau; }
};

struct SolveDiagnostics {
  DiagonalReport diagonal;
  std::size_t nnz = 0;
};

// Assembles the symmetrized kernel on `mesh`, extracts the n_states leading
// eigenpairs and converts them to energies and normalized mesh wavefunctions.
SpectrumResult solve_spectrum(std::shared_ptr<const Mesh> mesh, const SystemSpec& spec,
                              int n_states, double threshold,
                              const LanczosOptions& options = {},
                              SolveDiagnostics* diagnostics = nullptr);

// Mesh + solve in one call.
SpectrumResult solve(const SystemSpec& spec, const RunParams& params,
                     const LanczosOptions& options = {},
                     SolveDiagnostics* diagnostics = nullptr);

}  // namespace itnumm
