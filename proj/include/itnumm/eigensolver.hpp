#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "itnumm/error.hpp"
#include "itnumm/kernel.hpp"

namespace itnumm {

using LinearMap = std::function<void(std::span<const double>, std::span<double>)>;

struct LanczosOptions {
  double tol = 1e-10;
  int max_restarts = 2000;
  // Krylov basis size; 0 picks max(2k + 20, k + 40) capped at n.
  int basis_size = 0;
};

struct EigenPairs {
  std::vector<double> values;  // descending
  Eigen::MatrixXd vectors;     // n x k, orthonormal columns
  std::vector<double> residuals;  // ||A x - lambda x|| / lambda_1
  int matvecs = 0;
  int restarts = 0;
};

class NonConvergence : public NumericError {
 public:
  NonConvergence(const std::string& what, std::vector<double> residuals)
      : NumericError(what), residuals_(std::move(residuals)) {}
  const std::vector<double>& residuals() const { return residuals_; }

 private:
  std::vector<double> residuals_;
};

// The k algebraically largest eigenpairs of a symmetric operator by
// thick-restart Lanczos with full (twice-iterated Gram-Schmidt)
// reorthogonalization, started from the normalized all-ones vector.
EigenPairs top_eigenpairs(const LinearMap& A, std::size_t n, int k,
                          const LanczosOptions& options = {});
EigenPairs top_eigenpairs(const SparseKernel& S, int k,
                          const LanczosOptions& options = {});

// E_n = -(hbar/dtau) ln lambda_n.
std::vector<double> energies_from_lambdas(std::span<const double> lambdas,
                                          double dtau, double hbar = 1.0);

// Maps symmetric-frame vectors back to mesh wavefunctions Phi = W^{-1/2} psi,
// W_j = exp(-v2_exponent_j) (empty span: W = identity), normalizes each to
// sum_j exp(log_w_j) Phi_j^2 = 1 and makes the largest-magnitude component
// positive.
Eigen::MatrixXd finalize_states(const Eigen::MatrixXd& raw,
                                std::span<const double> v2_exponent,
                                std::span<const double> log_w);

// Right eigenvectors of K from symmetric-frame pairs of S. Computed as
// Phi_j = exp(c_j/2) (S psi)_j / lambda rather than exp(c_j/2) psi_j: inside
// the repulsive core psi_j is pure rounding noise while (S psi)_j keeps full
// relative precision. Identity for the gaussian form.
Eigen::MatrixXd right_eigenvectors(const SparseKernel& S, const EigenPairs& pairs);

// Weighted inner product sum_j exp(log_w_j) f_j g_j.
double weighted_dot(std::span<const double> f, std::span<const double> g,
                    std::span<const double> log_w);

}  // namespace itnumm
