#include "itnumm/solver.hpp"

namespace itnumm {

SpectrumResult solve_spectrum(std::shared_ptr<const Mesh> mesh, const SystemSpec& spec,
                              int n_states, double threshold,
                              const LanczosOptions& options,
                              SolveDiagnostics* diagnostics) {
  SpectrumResult out;
  out.spec = spec;
  out.mesh = mesh;
  out.threshold = threshold;
  out.log_w = log_quadrature_weights(*mesh, spec);

  EigenPairs pairs;
  Eigen::MatrixXd phi;
  {
    const SparseKernel S = assemble(*mesh, spec, threshold, /*symmetric=*/true);
    out.r_cut = S.r_cut;
    out.log_prefactor = S.log_prefactor;
    out.v2_exponent = S.v2_exponent;
    if (diagnostics) {
      diagnostics->diagonal = diagonal_dominance_report(S);
      diagnostics->nnz = S.nnz();
    }
    pairs = top_eigenpairs(S, n_states, options);
    phi = right_eigenvectors(S, pairs);
  }
  out.lambdas = pairs.values;
  out.residuals = pairs.residuals;
  out.matvecs = pairs.matvecs;
  out.restarts = pairs.restarts;
  out.energies = energies_from_lambdas(out.lambdas, mesh->dtau, spec.hbar);
  out.states = finalize_states(phi, {}, out.log_w);
  return out;
}

SpectrumResult solve(const SystemSpec& spec, const RunParams& params,
                     const LanczosOptions& options, SolveDiagnostics* diagnostics) {
  auto mesh = std::make_shared<const Mesh>(build_mesh(spec, params));
  return solve_spectrum(std::move(mesh), spec, params.n_states, params.threshold, options,
                        diagnostics);
}

}  // namespace itnumm
