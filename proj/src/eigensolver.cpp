#include "itnumm/eigensolver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "itnumm/rng.hpp"

namespace itnumm {

namespace {

// Orthogonalizes w against the first `cols` columns of V twice; returns the
// accumulated projection coefficients.
Eigen::VectorXd orthogonalize(const Eigen::MatrixXd& V, Eigen::Index cols,
                              Eigen::VectorXd& w) {
  const auto basis = V.leftCols(cols);
  Eigen::VectorXd h = basis.transpose() * w;
  w.noalias() -= basis * h;
  const Eigen::VectorXd h2 = basis.transpose() * w;
  w.noalias() -= basis * h2;
  return h + h2;
}

// Deterministic replacement direction after an invariant subspace is found.
Eigen::VectorXd restart_direction(std::size_t n, std::uint64_t stream) {
  const Philox4x32 rng(0x1A2B3C4D5E6F7081ULL);
  Eigen::VectorXd v(static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i)
    v[static_cast<Eigen::Index>(i)] = Philox4x32::normal_pair(rng(i, stream))[0];
  return v;
}

}  // namespace

EigenPairs top_eigenpairs(const LinearMap& A, std::size_t n, int k,
                          const LanczosOptions& options) {
  if (k < 1) throw ConfigError("n_states must be >= 1");
  if (static_cast<std::size_t>(k) > n)
    throw ConfigError("n_states exceeds the matrix dimension");
  const auto N = static_cast<Eigen::Index>(n);
  Eigen::Index m = options.basis_size > 0 ? options.basis_size
                                          : std::max<Eigen::Index>(2 * k + 20, k + 40);
  m = std::min<Eigen::Index>(m, N);
  m = std::max<Eigen::Index>(m, std::min<Eigen::Index>(N, k + 1));

  Eigen::MatrixXd V(N, m + 1);
  Eigen::MatrixXd H = Eigen::MatrixXd::Zero(m, m);
  V.col(0).setConstant(1.0 / std::sqrt(static_cast<double>(n)));

  EigenPairs out;
  Eigen::VectorXd w(N);
  std::vector<double> beta(static_cast<std::size_t>(m), 0.0);
  Eigen::Index kept = 0;
  double scale = 0.0;  // running estimate of ||A||
  std::uint64_t injections = 0;

  for (int restart = 0;; ++restart) {
    Eigen::Index size = m;
    for (Eigen::Index j = kept; j < m; ++j) {
      A(std::span<const double>(V.col(j).data(), n), std::span<double>(w.data(), n));
      ++out.matvecs;
      const Eigen::VectorXd h = orthogonalize(V, j + 1, w);
      for (Eigen::Index i = 0; i <= j; ++i) H(i, j) = H(j, i) = h[i];
      scale = std::max(scale, h.cwiseAbs().maxCoeff());
      double b = w.norm();
      scale = std::max(scale, b);
      if (j + 1 == N) {
        // Full space spanned: the projection is exact.
        beta[static_cast<std::size_t>(j)] = 0.0;
        size = j + 1;
        break;
      }
      if (b <= 1e-12 * scale) {
        // Invariant subspace: continue from a fresh orthogonal direction.
        bool found = false;
        for (int attempt = 0; attempt < 8 && !found; ++attempt) {
          w = restart_direction(n, injections++);
          orthogonalize(V, j + 1, w);
          const double nw = w.norm();
          if (nw > 1e-8) {
            w /= nw;
            found = true;
          }
        }
        if (!found) {
          size = j + 1;
          beta[static_cast<std::size_t>(j)] = 0.0;
          break;
        }
        b = 0.0;
        V.col(j + 1) = w;
      } else {
        V.col(j + 1) = w / b;
      }
      beta[static_cast<std::size_t>(j)] = b;
      if (j + 1 < m) H(j + 1, j) = H(j, j + 1) = b;
    }

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(H.topLeftCorner(size, size));
    if (eig.info() != Eigen::Success) throw NumericError("Lanczos: projected eigensolve failed");
    // Eigen orders ascending; reverse to descending.
    const Eigen::VectorXd theta = eig.eigenvalues().reverse();
    const Eigen::MatrixXd Y = eig.eigenvectors().rowwise().reverse();
    const double last_beta = beta[static_cast<std::size_t>(size - 1)];
    const double ref = std::max(std::abs(theta[0]), std::numeric_limits<double>::min());
    std::vector<double> res(static_cast<std::size_t>(k));
    bool converged = true;
    for (int i = 0; i < k; ++i) {
      res[static_cast<std::size_t>(i)] = std::abs(last_beta * Y(size - 1, i)) / ref;
      converged = converged && res[static_cast<std::size_t>(i)] <= options.tol;
    }
    out.restarts = restart;

    if (converged) {
      out.values.assign(theta.data(), theta.data() + k);
      out.vectors = V.leftCols(size) * Y.leftCols(k);
      // Explicit residuals of the returned pairs.
      out.residuals.resize(static_cast<std::size_t>(k));
      Eigen::VectorXd ax(N);
      for (int i = 0; i < k; ++i) {
        out.vectors.col(i).normalize();
        A(std::span<const double>(out.vectors.col(i).data(), n), std::span<double>(ax.data(), n));
        out.residuals[static_cast<std::size_t>(i)] =
            (ax - out.values[static_cast<std::size_t>(i)] * out.vectors.col(i)).norm() / ref;
      }
      return out;
    }
    if (restart >= options.max_restarts) {
      std::ostringstream msg;
      msg << "Lanczos did not converge after " << restart << " restarts (worst residual "
          << *std::max_element(res.begin(), res.end()) << ")";
      throw NonConvergence(msg.str(), res);
    }

    // Thick restart: keep p Ritz vectors plus the residual direction.
    const Eigen::Index p = std::min<Eigen::Index>(size - 1, k + (size - k) / 2);
    const Eigen::MatrixXd kept_vectors = V.leftCols(size) * Y.leftCols(p);
    V.leftCols(p) = kept_vectors;
    V.col(p) = V.col(size);
    H.setZero();
    for (Eigen::Index i = 0; i < p; ++i) H(i, i) = theta[i];
    kept = p;
  }
}

EigenPairs top_eigenpairs(const SparseKernel& S, int k, const LanczosOptions& options) {
  if (!S.symmetrized) throw ConfigError("top_eigenpairs requires a symmetric kernel");
  return top_eigenpairs(
      [&S](std::span<const double> x, std::span<double> y) { matvec(S, x, y); }, S.n, k,
      options);
}

std::vector<double> energies_from_lambdas(std::span<const double> lambdas, double dtau,
                                          double hbar) {
  std::vector<double> e(lambdas.size());
  for (std::size_t i = 0; i < lambdas.size(); ++i) {
    if (!(lambdas[i] > 0))
      throw NumericError("non-positive propagator eigenvalue (thresholding or convergence failure)");
    e[i] = -(hbar / dtau) * std::log(lambdas[i]);
  }
  return e;
}

double weighted_dot(std::span<const double> f, std::span<const double> g,
                    std::span<const double> log_w) {
  double s = 0.0;
  for (std::size_t j = 0; j < f.size(); ++j) {
    const double p = f[j] * g[j];
    if (p != 0.0) s += std::copysign(std::exp(log_w[j] + std::log(std::abs(p))), p);
  }
  return s;
}

Eigen::MatrixXd right_eigenvectors(const SparseKernel& S, const EigenPairs& pairs) {
  if (S.v2_exponent.empty()) return pairs.vectors;
  const auto n = static_cast<Eigen::Index>(S.n);
  Eigen::MatrixXd out(n, pairs.vectors.cols());
  std::vector<double> y(S.n);
  for (Eigen::Index c = 0; c < pairs.vectors.cols(); ++c) {
    matvec(S, {pairs.vectors.col(c).data(), S.n}, y);
    const double inv = 1.0 / pairs.values[static_cast<std::size_t>(c)];
    for (Eigen::Index j = 0; j < n; ++j)
      out(j, c) = std::exp(0.5 * S.v2_exponent[static_cast<std::size_t>(j)]) *
                  y[static_cast<std::size_t>(j)] * inv;
  }
  return out;
}

Eigen::MatrixXd finalize_states(const Eigen::MatrixXd& raw, std::span<const double> v2_exponent,
                                std::span<const double> log_w) {
  const Eigen::Index n = raw.rows();
  if (static_cast<std::size_t>(n) != log_w.size())
    throw ConfigError("finalize_states: weight count does not match vector length");
  Eigen::MatrixXd out = raw;
  if (!v2_exponent.empty()) {
    for (Eigen::Index j = 0; j < n; ++j)
      out.row(j) *= std::exp(0.5 * v2_exponent[static_cast<std::size_t>(j)]);
  }
  for (Eigen::Index c = 0; c < out.cols(); ++c) {
    auto col = out.col(c);
    std::span<const double> v(col.data(), static_cast<std::size_t>(n));
    const double norm2 = weighted_dot(v, v, log_w);
    if (!(norm2 > 0) || !std::isfinite(norm2))
      throw NumericError("finalize_states: state has zero weighted norm");
    col /= std::sqrt(norm2);
    Eigen::Index imax = 0;
    col.cwiseAbs().maxCoeff(&imax);
    if (col[imax] < 0) col = -col;
  }
  return out;
}

}  // namespace itnumm
