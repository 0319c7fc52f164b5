#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "itnumm/eigensolver.hpp"
#include "itnumm/error.hpp"
#include "itnumm/oracle.hpp"
#include "itnumm/solver.hpp"

using namespace itnumm;

namespace {

SystemSpec soft_trap() {
  SystemSpec s;
  s.kind = PotentialKind::lj_harmonic_trap;
  s.D = 2;
  s.epsilon = 1.0;
  s.a_core = 0.7;
  return s;
}

Eigen::MatrixXd dense(const SparseKernel& K) {
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(K.n), static_cast<Eigen::Index>(K.n));
  for (std::size_t i = 0; i < K.n; ++i)
    for (std::size_t p = K.row_ptr[i]; p < K.row_ptr[i + 1]; ++p)
      A(static_cast<Eigen::Index>(i), K.col[p]) = K.val[p];
  return A;
}

}  // namespace

TEST_CASE("2x2 analytic case") {
  const LinearMap A = [](std::span<const double> x, std::span<double> y) {
    y[0] = 2 * x[0] + x[1];
    y[1] = x[0] + 2 * x[1];
  };
  const EigenPairs r = top_eigenpairs(A, 2, 2);
  CHECK(r.values[0] == doctest::Approx(3.0).epsilon(1e-14));
  CHECK(r.values[1] == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(std::abs(r.vectors(0, 0)) == doctest::Approx(1 / std::sqrt(2.0)));
  CHECK(r.vectors(0, 0) * r.vectors(1, 0) > 0);
  CHECK(r.vectors(0, 1) * r.vectors(1, 1) < 0);
  CHECK_THROWS(top_eigenpairs(A, 2, 3));
}

TEST_CASE("starting vector orthogonal to the top eigenvector") {
  // all-ones is an eigenvector of the smaller eigenvalue; the solver must
  // still find the larger one
  const LinearMap A = [](std::span<const double> x, std::span<double> y) {
    y[0] = x[0] - 2 * x[1];
    y[1] = -2 * x[0] + x[1];
  };
  const EigenPairs r = top_eigenpairs(A, 2, 1);
  CHECK(r.values[0] == doctest::Approx(3.0).epsilon(1e-12));
}

TEST_CASE("harmonic mesh: Krylov against dense diagonalization") {
  SystemSpec s;
  RunParams p;
  p.N = 200;
  p.dtau = 0.0055 * 500.0 / 200.0;
  const Mesh m = build_mesh(s, p);
  const SparseKernel S = assemble(m, s, 1e-10, true);
  const EigenPairs kry = top_eigenpairs(S, 20);
  const EigenPairs den = dense_reference(S, 20);
  for (int i = 0; i < 20; ++i) {
    CHECK(kry.values[static_cast<std::size_t>(i)] == doctest::Approx(den.values[static_cast<std::size_t>(i)]).epsilon(1e-10));
    CHECK(kry.residuals[static_cast<std::size_t>(i)] <= 1e-10);
    const double overlap = std::abs(kry.vectors.col(i).dot(den.vectors.col(i)));
    CHECK(overlap == doctest::Approx(1.0).epsilon(1e-8));
  }
  // Perron-Frobenius: the leading vector is single-signed, up to rounding in
  // the far tails where it has decayed below machine precision
  Eigen::VectorXd v0 = kry.vectors.col(0);
  if (v0.sum() < 0) v0 = -v0;
  CHECK(v0.minCoeff() > -1e-12 * v0.maxCoeff());
}

TEST_CASE("energies from eigenvalues") {
  const double dtau = 0.01;
  const std::vector<double> lam{1.0, std::exp(-0.5 * dtau)};
  const auto E = energies_from_lambdas(lam, dtau);
  CHECK(E[0] == 0.0);
  CHECK(E[1] == doctest::Approx(0.5).epsilon(1e-13));
  const std::vector<double> bad{0.5, 0.0};
  CHECK_THROWS_AS(energies_from_lambdas(bad, dtau), NumericError);
  const std::vector<double> neg{-0.1};
  CHECK_THROWS_AS(energies_from_lambdas(neg, dtau), NumericError);
}

TEST_CASE("harmonic oscillator ground state at N=500, dtau=0.0055") {
  SystemSpec s;
  RunParams p;
  p.N = 500;
  p.dtau = 0.0055;
  p.n_states = 50;
  const SpectrumResult r = solve(s, p);
  CHECK(std::abs(r.energies[0] - 0.5) / 0.5 < 1e-4);
  for (int n = 1; n < 50; ++n) {
    CHECK(r.energies[static_cast<std::size_t>(n)] >= r.energies[static_cast<std::size_t>(n - 1)]);
    CHECK(r.lambdas[static_cast<std::size_t>(n)] <= r.lambdas[static_cast<std::size_t>(n - 1)]);
  }
  for (int n = 0; n < 50; ++n)
    CHECK(r.energies[static_cast<std::size_t>(n)] ==
          doctest::Approx(-std::log(r.lambdas[static_cast<std::size_t>(n)]) / p.dtau).epsilon(1e-15));
  // leading state single-signed after the sign fix
  CHECK(r.states.col(0).minCoeff() > -1e-12 * r.states.col(0).maxCoeff());
}

TEST_CASE("finalize is idempotent and normalizes in the weighted product") {
  SystemSpec s;
  RunParams p;
  p.N = 300;
  p.dtau = 0.01;
  p.n_states = 6;
  const SpectrumResult r = solve(s, p);
  const Eigen::MatrixXd again = finalize_states(r.states, {}, r.log_w);
  CHECK((again - r.states).cwiseAbs().maxCoeff() < 1e-13);
  for (int n = 0; n < 6; ++n) {
    std::span<const double> v(r.states.col(n).data(), 300);
    CHECK(weighted_dot(v, v, r.log_w) == doctest::Approx(1.0).epsilon(1e-12));
  }
  // W = identity: the states are the raw vectors rescaled
  const Mesh m = build_mesh(s, p);
  const SparseKernel S = assemble(m, s, p.threshold, true);
  const EigenPairs raw = top_eigenpairs(S, 6);
  const Eigen::MatrixXd fin = finalize_states(raw.vectors, {}, r.log_w);
  for (int n = 0; n < 6; ++n) {
    const double ratio = fin(0, n) / raw.vectors(0, n);
    CHECK((fin.col(n) - ratio * raw.vectors.col(n)).cwiseAbs().maxCoeff() < 1e-12 * fin.col(n).cwiseAbs().maxCoeff());
  }
  Eigen::MatrixXd zero = Eigen::MatrixXd::Zero(300, 1);
  CHECK_THROWS_AS(finalize_states(zero, {}, r.log_w), NumericError);
}

TEST_CASE("unsymmetrized eigen-equation residual") {
  const SystemSpec s = soft_trap();
  const auto mesh = std::make_shared<const Mesh>(sample_ordered_subspace(s, 0.1, 600, 3));
  const SpectrumResult r = solve_spectrum(mesh, s, 10, 1e-12);
  const SparseKernel K = assemble(*mesh, s, 1e-12);
  std::vector<double> y(mesh->size());
  for (int n = 0; n < 10; ++n) {
    const auto col = r.states.col(n);
    matvec(K, {col.data(), mesh->size()}, y);
    double res = 0, nrm = 0;
    for (std::size_t j = 0; j < y.size(); ++j) {
      const double d = y[j] - r.lambdas[static_cast<std::size_t>(n)] * col(static_cast<Eigen::Index>(j));
      res += d * d;
      nrm += col(static_cast<Eigen::Index>(j)) * col(static_cast<Eigen::Index>(j));
    }
    CHECK(std::sqrt(res / nrm) <= 10 * 1e-10 * r.lambdas[0]);
  }
}

TEST_CASE("orthonormality in the exact discrete metric") {
  // The right eigenvectors of K are orthogonal under sum_j exp(-dtau V2_j) f_j g_j.
  const SystemSpec s = soft_trap();
  const auto mesh = std::make_shared<const Mesh>(sample_ordered_subspace(s, 0.1, 800, 9));
  const SpectrumResult r = solve_spectrum(mesh, s, 8, 1e-12);
  std::vector<double> metric(mesh->size());
  for (std::size_t j = 0; j < metric.size(); ++j) metric[j] = -r.v2_exponent[j];
  for (int m = 0; m < 8; ++m)
    for (int n = 0; n < m; ++n) {
      std::span<const double> a(r.states.col(m).data(), mesh->size()), b(r.states.col(n).data(), mesh->size());
      const double c = weighted_dot(a, b, metric) / std::sqrt(weighted_dot(a, a, metric) * weighted_dot(b, b, metric));
      CHECK(std::abs(c) < 1e-10);
    }
}

TEST_CASE("weighted orthogonality of the two lowest states of the N=6709 D=2 trap") {
  const SystemSpec s = resolve_natural_units(0.16, 0.5);
  RunParams p;
  p.N = 6709;
  p.dtau = 0.15 * lj_time_unit(s);
  p.n_states = 2;
  const SpectrumResult r = solve(s, p);
  std::span<const double> a(r.states.col(0).data(), 6709), b(r.states.col(1).data(), 6709);
  CHECK(std::abs(weighted_dot(a, b, r.log_w)) < 1e-8);
}

TEST_CASE("prefactor scaling shifts energies and keeps states") {
  const SystemSpec s = soft_trap();
  Mesh m = sample_ordered_subspace(s, 0.1, 500, 2);
  const double dtau = m.dtau;
  const auto a = solve_spectrum(std::make_shared<const Mesh>(m), s, 6, 1e-12);
  const double c = 1.7;
  m.log_Z += std::log(c);
  const auto b = solve_spectrum(std::make_shared<const Mesh>(m), s, 6, 1e-12);
  for (int n = 0; n < 6; ++n) {
    const auto k = static_cast<std::size_t>(n);
    CHECK(b.energies[k] - a.energies[k] == doctest::Approx(-std::log(c) / dtau).epsilon(1e-9));
    // weights also carry Z: compare shapes
    const double ratio = b.states(0, n) / a.states(0, n);
    CHECK((b.states.col(n) - ratio * a.states.col(n)).cwiseAbs().maxCoeff() <
          1e-8 * a.states.col(n).cwiseAbs().maxCoeff());
  }
}

TEST_CASE("requesting more states than points fails") {
  SystemSpec s;
  RunParams p;
  p.N = 10;
  p.dtau = 0.1;
  p.n_states = 10;
  const Mesh m = build_mesh(s, p);
  const SparseKernel S = assemble(m, s, 1e-10, true);
  CHECK_THROWS(top_eigenpairs(S, 11));
  const EigenPairs all = top_eigenpairs(S, 10);
  CHECK(all.values.size() == 10u);
}

TEST_CASE("non-convergence carries residuals") {
  SystemSpec s;
  RunParams p;
  p.N = 400;
  p.dtau = 0.01;
  const Mesh m = build_mesh(s, p);
  const SparseKernel S = assemble(m, s, 1e-10, true);
  LanczosOptions o;
  o.max_restarts = 0;
  o.basis_size = 12;
  o.tol = 1e-15;
  try {
    top_eigenpairs(S, 10, o);
    FAIL("expected non-convergence");
  } catch (const NonConvergence& e) {
    CHECK(e.residuals().size() == 10u);
  }
}
