#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <random>

#include <Eigen/Dense>

#include "itnumm/error.hpp"
#include "itnumm/kernel.hpp"
#include "itnumm/parallel.hpp"

using namespace itnumm;

namespace {

// Small trapped system whose V2 factors stay moderate.
SystemSpec soft_trap(int D) {
  SystemSpec s;
  s.kind = PotentialKind::lj_harmonic_trap;
  s.D = D;
  s.epsilon = 1.0;
  s.r_e = 1.0;
  s.a_core = 0.7;
  return s;
}

Mesh manual_mesh(int D, std::vector<double> pts, DensityKind kind, double dtau, double log_Z) {
  Mesh m;
  m.D = D;
  m.points = std::move(pts);
  m.density_kind = kind;
  m.dtau = dtau;
  m.log_Z = log_Z;
  return m;
}

Eigen::MatrixXd dense(const SparseKernel& K) {
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(K.n), static_cast<Eigen::Index>(K.n));
  for (std::size_t i = 0; i < K.n; ++i)
    for (std::size_t p = K.row_ptr[i]; p < K.row_ptr[i + 1]; ++p)
      A(static_cast<Eigen::Index>(i), K.col[p]) = K.val[p];
  return A;
}

std::vector<double> sorted_real_eigenvalues(const Eigen::MatrixXd& A) {
  Eigen::EigenSolver<Eigen::MatrixXd> es(A);
  std::vector<double> v;
  for (Eigen::Index i = 0; i < A.rows(); ++i) {
    CHECK(std::abs(es.eigenvalues()(i).imag()) < 1e-12 * es.eigenvalues().cwiseAbs().maxCoeff());
    v.push_back(es.eigenvalues()(i).real());
  }
  std::sort(v.begin(), v.end());
  return v;
}

}  // namespace

TEST_CASE("single point kernel is Z (m / 2 pi hbar dtau)^(D/2)") {
  SystemSpec s;
  const double dtau = 0.3, logZ = std::log(2.5);
  const Mesh m = manual_mesh(1, {0.4}, DensityKind::full_H1, dtau, logZ);
  const SparseKernel K = assemble(m, s, 1e-10);
  REQUIRE(K.nnz() == 1);
  CHECK(K.val[0] == doctest::Approx(2.5 * std::sqrt(1.0 / (2.0 * std::numbers::pi * dtau))).epsilon(1e-14));
  CHECK(K.form == KernelForm::gaussian);
  CHECK(K.symmetrized);
}

TEST_CASE("two-point Gaussian ratio") {
  SystemSpec s;
  s.mass = 1.7;
  const double dtau = 0.2, d = 0.35;
  const Mesh m = manual_mesh(1, {0.0, d}, DensityKind::full_H1, dtau, 0.0);
  const SparseKernel K = assemble(m, s, 1e-10);
  CHECK(K.at(0, 1) / K.at(0, 0) ==
        doctest::Approx(std::exp(-s.mass * d * d / (2.0 * s.hbar * dtau))).epsilon(1e-14));
  CHECK(K.at(0, 1) == K.at(1, 0));
}

TEST_CASE("diagonal value and V2 column factor") {
  const SystemSpec s = soft_trap(2);
  const double dtau = 0.1;
  const Mesh m = sample_ordered_subspace(s, dtau, 40, 5);
  const SparseKernel K = assemble(m, s, 1e-10);
  CHECK(K.form == KernelForm::v2_column);
  CHECK_FALSE(K.symmetrized);
  const double pref = m.log_Z - std::log(40.0) + std::log(s.mass / (2.0 * std::numbers::pi * s.hbar * dtau));
  for (std::size_t j = 0; j < m.size(); ++j) {
    const double expect = std::exp(pref - dtau * v2(m.point(j), s) / s.hbar);
    CHECK(K.at(j, j) == doctest::Approx(expect).epsilon(1e-13));
  }
  // column factor: K_jk / K_kj = exp(-dtau (V2_k - V2_j) / hbar)
  for (std::size_t j = 0; j < m.size(); ++j)
    for (std::size_t p = K.row_ptr[j]; p < K.row_ptr[j + 1]; ++p) {
      const std::size_t k = K.col[p];
      const double ratio = std::exp(-dtau * (v2(m.point(k), s) - v2(m.point(j), s)) / s.hbar);
      CHECK(K.val[p] / K.at(k, j) == doctest::Approx(ratio).epsilon(1e-12));
    }
}

TEST_CASE("stored values are positive, symmetric pattern, diagonal present") {
  const SystemSpec s = soft_trap(3);
  const Mesh m = sample_ordered_subspace(s, 0.05, 500, 2);
  const SparseKernel K = assemble(m, s, 1e-6);
  for (double v : K.val) CHECK(v > 0);
  for (std::size_t j = 0; j < K.n; ++j) {
    CHECK(K.at(j, j) > 0);
    for (std::size_t p = K.row_ptr[j]; p + 1 < K.row_ptr[j + 1]; ++p) CHECK(K.col[p] < K.col[p + 1]);
    for (std::size_t p = K.row_ptr[j]; p < K.row_ptr[j + 1]; ++p) CHECK(K.at(K.col[p], j) > 0);
  }
  const SparseKernel S = symmetrize(K);
  CHECK(S.symmetrized);
  for (std::size_t j = 0; j < S.n; ++j)
    for (std::size_t p = S.row_ptr[j]; p < S.row_ptr[j + 1]; ++p) CHECK(S.val[p] == S.at(S.col[p], j));
  // direct symmetric assembly gives the same matrix
  const SparseKernel S2 = assemble(m, s, 1e-6, true);
  CHECK(S2.col == S.col);
  CHECK(S2.row_ptr == S.row_ptr);
  double worst = 0;
  for (std::size_t p = 0; p < S.nnz(); ++p) worst = std::max(worst, std::abs(S2.val[p] / S.val[p] - 1.0));
  CHECK(worst < 1e-14);
}

TEST_CASE("symmetrize leaves a gaussian kernel unchanged") {
  SystemSpec s;
  RunParams p;
  p.N = 60;
  p.dtau = 0.05;
  const Mesh m = build_mesh(s, p);
  const SparseKernel K = assemble(m, s, 1e-10);
  const SparseKernel S = symmetrize(K);
  CHECK(S.val == K.val);
  CHECK(S.col == K.col);
}

TEST_CASE("symmetrize preserves the spectrum on random small instances") {
  for (unsigned seed = 1; seed <= 6; ++seed) {
    const SystemSpec s = soft_trap(2);
    const Mesh m = sample_ordered_subspace(s, 0.1, 8, seed);
    const SparseKernel K = assemble(m, s, 1e-12);
    const SparseKernel S = symmetrize(K);
    const auto eK = sorted_real_eigenvalues(dense(K));
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(dense(S));
    for (int i = 0; i < 8; ++i)
      CHECK(es.eigenvalues()(i) == doctest::Approx(eK[static_cast<std::size_t>(i)]).epsilon(1e-12));
  }
}

TEST_CASE("matvec against a dense product") {
  const SystemSpec s = soft_trap(2);
  const Mesh m = sample_ordered_subspace(s, 0.1, 100, 8);
  const SparseKernel K = assemble(m, s, 1e-10);
  std::mt19937_64 gen(1);
  std::uniform_real_distribution<double> ud(-1, 1);
  Eigen::VectorXd x(100);
  for (int i = 0; i < 100; ++i) x(i) = ud(gen);
  std::vector<double> y(100);
  matvec(K, {x.data(), 100}, y);
  const Eigen::VectorXd ref = dense(K) * x;
  for (int i = 0; i < 100; ++i) CHECK(y[static_cast<std::size_t>(i)] == doctest::Approx(ref(i)).epsilon(1e-13));

  std::vector<double> zero(100, 0.0);
  matvec(K, zero, y);
  for (double v : y) CHECK(v == 0.0);
  std::vector<double> bad(99);
  CHECK_THROWS(matvec(K, bad, y));
}

TEST_CASE("matvec of a scaled identity") {
  SystemSpec s;
  // points far apart relative to r_cut: only the diagonal survives
  const Mesh m = manual_mesh(1, {0.0, 100.0, 200.0}, DensityKind::full_H1, 0.01, 0.0);
  const SparseKernel K = assemble(m, s, 1e-10);
  REQUIRE(K.nnz() == 3);
  const double c = K.val[0];
  const std::vector<double> x{1.0, -2.0, 3.5};
  std::vector<double> y(3);
  matvec(K, x, y);
  for (int i = 0; i < 3; ++i) CHECK(y[static_cast<std::size_t>(i)] == doctest::Approx(c * x[static_cast<std::size_t>(i)]));
}

TEST_CASE("matvec does not depend on the worker count") {
  const SystemSpec s = soft_trap(3);
  const Mesh m = sample_ordered_subspace(s, 0.05, 2000, 4);
  set_thread_count(1);
  const SparseKernel K1 = assemble(m, s, 1e-8, true);
  std::vector<double> x(m.size()), y1(m.size()), y4(m.size());
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = std::sin(0.37 * static_cast<double>(i));
  matvec(K1, x, y1);
  set_thread_count(4);
  const SparseKernel K4 = assemble(m, s, 1e-8, true);
  matvec(K4, x, y4);
  set_thread_count(0);
  CHECK(K1.val == K4.val);
  CHECK(y1 == y4);
}

TEST_CASE("shrinking the threshold only adds entries") {
  const SystemSpec s = soft_trap(2);
  const Mesh m = sample_ordered_subspace(s, 0.1, 400, 6);
  const SparseKernel a = assemble(m, s, 1e-6);
  const SparseKernel b = assemble(m, s, 1e-9);
  CHECK(b.nnz() > a.nnz());
  const double floor = 1e-6 * std::exp(a.log_prefactor);
  for (std::size_t j = 0; j < a.n; ++j)
    for (std::size_t p = a.row_ptr[j]; p < a.row_ptr[j + 1]; ++p) {
      CHECK(b.at(j, a.col[p]) == a.val[p]);
      // Gaussian part of every stored entry is >= theta times the prefactor
      const double gauss = a.val[p] * std::exp(a.v2_exponent[a.col[p]]);
      CHECK(gauss >= floor * (1 - 1e-12));
    }
}

TEST_CASE("scaling Z scales the spectrum") {
  const SystemSpec s = soft_trap(2);
  Mesh m = sample_ordered_subspace(s, 0.1, 12, 3);
  const SparseKernel S1 = assemble(m, s, 1e-12, true);
  m.log_Z += std::log(3.0);
  const SparseKernel S2 = assemble(m, s, 1e-12, true);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> e1(dense(S1)), e2(dense(S2));
  for (int i = 0; i < 12; ++i) {
    CHECK(e2.eigenvalues()(i) == doctest::Approx(3.0 * e1.eigenvalues()(i)).epsilon(1e-12));
    const double overlap = std::abs(e1.eigenvectors().col(i).dot(e2.eigenvectors().col(i)));
    CHECK(overlap == doctest::Approx(1.0).epsilon(1e-10));
  }
}

TEST_CASE("cutoff radius") {
  CHECK(cutoff_radius(1.0, 1.0, 0.5, std::exp(-2.0)) == doctest::Approx(std::sqrt(2.0)));
  CHECK_THROWS_AS(cutoff_radius(1.0, 1.0, 0.5, 1.0), ConfigError);
  CHECK_THROWS_AS(cutoff_radius(1.0, 1.0, 0.5, 2.0), ConfigError);
}

TEST_CASE("diagonal dominance report") {
  SystemSpec s;
  // large dtau: prefactor vanishes
  RunParams p;
  p.N = 200;
  p.dtau = 50.0;
  {
    const Mesh m = build_mesh(s, p);
    const auto r = diagonal_dominance_report(assemble(m, s, 1e-10));
    CHECK(r.value < 0.1);
    CHECK_FALSE(r.warning);
  }
  // HO: Z (m/2 pi hbar dtau)^(1/2) / N = 1 / (omega dtau N); value 1 at dtau = 1/(omega N)
  p.dtau = 1.0 / 200.0;
  {
    const Mesh m = build_mesh(s, p);
    const auto r = diagonal_dominance_report(assemble(m, s, 1e-10));
    CHECK(r.value == doctest::Approx(1.0).epsilon(1e-8));
    CHECK(r.warning);
  }
  // N=500, dtau=0.0055, against the closed form
  p.N = 500;
  p.dtau = 0.0055;
  {
    const Mesh m = build_mesh(s, p);
    const auto r = diagonal_dominance_report(assemble(m, s, 1e-10));
    CHECK(r.value == doctest::Approx(1.0 / (0.0055 * 500)).epsilon(1e-8));
  }
}

TEST_CASE("kernel dump format") {
  SystemSpec s;
  const Mesh m = manual_mesh(1, {0.0, 0.1, 0.2}, DensityKind::full_H1, 0.05, 0.0);
  const SparseKernel K = assemble(m, s, 1e-10);
  const auto path = std::filesystem::temp_directory_path() / "itnumm_kernel_dump.txt";
  dump_kernel(K, path);
  std::ifstream is(path);
  std::size_t row, col, count = 0, prow = 0, pcol = 0;
  double val;
  while (is >> row >> col >> val) {
    if (count > 0) CHECK((row > prow || (row == prow && col > pcol)));
    CHECK(val == doctest::Approx(K.at(row, col)).epsilon(1e-15));
    prow = row;
    pcol = col;
    ++count;
  }
  CHECK(count == K.nnz());
  std::filesystem::remove(path);
}
