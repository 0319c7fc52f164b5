#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>

#include "itnumm/error.hpp"
#include "itnumm/observables.hpp"
#include "itnumm/parallel.hpp"

using namespace itnumm;

namespace {

std::shared_ptr<const SpectrumResult> ho() {
  static const auto r = [] {
    SystemSpec s;
    RunParams p;
    p.N = 500;
    p.dtau = 0.0055;
    p.n_states = 50;
    return std::make_shared<const SpectrumResult>(solve(s, p));
  }();
  return r;
}

SystemSpec soft_trap(int D) {
  SystemSpec s;
  s.kind = PotentialKind::lj_harmonic_trap;
  s.D = D;
  s.epsilon = 1.0;
  s.a_core = 0.7;
  return s;
}

std::shared_ptr<const SpectrumResult> trap2() {
  static const auto r = [] {
    const SystemSpec s = soft_trap(2);
    auto mesh = std::make_shared<const Mesh>(sample_ordered_subspace(s, 0.1, 1500, 21));
    return std::make_shared<const SpectrumResult>(solve_spectrum(mesh, s, 20, 1e-10));
  }();
  return r;
}

DensityProfile flat_profile(std::vector<double> v) {
  DensityProfile p;
  p.D = 2;
  for (std::size_t i = 0; i < v.size(); ++i) p.x.push_back(static_cast<double>(i));
  p.total = std::move(v);
  return p;
}

double sup_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double d = 0;
  for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
  return d;
}

}  // namespace

TEST_CASE("harmonic ground-state density is the analytic Gaussian") {
  const DensityProfile p = state_density(*ho(), 0, Statistics::distinguishable);
  CHECK_FALSE(p.windowed);
  double worst = 0;
  for (std::size_t i = 0; i < p.x.size(); ++i) {
    const double exact = std::exp(-p.x[i] * p.x[i]) / std::sqrt(std::numbers::pi);
    worst = std::max(worst, std::abs(p.total[i] - exact));
  }
  CHECK(worst < 1e-3);
  CHECK(integrate(p) == doctest::Approx(1.0).epsilon(0.01));
}

TEST_CASE("densities integrate to D and stay essentially non-negative") {
  for (int n : {0, 7, 30}) {
    const DensityProfile p = state_density(*ho(), n, Statistics::distinguishable);
    CHECK(integrate(p) == doctest::Approx(p.normalization).epsilon(0.01));
    const double top = *std::max_element(p.total.begin(), p.total.end());
    CHECK(*std::min_element(p.total.begin(), p.total.end()) > -0.01 * top);
  }
  for (int n : {0, 5}) {
    const DensityProfile p = state_density(*trap2(), n, Statistics::boson);
    CHECK(p.windowed);
    CHECK(p.normalization == 2.0);
    CHECK(integrate(p) == doctest::Approx(2.0).epsilon(0.01));
    const double top = *std::max_element(p.total.begin(), p.total.end());
    CHECK(*std::min_element(p.total.begin(), p.total.end()) > -0.01 * top);
  }
}

TEST_CASE("boson and fermion densities coincide") {
  for (int n : {0, 3}) {
    const DensityProfile b = state_density(*trap2(), n, Statistics::boson);
    const DensityProfile f = state_density(*trap2(), n, Statistics::fermion);
    CHECK(sup_diff(b.total, f.total) <= 1e-12);
    for (int l = 0; l < 2; ++l) CHECK(sup_diff(b.per_coordinate[l], f.per_coordinate[l]) <= 1e-12);
  }
}

TEST_CASE("symmetric trap gives parity-even total densities") {
  for (int n : {0, 1, 4}) {
    const DensityProfile p = state_density(*ho(), n, Statistics::distinguishable);
    const std::size_t m = p.x.size();
    const double top = *std::max_element(p.total.begin(), p.total.end());
    for (std::size_t i = 0; i < m; ++i) CHECK(std::abs(p.total[i] - p.total[m - 1 - i]) < 1e-9 * top);
  }
}

TEST_CASE("doubling n_k at fixed k_max") {
  DensityOptions a, b;
  a.kgrid = default_kgrid(ho()->spec);
  b.kgrid = a.kgrid;
  b.kgrid->n_k *= 2;
  const DensityProfile pa = state_density(*ho(), 2, Statistics::distinguishable, a);
  const DensityProfile pb = state_density(*ho(), 2, Statistics::distinguishable, b);
  CHECK(sup_diff(pa.total, pb.total) < 1e-6);
}

TEST_CASE("aliasing guard") {
  DensityOptions o;
  o.kgrid = KGrid{10.0, 256};
  o.xgrid = XGrid{-5.0, 5.0, 20};  // dx = 0.53 > pi/10
  CHECK_THROWS_AS(state_density(*ho(), 0, Statistics::distinguishable, o), ConfigError);
  o.xgrid = XGrid{-5.0, 5.0, 40};
  CHECK_NOTHROW(state_density(*ho(), 0, Statistics::distinguishable, o));
}

TEST_CASE("thermal limits") {
  const auto r = ho();
  // beta -> infinity recovers the ground state
  const DensityProfile cold = thermal_density(*r, 1e4, Statistics::distinguishable);
  const DensityProfile g0 = state_density(*r, 0, Statistics::distinguishable);
  CHECK(sup_diff(cold.total, g0.total) < 1e-12);
  REQUIRE(cold.truncation.has_value());
  CHECK(*cold.truncation < 1e-100);
  CHECK_FALSE(cold.truncation_warning);
  // hot: the top state still carries weight; widen x to hold n = 49
  DensityOptions wide;
  wide.kgrid = default_kgrid(r->spec);
  wide.xgrid = XGrid{-14.0, 14.0, 1001};
  const DensityProfile hot = thermal_density(*r, 0.01, Statistics::distinguishable, wide);
  CHECK(hot.truncation_warning);
  CHECK(integrate(hot) == doctest::Approx(1.0).epsilon(0.01));
  CHECK_THROWS_AS(thermal_density(*r, 0.0, Statistics::distinguishable), ConfigError);
}

TEST_CASE("degenerate energies give equal thermal weights") {
  auto copy = std::make_shared<SpectrumResult>(*ho());
  for (double& e : copy->energies) e = 2.0;
  const DensityProfile p = thermal_density(*copy, 3.0, Statistics::distinguishable);
  std::vector<double> w(50, 1.0 / 50);
  const WeightedSample s = state_sample(*copy, w, Statistics::distinguishable);
  const DensityProfile q = one_body_density(s, copy->spec, false);
  CHECK(sup_diff(p.total, q.total) < 1e-13);
  CHECK(*p.truncation == 1.0);
}

TEST_CASE("contrast examples") {
  CHECK(contrast(flat_profile(std::vector<double>(50, 1.0))) == 0.0);
  CHECK(contrast(flat_profile({0, 1, 2, 1, 0, 1, 2, 1, 0})) == doctest::Approx(1.0));
  CHECK(contrast(flat_profile({0, 1, 3, 1, 0.5, 1, 2, 1, 0})) == doctest::Approx((3 - 0.5) / 3.5));
  CHECK(contrast(flat_profile({0, 1, 2, 1, 0})) == 0.0);
}

TEST_CASE("peak counting with prominence") {
  const DensityProfile p = flat_profile({0, 5, 0, 4, 3.9, 4.1, 0, 6, 0});
  CHECK(find_peaks(p.total).size() == 4u);
  CHECK(count_peaks(p, 0.05) == 3);
}

TEST_CASE("density CSV and sidecar") {
  const DensityProfile p = state_density(*trap2(), 0, Statistics::distinguishable);
  const auto dir = std::filesystem::temp_directory_path() / "itnumm_density_test";
  std::filesystem::create_directories(dir);
  save_density(p, dir / "d.csv", dir / "d.json");
  std::ifstream is(dir / "d.csv");
  std::string header;
  std::getline(is, header);
  CHECK(header == "x,rho_total,rho_1,rho_2");
  std::filesystem::remove_all(dir);
}

TEST_CASE("k sums do not depend on the worker count") {
  set_thread_count(1);
  const DensityProfile a = state_density(*trap2(), 2, Statistics::boson);
  set_thread_count(3);
  const DensityProfile b = state_density(*trap2(), 2, Statistics::boson);
  set_thread_count(0);
  CHECK(a.total == b.total);
}
