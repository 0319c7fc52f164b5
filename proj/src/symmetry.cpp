#include "itnumm/symmetry.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <string>

#include "itnumm/error.hpp"
#include "itnumm/parallel.hpp"

namespace itnumm {

namespace {

double factorial(int D) {
  double f = 1.0;
  for (int i = 2; i <= D; ++i) f *= i;
  return f;
}

}  // namespace

std::string_view to_string(Statistics s) {
  switch (s) {
    case Statistics::distinguishable: return "distinguishable";
    case Statistics::boson: return "boson";
    case Statistics::fermion: return "fermion";
  }
  return "distinguishable";
}

Statistics statistics_from_string(std::string_view name) {
  if (name == "distinguishable") return Statistics::distinguishable;
  if (name == "boson" || name == "bosons") return Statistics::boson;
  if (name == "fermion" || name == "fermions") return Statistics::fermion;
  throw ConfigError("unknown statistics '" + std::string(name) +
                    "' (expected distinguishable, boson or fermion)");
}

int permutation_parity(std::span<const int> perm) {
  const std::size_t n = perm.size();
  std::vector<char> seen(n, 0);
  for (int p : perm) {
    if (p < 0 || static_cast<std::size_t>(p) >= n || seen[p])
      throw DomainError("permutation_parity: not a permutation");
    seen[p] = 1;
  }
  std::fill(seen.begin(), seen.end(), 0);
  int parity = 1;
  for (std::size_t i = 0; i < n; ++i) {
    if (seen[i]) continue;
    std::size_t len = 0;
    for (std::size_t j = i; !seen[j]; j = static_cast<std::size_t>(perm[j])) {
      seen[j] = 1;
      ++len;
    }
    if (len % 2 == 0) parity = -parity;
  }
  return parity;
}

StateEvaluator::StateEvaluator(std::shared_ptr<const SpectrumResult> spectrum)
    : spectrum_(std::move(spectrum)),
      cells_(spectrum_->mesh->points, spectrum_->mesh->D, spectrum_->r_cut) {}

double StateEvaluator::raw(std::span<const double> q, int n) const {
  const SpectrumResult& s = *spectrum_;
  if (n < 0 || n >= s.n_states()) throw ConfigError("state index out of range");
  if (static_cast<int>(q.size()) != s.mesh->D)
    throw ConfigError("evaluate_state: point dimension does not match the mesh");
  const double gauss = s.spec.mass / (2.0 * s.spec.hbar * s.dtau());
  const bool column = !s.v2_exponent.empty();
  double acc = 0.0;
  cells_.for_each_within(q, s.r_cut, [&](std::uint32_t k, double d2) {
    double e = s.log_prefactor - gauss * d2;
    if (column) e -= s.v2_exponent[k];
    acc += std::exp(e) * s.states(k, n);
  });
  return acc / s.lambdas[n];
}

double StateEvaluator::operator()(std::span<const double> q, int n, Statistics stats) const {
  const Mesh& mesh = *spectrum_->mesh;
  if (!mesh.subspace || mesh.D == 1) return raw(q, n);

  const int D = mesh.D;
  std::vector<int> order(D);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return q[a] > q[b]; });
  std::vector<double> sorted(D);
  for (int l = 0; l < D; ++l) sorted[l] = q[order[l]];
  const bool inside = in_ordered_subspace(sorted, mesh.a_core);

  if (stats == Statistics::distinguishable) {
    if (!in_ordered_subspace(q, mesh.a_core))
      throw DomainError("distinguishable states are defined on the ordered subspace only");
    return raw(q, n);
  }
  if (!inside) return 0.0;
  const double amp = raw(sorted, n) / std::sqrt(factorial(D));
  if (stats == Statistics::boson) return amp;
  // Coinciding coordinates: the antisymmetric combination cancels.
  for (int l = 0; l + 1 < D; ++l)
    if (sorted[l] == sorted[l + 1]) return 0.0;
  // q = sorted composed with `order`; its sign is the parity of the sort.
  return permutation_parity(order) * amp;
}

double evaluate_state(const std::shared_ptr<const SpectrumResult>& spectrum,
                      std::span<const double> q, int n, Statistics stats) {
  return StateEvaluator(spectrum)(q, n, stats);
}

Eigen::MatrixXd wavefunction_grid_2d(const StateEvaluator& evaluator, int n,
                                     Statistics stats, const Grid2D& grid) {
  if (evaluator.spectrum().mesh->D != 2)
    throw ConfigError("wavefunction grids are supported for D = 2 only");
  if (grid.resolution < 2 || !(grid.hi > grid.lo))
    throw ConfigError("grid2d needs hi > lo and resolution >= 2");
  const int R = grid.resolution;
  const double h = (grid.hi - grid.lo) / (R - 1);
  const Mesh& mesh = *evaluator.spectrum().mesh;
  Eigen::MatrixXd out(R, R);
  parallel_for(static_cast<std::size_t>(R), [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      for (int j = 0; j < R; ++j) {
        const double q[2] = {grid.lo + h * static_cast<double>(i), grid.lo + h * j};
        if (stats == Statistics::distinguishable && mesh.subspace &&
            !in_ordered_subspace(q, mesh.a_core)) {
          out(static_cast<Eigen::Index>(i), j) = 0.0;
          continue;
        }
        out(static_cast<Eigen::Index>(i), j) = evaluator(q, n, stats);
      }
    }
  });
  return out;
}

void write_grid_csv(const Eigen::MatrixXd& values, const Grid2D& grid,
                    const std::filesystem::path& path) {
  std::ofstream os(path);
  if (!os) throw Error("cannot write " + path.string());
  const int R = grid.resolution;
  const double h = (grid.hi - grid.lo) / (R - 1);
  os << "q1,q2,value\n" << std::setprecision(17);
  for (int i = 0; i < R; ++i)
    for (int j = 0; j < R; ++j)
      os << grid.lo + h * i << ',' << grid.lo + h * j << ',' << values(i, j) << '\n';
}

WeightedSample state_sample(const SpectrumResult& spectrum,
                            std::span<const double> state_weights, Statistics stats) {
  const Mesh& mesh = *spectrum.mesh;
  const int D = mesh.D;
  const std::size_t N = mesh.size();
  if (static_cast<int>(state_weights.size()) > spectrum.n_states())
    throw ConfigError("more state weights than computed states");

  std::vector<double> prob(N, 0.0);
  for (std::size_t j = 0; j < N; ++j) {
    double p = 0.0;
    for (std::size_t n = 0; n < state_weights.size(); ++n) {
      if (state_weights[n] == 0.0) continue;
      const double phi = spectrum.states(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(n));
      p += state_weights[n] * phi * phi;
    }
    prob[j] = p;
  }

  WeightedSample out;
  out.D = D;
  if (!mesh.subspace || D == 1 || stats == Statistics::distinguishable) {
    out.points = mesh.points;
    out.log_weight = spectrum.log_w;
    out.probability = std::move(prob);
    return out;
  }

  std::vector<int> perm(D);
  std::iota(perm.begin(), perm.end(), 0);
  std::vector<std::vector<int>> perms;
  do perms.push_back(perm);
  while (std::next_permutation(perm.begin(), perm.end()));
  const double inv_sqrt = 1.0 / std::sqrt(factorial(D));

  out.points.reserve(N * perms.size() * D);
  out.log_weight.reserve(N * perms.size());
  out.probability.reserve(N * perms.size());
  for (std::size_t j = 0; j < N; ++j) {
    const auto q = mesh.point(j);
    for (const auto& p : perms) {
      const double sign = stats == Statistics::fermion ? permutation_parity(p) : 1.0;
      for (int l = 0; l < D; ++l) out.points.push_back(q[p[l]]);
      out.log_weight.push_back(spectrum.log_w[j]);
      double acc = 0.0;
      for (std::size_t n = 0; n < state_weights.size(); ++n) {
        if (state_weights[n] == 0.0) continue;
        const double a = sign * spectrum.states(static_cast<Eigen::Index>(j),
                                                static_cast<Eigen::Index>(n)) * inv_sqrt;
        acc += state_weights[n] * a * a;
      }
      out.probability.push_back(acc);
    }
  }
  return out;
}

}  // namespace itnumm
