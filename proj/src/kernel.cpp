#include "itnumm/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numbers>
#include <sstream>

#include "itnumm/error.hpp"
#include "itnumm/neighbors.hpp"
#include "itnumm/parallel.hpp"

namespace itnumm {

namespace {

constexpr double kExponentCap = 700.0;
// Smallest exponent whose exp() is still a normal double.
constexpr double kMinExponent = -708.0;
constexpr double kDiagonalWarn = 0.1;

struct RowBlock {
  std::vector<std::size_t> counts;
  std::vector<std::uint32_t> col;
  std::vector<double> val;
};

}  // namespace

double SparseKernel::at(std::size_t row, std::size_t column) const {
  const auto first = col.begin() + static_cast<std::ptrdiff_t>(row_ptr[row]);
  const auto last = col.begin() + static_cast<std::ptrdiff_t>(row_ptr[row + 1]);
  auto it = std::lower_bound(first, last, static_cast<std::uint32_t>(column));
  if (it == last || *it != column) return 0.0;
  return val[static_cast<std::size_t>(it - col.begin())];
}

double cutoff_radius(double mass, double hbar, double dtau, double threshold) {
  if (!(threshold > 0 && threshold < 1))
    throw ConfigError("run.threshold must lie in (0, 1) for a positive cutoff radius");
  return std::sqrt(2.0 * hbar * dtau * std::log(1.0 / threshold) / mass);
}

SparseKernel assemble(const Mesh& mesh, const SystemSpec& spec, double threshold,
                      bool symmetric) {
  const std::size_t n = mesh.size();
  if (n == 0) throw ConfigError("assemble: empty mesh");
  if (n > std::numeric_limits<std::uint32_t>::max())
    throw ConfigError("assemble: mesh too large for 32-bit column indices");
  const double dtau = mesh.dtau;
  const int D = mesh.D;

  SparseKernel K;
  K.n = n;
  K.D = D;
  K.form = mesh.density_kind == DensityKind::V1_only ? KernelForm::v2_column
                                                      : KernelForm::gaussian;
  K.dtau = dtau;
  K.hbar = spec.hbar;
  K.threshold = threshold;
  K.r_cut = cutoff_radius(spec.mass, spec.hbar, dtau, threshold);
  K.symmetrized = symmetric || K.form == KernelForm::gaussian;
  K.log_prefactor = mesh.log_Z - std::log(static_cast<double>(n)) +
                    0.5 * D * std::log(spec.mass / (2.0 * std::numbers::pi * spec.hbar * dtau));

  if (K.form == KernelForm::v2_column) {
    K.v2_exponent.resize(n);
    parallel_for(n, [&](std::size_t begin, std::size_t end) {
      for (std::size_t j = begin; j < end; ++j)
        K.v2_exponent[j] = std::min(dtau * v2(mesh.point(j), spec) / spec.hbar, kExponentCap);
    });
  }

  const double gauss = spec.mass / (2.0 * spec.hbar * dtau);
  const CellList cells(mesh.points, D, K.r_cut);
  const unsigned workers = std::max(1u, std::min<unsigned>(thread_count(), static_cast<unsigned>(n)));
  std::vector<RowBlock> blocks(workers);
  // One contiguous row block per worker; concatenation restores row order.
  parallel_for(workers, [&](std::size_t wb, std::size_t we) {
    std::vector<std::uint32_t> found;
    for (std::size_t w = wb; w < we; ++w) {
      RowBlock& block = blocks[w];
      const std::size_t begin = n * w / workers, end = n * (w + 1) / workers;
      block.counts.reserve(end - begin);
      for (std::size_t j = begin; j < end; ++j) {
        const auto q = mesh.point(j);
        cells.collect(q, K.r_cut, found);
        for (std::uint32_t k : found) {
          double e = K.log_prefactor - gauss * cells.sq_distance(q, k);
          if (K.form == KernelForm::v2_column) {
            e -= symmetric ? 0.5 * (K.v2_exponent[j] + K.v2_exponent[k]) : K.v2_exponent[k];
          }
          block.col.push_back(k);
          block.val.push_back(std::exp(std::max(e, kMinExponent)));
        }
        block.counts.push_back(found.size());
      }
    }
  });

  K.row_ptr.assign(n + 1, 0);
  std::size_t total = 0;
  for (const auto& b : blocks) total += b.val.size();
  K.col.reserve(total);
  K.val.reserve(total);
  std::size_t row = 0;
  for (auto& b : blocks) {
    for (std::size_t c : b.counts) {
      K.row_ptr[row + 1] = K.row_ptr[row] + c;
      ++row;
    }
    K.col.insert(K.col.end(), b.col.begin(), b.col.end());
    K.val.insert(K.val.end(), b.val.begin(), b.val.end());
    b = RowBlock{};
  }
  return K;
}

SparseKernel symmetrize(const SparseKernel& K) {
  if (K.form == KernelForm::gaussian) return K;
  if (K.symmetrized) return K;
  if (K.v2_exponent.size() != K.n)
    throw NumericError("symmetrize: kernel carries no V2 values");
  SparseKernel S = K;
  S.symmetrized = true;
  parallel_for(K.n, [&](std::size_t begin, std::size_t end) {
    for (std::size_t j = begin; j < end; ++j) {
      for (std::size_t p = K.row_ptr[j]; p < K.row_ptr[j + 1]; ++p) {
        const std::size_t k = K.col[p];
        const double cj = K.v2_exponent[j], ck = K.v2_exponent[k];
        const double kjk = K.val[p];
        const double kkj = K.at(k, j);
        if (kkj <= 0) throw NumericError("symmetrize: kernel pattern is not symmetric");
        // Operand order is irrelevant under IEEE addition, so (j,k) and (k,j)
        // evaluate to the same bits.
        const double gaussian = 0.5 * ((std::log(kjk) + ck) + (std::log(kkj) + cj));
        S.val[p] = std::exp(gaussian - 0.5 * (cj + ck));
      }
    }
  });
  return S;
}

void matvec(const SparseKernel& K, std::span<const double> x, std::span<double> y) {
  if (x.size() != K.n || y.size() != K.n)
    throw ConfigError("matvec: dimension mismatch");
  parallel_for(K.n, [&](std::size_t begin, std::size_t end) {
    for (std::size_t j = begin; j < end; ++j) {
      double s = 0.0;
      for (std::size_t p = K.row_ptr[j]; p < K.row_ptr[j + 1]; ++p) s += K.val[p] * x[K.col[p]];
      y[j] = s;
    }
  });
}

DiagonalReport diagonal_dominance_report(const SparseKernel& K) {
  DiagonalReport r;
  r.value = std::exp(K.log_prefactor);
  r.warning = r.value > kDiagonalWarn;
  if (r.warning) {
    std::ostringstream msg;
    msg << "kernel diagonal " << r.value << " exceeds " << kDiagonalWarn
        << "; dtau is too small for N (mesh points decouple)";
    r.message = msg.str();
  }
  return r;
}

void dump_kernel(const SparseKernel& K, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write " + path.string());
  out << std::setprecision(17);
  for (std::size_t j = 0; j < K.n; ++j)
    for (std::size_t p = K.row_ptr[j]; p < K.row_ptr[j + 1]; ++p)
      out << j << ' ' << K.col[p] << ' ' << K.val[p] << '\n';
}

}  // namespace itnumm
