#include "itnumm/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "itnumm/error.hpp"
#include "itnumm/solver.hpp"

namespace itnumm {

namespace {

constexpr std::size_t kDenseLimit = 4000;

struct Tridiagonal {
  std::vector<double> d;
  double e = 0.0;  // constant off-diagonal
};

// Number of eigenvalues below x (Sturm sequence of the LDL^T pivots).
int count_below(const Tridiagonal& T, double x) {
  int neg = 0;
  double q = 1.0;
  const double e2 = T.e * T.e;
  const double tiny = std::numeric_limits<double>::min();
  for (std::size_t i = 0; i < T.d.size(); ++i) {
    q = T.d[i] - x - (i == 0 ? 0.0 : e2 / q);
    if (q == 0.0) q = -tiny;
    if (q < 0) ++neg;
  }
  return neg;
}

// k-th smallest eigenvalue (0-based) by bisection.
double kth_eigenvalue(const Tridiagonal& T, int k, double lo, double hi) {
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid == lo || mid == hi) break;
    if (count_below(T, mid) > k)
      hi = mid;
    else
      lo = mid;
    if (hi - lo <= 4e-16 * std::max(1.0, std::abs(mid))) break;
  }
  return 0.5 * (lo + hi);
}

std::vector<double> fd_levels(const SystemSpec& spec, double r_lo, double r_hi,
                              int intervals, int count) {
  const double mu = 0.5 * spec.mass;
  const double h = (r_hi - r_lo) / intervals;
  const double kin = spec.hbar * spec.hbar / (2.0 * mu * h * h);
  Tridiagonal T;
  T.e = -kin;
  T.d.resize(static_cast<std::size_t>(intervals - 1));
  const bool full_line = spec.epsilon == 0.0;
  double dmin = std::numeric_limits<double>::infinity();
  double dmax = -dmin;
  for (int i = 1; i < intervals; ++i) {
    const double r = r_lo + h * i;
    double v = 0.25 * spec.mass * spec.omega * spec.omega * r * r;
    if (!full_line) v += v_lj(r, spec);
    T.d[static_cast<std::size_t>(i - 1)] = 2.0 * kin + v;
    dmin = std::min(dmin, 2.0 * kin + v);
    dmax = std::max(dmax, 2.0 * kin + v);
  }
  // Gershgorin
  const double lo = dmin - 2.0 * kin - 1.0;
  const double hi = dmax + 2.0 * kin + 1.0;
  std::vector<double> out(static_cast<std::size_t>(count));
  double prev = lo;
  for (int k = 0; k < count; ++k) {
    out[static_cast<std::size_t>(k)] = kth_eigenvalue(T, k, prev, hi);
    prev = out[static_cast<std::size_t>(k)] - 1e-9 * std::max(1.0, std::abs(prev));
  }
  return out;
}

double relative_potential(double r, const SystemSpec& spec) {
  double v = 0.25 * spec.mass * spec.omega * spec.omega * r * r;
  if (spec.epsilon != 0.0) v += v_lj(r, spec);
  return v;
}

}  // namespace

double ho_energy(int n, const SystemSpec& spec) {
  return (n + 0.5) * spec.hbar * spec.omega;
}

TwoParticleLevels two_particle_exact(const SystemSpec& spec, int n_levels,
                                     const TwoParticleOptions& options) {
  if (spec.D != 2 || spec.kind != PotentialKind::lj_harmonic_trap)
    throw ConfigError("two_particle_exact: needs a D = 2 trapped LJ system");
  if (n_levels < 1) throw ConfigError("two_particle_exact: n_levels >= 1");
  const double hw = spec.hbar * spec.omega;
  const bool full_line = spec.epsilon == 0.0;

  TwoParticleLevels out;
  double r_lo = 0.0;
  if (!full_line) {
    r_lo = spec.a_core > 0 ? 0.5 * spec.a_core : 0.5 * spec.r_e;
    // Locate the well on a fine grid, then refine by golden section.
    double best = r_lo, vbest = relative_potential(r_lo, spec);
    for (int i = 1; i <= 20000; ++i) {
      const double r = r_lo + (3.0 * spec.r_e - r_lo) * i / 20000.0;
      const double v = relative_potential(r, spec);
      if (v < vbest) vbest = v, best = r;
    }
    const double step = (3.0 * spec.r_e - r_lo) / 20000.0;
    double a = best - step, b = best + step;
    const double g = 0.5 * (std::sqrt(5.0) - 1.0);
    for (int it = 0; it < 100; ++it) {
      const double c = b - g * (b - a), d = a + g * (b - a);
      if (relative_potential(c, spec) < relative_potential(d, spec))
        b = d;
      else
        a = c;
    }
    const double rm = 0.5 * (a + b);
    const double hd = 1e-4 * spec.r_e;
    const double curv = (relative_potential(rm + hd, spec) - 2.0 * relative_potential(rm, spec) +
                         relative_potential(rm - hd, spec)) / (hd * hd);
    out.v_min = relative_potential(rm, spec);
    out.omega_well = std::sqrt(std::max(curv, 0.0) / (0.5 * spec.mass));
  } else {
    out.omega_well = spec.omega;
  }

  // Domain edge: the trap must exceed the highest wanted level by 10 hbar w.
  double e_top = std::max(out.v_min, 0.0) + (2.0 * n_levels + 12.0) * hw;
  double r_hi = std::sqrt(4.0 * e_top / (spec.mass * spec.omega * spec.omega));
  std::vector<double> rel;
  for (int attempt = 0; attempt < 8; ++attempt) {
    const double lo = full_line ? -r_hi : r_lo;
    const int P = options.base_points;
    const auto e1 = fd_levels(spec, lo, r_hi, P, n_levels);
    const auto e2 = fd_levels(spec, lo, r_hi, 2 * P, n_levels);
    const auto e4 = fd_levels(spec, lo, r_hi, 4 * P, n_levels);
    rel.assign(static_cast<std::size_t>(n_levels), 0.0);
    double change = 0.0;
    for (int k = 0; k < n_levels; ++k) {
      const auto kk = static_cast<std::size_t>(k);
      const double r1 = (4.0 * e2[kk] - e1[kk]) / 3.0;
      const double r2 = (4.0 * e4[kk] - e2[kk]) / 3.0;
      rel[kk] = r2;
      change = std::max(change, std::abs(r2 - r1) / std::max(std::abs(r2), hw));
    }
    out.richardson_change = change;
    const double v_edge = 0.25 * spec.mass * spec.omega * spec.omega * r_hi * r_hi;
    if (v_edge >= rel.back() + 10.0 * hw) break;
    r_hi *= 1.5;
  }
  if (out.richardson_change > options.tolerance) {
    std::ostringstream os;
    os << "two_particle_exact: grid doubling changes levels by " << out.richardson_change
       << " (tolerance " << options.tolerance << ")";
    throw NumericError(os.str());
  }
  out.relative = rel;

  std::vector<double> total;
  for (int c = 0; c < n_levels; ++c)
    for (double e : rel) total.push_back(e + (c + 0.5) * hw);
  std::sort(total.begin(), total.end());
  total.resize(static_cast<std::size_t>(n_levels));
  out.energies = std::move(total);
  return out;
}

EigenPairs dense_reference(const SparseKernel& S, int k) {
  if (!S.symmetrized) throw ConfigError("dense_reference: kernel must be symmetrized");
  if (S.n > kDenseLimit) throw ConfigError("dense_reference: refusing n > 4000");
  if (k < 1 || static_cast<std::size_t>(k) > S.n) throw ConfigError("dense_reference: bad k");
  const auto n = static_cast<Eigen::Index>(S.n);
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n, n);
  for (std::size_t i = 0; i < S.n; ++i)
    for (std::size_t p = S.row_ptr[i]; p < S.row_ptr[i + 1]; ++p)
      A(static_cast<Eigen::Index>(i), S.col[p]) = S.val[p];
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(A);
  if (es.info() != Eigen::Success) throw NumericError("dense_reference: eigensolver failed");

  EigenPairs out;
  out.vectors.resize(n, k);
  for (int i = 0; i < k; ++i) {
    const Eigen::Index c = n - 1 - i;
    out.values.push_back(es.eigenvalues()(c));
    out.vectors.col(i) = es.eigenvectors().col(c);
  }
  for (int i = 0; i < k; ++i) {
    const Eigen::VectorXd r = A * out.vectors.col(i) - out.values[i] * out.vectors.col(i);
    out.residuals.push_back(r.norm() / std::abs(out.values[0]));
  }
  return out;
}

PowerLawFit fit_power_law(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size()) throw ConfigError("fit_power_law: size mismatch");
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < x.size(); ++i)
    if (x[i] > 0 && y[i] > 0) lx.push_back(std::log(x[i])), ly.push_back(std::log(y[i]));
  if (lx.size() < 2) throw NumericError("fit_power_law: fewer than two usable points");
  const double n = static_cast<double>(lx.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sx += lx[i];
    sy += ly[i];
    sxx += lx[i] * lx[i];
    sxy += lx[i] * ly[i];
  }
  const double den = n * sxx - sx * sx;
  if (den == 0.0) throw NumericError("fit_power_law: degenerate abscissae");
  PowerLawFit f;
  f.exponent = (n * sxy - sx * sy) / den;
  const double loga = (sy - f.exponent * sx) / n;
  f.prefactor = std::exp(loga);
  double ss = 0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    const double r = ly[i] - loga - f.exponent * lx[i];
    ss += r * r;
  }
  f.residual = std::sqrt(ss / n);
  return f;
}

double DtauPolicy::dtau(int N, int D) const {
  if (kind == Kind::fixed) return dtau_ref;
  if (kind == Kind::guard_triggered)
    return N >= N_ref ? dtau_ref : dtau_ref * std::pow(static_cast<double>(N_ref) / N, 2.0 / D);
  return dtau_ref * std::pow(static_cast<double>(N_ref) / N, 1.0 / D);
}

ConvergenceReport convergence_fit(const SystemSpec& spec, const std::vector<int>& sizes,
                                  const DtauPolicy& policy, double threshold,
                                  const std::function<void(const std::string&)>& log) {
  if (spec.kind != PotentialKind::harmonic_1d)
    throw ConfigError("convergence sweeps are defined for the 1D harmonic oscillator");
  if (sizes.size() < 4) throw ConfigError("convergence sweep needs at least 4 mesh sizes");
  const auto [lo, hi] = std::minmax_element(sizes.begin(), sizes.end());
  if (*lo < 2 || *hi < 10 * *lo)
    throw ConfigError("convergence sweep sizes must be >= 2 and span at least one decade");
  ConvergenceReport rep;
  const double e0 = ho_energy(0, spec);
  for (int N : sizes) {
    RunParams p;
    p.N = N;
    p.dtau = policy.dtau(N, spec.D);
    p.n_states = 1;
    p.threshold = threshold;
    if (p.dtau != policy.dtau_ref) {
      std::ostringstream os;
      os << "N=" << N << ": dtau scaled to " << p.dtau;
      rep.flags.push_back(os.str());
    }
    try {
      const SpectrumResult r = solve(spec, p);
      rep.N.push_back(N);
      rep.dtau.push_back(p.dtau);
      rep.sigma.push_back(std::abs(r.energies[0] - e0) / e0);
      if (log) {
        std::ostringstream os;
        os << "N=" << N << " dtau=" << p.dtau << " sigma=" << rep.sigma.back();
        log(os.str());
      }
    } catch (const NumericError& e) {
      rep.flags.push_back("N=" + std::to_string(N) + ": " + e.what());
      if (log) log(rep.flags.back());
    }
  }
  std::vector<double> x(rep.N.begin(), rep.N.end());
  rep.fit = fit_power_law(x, rep.sigma);
  return rep;
}

}  // namespace itnumm
