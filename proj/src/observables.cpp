#include "itnumm/observables.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <numbers>

#include <json.hpp>

#include "itnumm/error.hpp"
#include "itnumm/parallel.hpp"

namespace itnumm {

namespace {

// k values per recurrence chunk. Each chunk restarts from a direct sincos,
// so the sums do not depend on how chunks are spread over threads.
constexpr int kChunk = 64;
constexpr double kTruncationWarn = 0.05;

double length_scale(const SystemSpec& spec) {
  if (spec.kind == PotentialKind::lj_harmonic_trap || spec.kind == PotentialKind::lj_pair_1d)
    return spec.r_e;
  return std::sqrt(spec.hbar / (spec.mass * spec.omega));
}

}  // namespace

KGrid default_kgrid(const SystemSpec& spec) {
  return KGrid{16.0 * std::numbers::pi / length_scale(spec), 1024};
}

XGrid default_xgrid(const SystemSpec& spec, const KGrid& kgrid) {
  double half = 0.0;
  if (spec.kind == PotentialKind::harmonic_1d) {
    half = 8.0 * std::sqrt(spec.hbar / (spec.mass * spec.omega));
  } else if (spec.kind == PotentialKind::lj_harmonic_trap) {
    half = 0.5 * (spec.D - 1) * spec.r_e + 5.0 * std::sqrt(spec.hbar / (spec.mass * spec.omega));
  } else {
    half = 4.0 * spec.r_e;
  }
  const double dx = 0.5 * std::numbers::pi / kgrid.k_max;
  const int n = static_cast<int>(std::ceil(2.0 * half / dx)) + 1;
  return XGrid{-half, half, n};
}

DensityProfile one_body_density(const WeightedSample& sample, const SystemSpec& spec,
                                bool stochastic, const DensityOptions& options) {
  const KGrid kg = options.kgrid.value_or(default_kgrid(spec));
  const XGrid xg = options.xgrid.value_or(default_xgrid(spec, kg));
  if (!(kg.k_max > 0) || kg.n_k < 2) throw ConfigError("density: k_max > 0 and n_k >= 2 required");
  if (xg.n_x < 2 || !(xg.x_max > xg.x_min)) throw ConfigError("density: invalid x grid");
  if (xg.spacing() > std::numbers::pi / kg.k_max)
    throw ConfigError("density: x spacing exceeds pi/k_max; refine the x grid or lower k_max");
  const bool window = options.window.value_or(stochastic);

  const int D = sample.D;
  const std::size_t N = sample.size();
  const int nk = kg.n_k;
  const double dk = 2.0 * kg.k_max / nk;
  std::vector<double> k(nk), win(nk, 1.0);
  const double kc = 0.5 * kg.k_max;
  for (int m = 0; m < nk; ++m) {
    k[m] = -kg.k_max + (m + 0.5) * dk;
    if (window) win[m] = std::exp(-(k[m] / kc) * (k[m] / kc));
  }
  std::vector<double> weight(N);
  for (std::size_t j = 0; j < N; ++j)
    weight[j] = std::exp(sample.log_weight[j]) * sample.probability[j];

  // ft[l][m] = sum_j weight_j exp(-i k_m q_jl)
  std::vector<std::vector<std::complex<double>>> ft(D, std::vector<std::complex<double>>(nk));
  const std::size_t chunks = static_cast<std::size_t>((nk + kChunk - 1) / kChunk);
  parallel_for(chunks, [&](std::size_t cb, std::size_t ce) {
    std::vector<std::complex<double>> acc(kChunk);
    for (std::size_t c = cb; c < ce; ++c) {
      const int m0 = static_cast<int>(c) * kChunk;
      const int m1 = std::min(nk, m0 + kChunk);
      for (int l = 0; l < D; ++l) {
        std::fill(acc.begin(), acc.end(), std::complex<double>(0.0, 0.0));
        for (std::size_t j = 0; j < N; ++j) {
          if (weight[j] == 0.0) continue;
          const double q = sample.points[j * D + l];
          std::complex<double> z = std::polar(weight[j], -k[m0] * q);
          const std::complex<double> step = std::polar(1.0, -dk * q);
          for (int m = m0; m < m1; ++m) {
            acc[m - m0] += z;
            z *= step;
          }
        }
        for (int m = m0; m < m1; ++m) ft[l][m] = acc[m - m0];
      }
    }
  });

  DensityProfile out;
  out.D = D;
  out.k_max = kg.k_max;
  out.n_k = nk;
  out.windowed = window;
  out.normalization = D;
  out.x.resize(xg.n_x);
  for (int i = 0; i < xg.n_x; ++i) out.x[i] = xg.at(i);
  out.per_coordinate.assign(D, std::vector<double>(xg.n_x, 0.0));
  out.total.assign(xg.n_x, 0.0);
  const double scale = dk / (2.0 * std::numbers::pi);
  parallel_for(static_cast<std::size_t>(xg.n_x), [&](std::size_t ib, std::size_t ie) {
    for (std::size_t i = ib; i < ie; ++i) {
      const double x = out.x[i];
      double tot = 0.0;
      for (int l = 0; l < D; ++l) {
        double s = 0.0;
        for (int m = 0; m < nk; ++m) {
          const double ph = k[m] * x;
          s += win[m] * (ft[l][m].real() * std::cos(ph) - ft[l][m].imag() * std::sin(ph));
        }
        out.per_coordinate[l][i] = scale * s;
        tot += scale * s;
      }
      out.total[i] = tot;
    }
  });
  return out;
}

DensityProfile state_density(const SpectrumResult& spectrum, int n, Statistics stats,
                             const DensityOptions& options) {
  if (n < 0 || n >= spectrum.n_states()) throw ConfigError("density: state index out of range");
  std::vector<double> w(static_cast<std::size_t>(n) + 1, 0.0);
  w[n] = 1.0;
  const WeightedSample s = state_sample(spectrum, w, stats);
  return one_body_density(s, spectrum.spec, spectrum.mesh->subspace, options);
}

DensityProfile thermal_density(const SpectrumResult& spectrum, double beta, Statistics stats,
                               const DensityOptions& options) {
  if (!(beta > 0)) throw ConfigError("thermal density needs beta > 0");
  const auto& E = spectrum.energies;
  std::vector<double> w(E.size());
  double z = 0.0;
  for (std::size_t n = 0; n < E.size(); ++n) {
    w[n] = std::exp(-beta * (E[n] - E[0]));
    z += w[n];
  }
  for (double& v : w) v /= z;
  const WeightedSample s = state_sample(spectrum, w, stats);
  DensityProfile out = one_body_density(s, spectrum.spec, spectrum.mesh->subspace, options);
  out.truncation = std::exp(-beta * (E.back() - E[0]));
  out.truncation_warning = *out.truncation > kTruncationWarn;
  if (out.truncation_warning)
    std::cerr << "warning: thermal weight of the highest computed state is " << *out.truncation
              << " (> " << kTruncationWarn << "); compute more states\n";
  return out;
}

double integrate(const DensityProfile& p) {
  double s = 0.0;
  for (std::size_t i = 1; i < p.x.size(); ++i)
    s += 0.5 * (p.x[i] - p.x[i - 1]) * (p.total[i] + p.total[i - 1]);
  return s;
}

std::vector<Peak> find_peaks(std::span<const double> v, double min_prominence) {
  const int n = static_cast<int>(v.size());
  std::vector<Peak> peaks;
  for (int i = 1; i + 1 < n; ++i) {
    if (!(v[i] > v[i - 1])) continue;
    // plateau: walk to its right edge
    int r = i;
    while (r + 1 < n && v[r + 1] == v[i]) ++r;
    if (r + 1 >= n || !(v[r + 1] < v[i])) continue;
    double left = v[i];
    for (int a = i - 1; a >= 0 && v[a] <= v[i]; --a) left = std::min(left, v[a]);
    double right = v[i];
    for (int b = r + 1; b < n && v[b] <= v[i]; ++b) right = std::min(right, v[b]);
    const double prom = v[i] - std::max(left, right);
    if (prom >= min_prominence) peaks.push_back({i, v[i], prom});
    i = r;
  }
  return peaks;
}

int count_peaks(const DensityProfile& profile, double rel_prominence) {
  const double top = *std::max_element(profile.total.begin(), profile.total.end());
  if (!(top > 0)) return 0;
  return static_cast<int>(find_peaks(profile.total, rel_prominence * top).size());
}

double contrast(const DensityProfile& profile) {
  const auto& v = profile.total;
  const double vmax = *std::max_element(v.begin(), v.end());
  // ignore rounding-level wiggles in the tails
  std::vector<Peak> peaks = find_peaks(v, 1e-6 * std::abs(vmax));
  if (peaks.size() < 2) return 0.0;
  if (static_cast<int>(peaks.size()) > profile.D) {
    std::stable_sort(peaks.begin(), peaks.end(),
                     [](const Peak& a, const Peak& b) { return a.prominence > b.prominence; });
    peaks.resize(static_cast<std::size_t>(std::max(profile.D, 2)));
    std::sort(peaks.begin(), peaks.end(),
              [](const Peak& a, const Peak& b) { return a.index < b.index; });
  }
  double top = 0.0;
  for (const Peak& p : peaks) top = std::max(top, p.value);
  double valley = top;
  for (std::size_t p = 0; p + 1 < peaks.size(); ++p)
    for (int i = peaks[p].index; i <= peaks[p + 1].index; ++i) valley = std::min(valley, v[i]);
  valley = std::max(valley, 0.0);
  if (top + valley <= 0) return 0.0;
  return (top - valley) / (top + valley);
}

void save_density(const DensityProfile& p, const std::filesystem::path& csv_path,
                  const std::filesystem::path& json_path) {
  std::ofstream os(csv_path);
  if (!os) throw Error("cannot write " + csv_path.string());
  os << "x,rho_total";
  for (int l = 0; l < p.D; ++l) os << ",rho_" << l + 1;
  os << '\n' << std::setprecision(17);
  for (std::size_t i = 0; i < p.x.size(); ++i) {
    os << p.x[i] << ',' << p.total[i];
    for (int l = 0; l < p.D; ++l) os << ',' << p.per_coordinate[l][i];
    os << '\n';
  }

  nlohmann::ordered_json j;
  j["D"] = p.D;
  j["n_x"] = p.x.size();
  j["x_min"] = p.x.front();
  j["x_max"] = p.x.back();
  j["k_max"] = p.k_max;
  j["n_k"] = p.n_k;
  j["window"] = p.windowed;
  j["normalization"] = p.normalization;
  j["integral"] = integrate(p);
  j["contrast"] = contrast(p);
  j["peaks"] = count_peaks(p);
  if (p.truncation) {
    j["truncation"] = *p.truncation;
    j["truncation_warning"] = p.truncation_warning;
  }
  std::ofstream js(json_path);
  if (!js) throw Error("cannot write " + json_path.string());
  js << j.dump(2) << '\n';
}

}  // namespace itnumm
