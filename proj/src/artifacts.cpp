#include "itnumm/artifacts.hpp"

#include <cstdint>
#include <cstring>
#include <fstream>

#include "itnumm/error.hpp"

namespace itnumm {

namespace {

constexpr char kMagic[8] = {'I', 'T', 'N', 'U', 'M', 'M', 'S', '1'};

class Writer {
 public:
  explicit Writer(const std::filesystem::path& p) : os_(p, std::ios::binary) {
    if (!os_) throw Error("cannot write " + p.string());
  }
  template <typename T>
  void put(const T& v) {
    os_.write(reinterpret_cast<const char*>(&v), sizeof v);
  }
  void put_vec(const double* p, std::size_t n) {
    os_.write(reinterpret_cast<const char*>(p), static_cast<std::streamsize>(n * sizeof(double)));
  }
  void finish() {
    os_.flush();
    if (!os_) throw Error("write failed");
  }

 private:
  std::ofstream os_;
};

class Reader {
 public:
  explicit Reader(const std::filesystem::path& p) : is_(p, std::ios::binary), path_(p) {
    if (!is_) throw ConfigError("cannot read " + p.string());
  }
  template <typename T>
  T get() {
    T v{};
    is_.read(reinterpret_cast<char*>(&v), sizeof v);
    check();
    return v;
  }
  void get_vec(double* p, std::size_t n) {
    is_.read(reinterpret_cast<char*>(p), static_cast<std::streamsize>(n * sizeof(double)));
    check();
  }
  void raw(char* p, std::size_t n) {
    is_.read(p, static_cast<std::streamsize>(n));
    check();
  }

 private:
  void check() {
    if (!is_) throw ConfigError("truncated solution file " + path_.string());
  }
  std::ifstream is_;
  std::filesystem::path path_;
};

}  // namespace

nlohmann::ordered_json spectrum_json(const SpectrumResult& r) {
  const Mesh& mesh = *r.mesh;
  nlohmann::ordered_json j;
  j["D"] = mesh.D;
  j["N"] = mesh.size();
  j["dtau"] = mesh.dtau;
  j["n_states"] = r.n_states();
  j["lambdas"] = r.lambdas;
  j["energies"] = r.energies;
  const double shift = r.spec.kind == PotentialKind::lj_harmonic_trap ? h1_minimum_shift(r.spec) : 0.0;
  std::vector<double> shifted;
  for (double e : r.energies) shifted.push_back(e - shift);
  j["energies_shifted"] = shifted;
  j["energy_shift"] = shift;
  j["hbar_omega"] = r.spec.hbar * r.spec.omega;
  j["residuals"] = r.residuals;
  nlohmann::ordered_json prov;
  prov["seed"] = mesh.seed;
  prov["theta"] = r.threshold;
  prov["acceptance_rate"] = mesh.acceptance_rate;
  prov["acceptance_stderr"] = mesh.acceptance_stderr;
  prov["candidate_draws"] = mesh.candidate_draws;
  // A relative error dg/g in the acceptance rate shifts every energy by
  // (hbar/dtau) dg/g.
  prov["energy_offset_uncertainty"] =
      mesh.acceptance_rate > 0
          ? r.spec.hbar / mesh.dtau * mesh.acceptance_stderr / mesh.acceptance_rate
          : 0.0;
  j["provenance"] = prov;
  return j;
}

void save_solution(const SpectrumResult& r, const std::filesystem::path& path) {
  const Mesh& m = *r.mesh;
  const auto N = static_cast<std::uint64_t>(m.size());
  const auto k = static_cast<std::uint32_t>(r.n_states());
  Writer w(path);
  for (char c : kMagic) w.put(c);
  w.put(static_cast<std::uint32_t>(m.D));
  w.put(N);
  w.put(k);
  w.put(static_cast<std::uint32_t>(m.density_kind == DensityKind::V1_only));
  w.put(static_cast<std::uint32_t>(m.subspace));
  w.put(m.dtau);
  w.put(m.log_Z);
  w.put(m.a_core);
  w.put(m.acceptance_rate);
  w.put(m.acceptance_stderr);
  w.put(static_cast<std::int64_t>(m.candidate_draws));
  w.put(static_cast<std::uint64_t>(m.seed));
  w.put(r.threshold);
  w.put(r.r_cut);
  w.put(r.log_prefactor);
  w.put(static_cast<std::uint64_t>(r.v2_exponent.size()));
  w.put(static_cast<std::int32_t>(r.matvecs));
  w.put(static_cast<std::int32_t>(r.restarts));
  w.put_vec(m.points.data(), m.points.size());
  w.put_vec(r.v2_exponent.data(), r.v2_exponent.size());
  w.put_vec(r.log_w.data(), r.log_w.size());
  w.put_vec(r.states.data(), static_cast<std::size_t>(r.states.size()));
  w.put_vec(r.lambdas.data(), k);
  w.put_vec(r.energies.data(), k);
  w.put_vec(r.residuals.data(), k);
  w.finish();
}

SpectrumResult load_solution(const std::filesystem::path& path, const SystemSpec& spec) {
  Reader rd(path);
  char magic[8];
  rd.raw(magic, 8);
  if (std::memcmp(magic, kMagic, 8) != 0) throw ConfigError(path.string() + ": not a solution file");
  auto mesh = std::make_shared<Mesh>();
  mesh->D = static_cast<int>(rd.get<std::uint32_t>());
  const auto N = rd.get<std::uint64_t>();
  const auto k = rd.get<std::uint32_t>();
  mesh->density_kind = rd.get<std::uint32_t>() ? DensityKind::V1_only : DensityKind::full_H1;
  mesh->subspace = rd.get<std::uint32_t>() != 0;
  mesh->dtau = rd.get<double>();
  mesh->log_Z = rd.get<double>();
  mesh->a_core = rd.get<double>();
  mesh->acceptance_rate = rd.get<double>();
  mesh->acceptance_stderr = rd.get<double>();
  mesh->candidate_draws = rd.get<std::int64_t>();
  mesh->seed = rd.get<std::uint64_t>();
  if (mesh->D != spec.D) throw ConfigError(path.string() + ": dimension does not match the manifest");

  SpectrumResult r;
  r.spec = spec;
  r.threshold = rd.get<double>();
  r.r_cut = rd.get<double>();
  r.log_prefactor = rd.get<double>();
  const auto nv2 = rd.get<std::uint64_t>();
  r.matvecs = rd.get<std::int32_t>();
  r.restarts = rd.get<std::int32_t>();
  mesh->points.resize(N * static_cast<std::uint64_t>(mesh->D));
  rd.get_vec(mesh->points.data(), mesh->points.size());
  r.v2_exponent.resize(nv2);
  rd.get_vec(r.v2_exponent.data(), nv2);
  r.log_w.resize(N);
  rd.get_vec(r.log_w.data(), N);
  r.states.resize(static_cast<Eigen::Index>(N), k);
  rd.get_vec(r.states.data(), N * k);
  r.lambdas.resize(k);
  r.energies.resize(k);
  r.residuals.resize(k);
  rd.get_vec(r.lambdas.data(), k);
  rd.get_vec(r.energies.data(), k);
  rd.get_vec(r.residuals.data(), k);
  r.mesh = std::move(mesh);
  return r;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  const auto tmp = path.string() + ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary);
    if (!os) throw Error("cannot write " + path.string());
    os << text;
    if (!os) throw Error("write failed: " + path.string());
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace itnumm
