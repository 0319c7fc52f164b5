#pragma once

#include <filesystem>

#include <json.hpp>

#include "itnumm/solver.hpp"

namespace itnumm {

// Spectrum report. Pure function of the result: no timings, no host data.
nlohmann::ordered_json spectrum_json(const SpectrumResult& result);

// Binary dump of everything needed to post-process a solve without
// recomputing it (mesh, weights, states, eigenvalues). Little-endian
// host layout, magic "ITNUMMS1".
void save_solution(const SpectrumResult& result, const std::filesystem::path& path);
SpectrumResult load_solution(const std::filesystem::path& path, const SystemSpec& spec);

// Writes text atomically enough for our purposes (temp file + rename).
void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace itnumm
