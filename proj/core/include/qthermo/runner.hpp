#pragma once

#include <cstdint>
#include <filesystem>
#include <ostream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "qthermo/config.hpp"
#include "qthermo/csv.hpp"
#include "qthermo/errors.hpp"

namespace qthermo::cli {

inline constexpr std::size_t kDefaultMaxMemory = std::size_t{2} << 30;

struct RunOptions {
    std::filesystem::path output_dir{"."};
    int threads{1};
    std::uint64_t seed{0};  // reserved; nothing is stochastic
    std::size_t max_memory{kDefaultMaxMemory};
    std::ostream* log{nullptr};
};

/// Data and evidence from one experiment, before anything is written.
struct ExperimentResult {
    CsvTable table;
    nlohmann::json resolved;  // config with every auto value filled in
    nlohmann::json evidence;  // convergence levels, solver diagnostics, notes
};

/// Runs an experiment in memory.
ExperimentResult execute(const RunConfig& cfg, const RunOptions& opts);

struct RunResult {
    std::vector<std::filesystem::path> files;
    nlohmann::json manifest;
};

/// Runs a config document, or replays a manifest written by a previous run,
/// and writes <name>.csv and <name>.manifest.json to opts.output_dir.
RunResult run(const nlohmann::json& doc, const RunOptions& opts);

/// Runs the config once per point of the cartesian product of its "sweep"
/// block, writing one CSV/manifest pair per point plus <name>.sweep.json.
RunResult sweep(const nlohmann::json& doc, const RunOptions& opts);

/// Sets a dotted key such as "bath.omega_c" in a config document.
void apply_override(nlohmann::json& doc, const std::string& dotted_key, const nlohmann::json& value);

/// Process exit status for a library failure: 2 for configuration problems,
/// 3 for non-convergence, 4 for degeneracies.
int exit_code(ErrorKind kind) noexcept;

std::string software_version();

}  // namespace qthermo::cli
