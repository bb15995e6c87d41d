#pragma once

// Runs a configured experiment and writes its tables. All files land in a
// temporary sibling directory that is renamed into place only on success.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "moqc/config.hpp"

namespace moqc {

struct RunOptions {
  std::optional<std::filesystem::path> output_directory;
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
  std::ostream* log = nullptr;
};

struct ExperimentSummary {
  std::filesystem::path directory;
  std::vector<std::string> files;  // relative to directory, sorted
};

/// Output directory for a config: option, then output.directory, then
/// $MOQC_OUTPUT_DIR/<name>, then ./moqc-out/<name>.
std::filesystem::path resolve_output_directory(const ExperimentConfig& cfg, const RunOptions& opt);

ExperimentSummary run_experiment(ExperimentConfig cfg, const RunOptions& opt = {});

/// Seeds used for each stage of panel `panel`.
std::uint64_t panel_seed(std::uint64_t seed, std::size_t panel, std::uint64_t stage);

/// Union of front tables with identical headers, re-filtered. Columns named
/// e_j or fluence are minimized, run_id / s / source are carried along, and
/// every other column is maximized.
Table merge_fronts(const std::vector<std::filesystem::path>& files);

}  // namespace moqc
