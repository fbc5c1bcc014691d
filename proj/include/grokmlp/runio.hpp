#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include "grokmlp/mlp.hpp"

namespace grokmlp {

// Files making up one training-run directory.
struct RunPaths {
  std::filesystem::path dir;
  std::filesystem::path metrics;
  std::filesystem::path manifest;
  std::filesystem::path final_checkpoint;
  std::filesystem::path saturation_checkpoint;
};

RunPaths run_paths(const std::filesystem::path& dir);

// What the manifest records about a finished run.
struct RunSummary {
  TrainConfig config;
  StopReason stop_reason = StopReason::hard_limit;
  long final_step = 0;
  std::optional<long> saturation_step;
  double wall_seconds = 0.0;
};

// Trains per `config` and writes metrics.csv (streamed row by row),
// checkpoint_final.json, checkpoint_saturation.json (when reached) and
// manifest.json. The manifest is written last, so its presence marks a
// completed run. `echo` mirrors metrics rows to stdout.
RunSummary execute_run(const TrainConfig& config, const std::filesystem::path& dir, bool echo);

// Reads manifest.json; nullopt when the directory holds no completed run.
std::optional<RunSummary> load_run_summary(const std::filesystem::path& dir);

// True when `summary` came from exactly this config (field-by-field).
bool config_matches(const TrainConfig& a, const TrainConfig& b);

// Reuses the cached run when its manifest matches `config`, otherwise runs it.
RunSummary execute_or_reuse_run(const TrainConfig& config, const std::filesystem::path& dir,
                                bool echo);

std::string format_alpha(double alpha);  // "0.3", "0.05", ... for directory names

// Conventional directory name for one (alpha, seed) run.
std::string run_dir_name(double alpha, std::uint64_t seed);

}  // namespace grokmlp
