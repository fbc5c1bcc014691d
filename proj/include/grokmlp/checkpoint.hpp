#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "grokmlp/mlp.hpp"

namespace grokmlp {

inline constexpr int kFormatVersion = 1;

// Metadata stored alongside the weights. `kind` is one of "saturation",
// "final", "constructed", "extracted"; the provenance fields are only present
// for the latter two.
struct CheckpointInfo {
  std::string kind;
  long step = 0;
  double alpha = 0.0;
  std::uint64_t master_seed = 0;
  std::string stop_reason;  // empty for constructed/extracted checkpoints
  std::optional<std::string> setting;
  std::optional<std::string> source_checkpoint;
};

struct LoadedCheckpoint {
  Model model;
  CheckpointInfo info;
};

// Versioned JSON, weights as row-major nested arrays of doubles. Writes are
// atomic (temp file + rename).
void save_checkpoint(const Model& model, const CheckpointInfo& info,
                     const std::filesystem::path& path);

// Validates format_version and dimensions; throws std::runtime_error with a
// schema diagnostic on anything unexpected.
LoadedCheckpoint load_checkpoint(const std::filesystem::path& path);

// Metrics CSV with header step,train_loss,train_acc,val_acc. Doubles are
// written with round-trip precision so reruns are byte-identical.
std::string metrics_csv_header();
std::string metrics_csv_row(const MetricsRow& row);
void write_metrics_csv(const std::vector<MetricsRow>& history, const std::filesystem::path& path);
std::vector<MetricsRow> read_metrics_csv(const std::filesystem::path& path);

// Serialize a double the way every CSV/JSON writer in this project does.
std::string format_double(double value);

void write_text_atomic(const std::string& text, const std::filesystem::path& path);

}  // namespace grokmlp
