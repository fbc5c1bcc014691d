#include "grokmlp/runio.hpp"

#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>

#include <json.hpp>

#include "grokmlp/checkpoint.hpp"

namespace grokmlp {

namespace {

using nlohmann::json;

json config_to_json(const TrainConfig& c) {
  return json{{"p", c.p},
              {"n_hidden", c.n_hidden},
              {"train_frac", c.train_frac},
              {"alpha", c.alpha},
              {"master_seed", c.master_seed},
              {"loss", to_string(c.loss)},
              {"learning_rate", c.optim.learning_rate},
              {"weight_decay", c.optim.weight_decay},
              {"beta1", c.optim.beta1},
              {"beta2", c.optim.beta2},
              {"eps", c.optim.eps},
              {"eval_every", c.eval_every},
              {"plateau_window", c.plateau_window},
              {"plateau_min_delta", c.plateau_min_delta},
              {"val_acc_stop", c.val_acc_stop},
              {"max_steps", c.max_steps},
              {"saturation_train_acc", c.saturation_train_acc}};
}

TrainConfig config_from_json(const json& j) {
  TrainConfig c;
  c.p = j.at("p").get<int>();
  c.n_hidden = j.at("n_hidden").get<int>();
  c.train_frac = j.at("train_frac").get<double>();
  c.alpha = j.at("alpha").get<double>();
  c.master_seed = j.at("master_seed").get<std::uint64_t>();
  c.loss = loss_kind_from_string(j.at("loss").get<std::string>());
  c.optim.learning_rate = j.at("learning_rate").get<double>();
  c.optim.weight_decay = j.at("weight_decay").get<double>();
  c.optim.beta1 = j.at("beta1").get<double>();
  c.optim.beta2 = j.at("beta2").get<double>();
  c.optim.eps = j.at("eps").get<double>();
  c.eval_every = j.at("eval_every").get<long>();
  c.plateau_window = j.at("plateau_window").get<long>();
  c.plateau_min_delta = j.at("plateau_min_delta").get<double>();
  c.val_acc_stop = j.at("val_acc_stop").get<double>();
  c.max_steps = j.at("max_steps").get<long>();
  c.saturation_train_acc = j.at("saturation_train_acc").get<double>();
  return c;
}

}  // namespace

RunPaths run_paths(const std::filesystem::path& dir) {
  return RunPaths{dir, dir / "metrics.csv", dir / "manifest.json",
                  dir / "checkpoint_final.json", dir / "checkpoint_saturation.json"};
}

RunSummary execute_run(const TrainConfig& config, const std::filesystem::path& dir, bool echo) {
  const RunPaths paths = run_paths(dir);
  std::filesystem::create_directories(dir);

  std::ofstream metrics(paths.metrics, std::ios::binary);
  if (!metrics) throw std::runtime_error("cannot open " + paths.metrics.string());
  metrics << metrics_csv_header();

  const auto t0 = std::chrono::steady_clock::now();
  const RunRecord record = train(config, [&](const MetricsRow& row) {
    metrics << metrics_csv_row(row);
    metrics.flush();
    if (echo) {
      std::printf("step %8ld  train_loss %.6f  train_acc %.4f  val_acc %.4f\n", row.step,
                  row.train_loss, row.train_acc, row.val_acc);
      std::fflush(stdout);
    }
  });
  const double wall =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  metrics.close();

  CheckpointInfo info;
  info.alpha = config.alpha;
  info.master_seed = config.master_seed;
  info.stop_reason = to_string(record.stop_reason);
  if (record.saturation) {
    info.kind = "saturation";
    info.step = record.saturation->step;
    save_checkpoint(record.saturation->model, info, paths.saturation_checkpoint);
  }
  info.kind = "final";
  info.step = record.final_model.step;
  save_checkpoint(record.final_model.model, info, paths.final_checkpoint);

  RunSummary summary;
  summary.config = config;
  summary.stop_reason = record.stop_reason;
  summary.final_step = record.final_model.step;
  if (record.saturation) summary.saturation_step = record.saturation->step;
  summary.wall_seconds = wall;

  json manifest;
  manifest["format_version"] = kFormatVersion;
  manifest["config"] = config_to_json(config);
  manifest["stop_reason"] = to_string(record.stop_reason);
  manifest["final_step"] = summary.final_step;
  if (summary.saturation_step) {
    manifest["saturation_step"] = *summary.saturation_step;
  } else {
    manifest["saturation_step"] = nullptr;
  }
  manifest["wall_seconds"] = wall;
  manifest["files"] = json{{"metrics", paths.metrics.filename().string()},
                           {"checkpoint_final", paths.final_checkpoint.filename().string()},
                           {"checkpoint_saturation",
                            record.saturation ? paths.saturation_checkpoint.filename().string()
                                              : ""}};
  write_text_atomic(manifest.dump(2) + "\n", paths.manifest);
  return summary;
}

std::optional<RunSummary> load_run_summary(const std::filesystem::path& dir) {
  const RunPaths paths = run_paths(dir);
  std::ifstream in(paths.manifest, std::ios::binary);
  if (!in) return std::nullopt;
  json manifest;
  try {
    in >> manifest;
    if (manifest.at("format_version").get<int>() != kFormatVersion) {
      throw std::runtime_error("manifest: format_version mismatch in " + paths.manifest.string());
    }
    RunSummary summary;
    summary.config = config_from_json(manifest.at("config"));
    summary.stop_reason = stop_reason_from_string(manifest.at("stop_reason").get<std::string>());
    summary.final_step = manifest.at("final_step").get<long>();
    if (!manifest.at("saturation_step").is_null()) {
      summary.saturation_step = manifest.at("saturation_step").get<long>();
    }
    summary.wall_seconds = manifest.at("wall_seconds").get<double>();
    return summary;
  } catch (const json::exception& e) {
    throw std::runtime_error("manifest: cannot parse " + paths.manifest.string() + ": " +
                             e.what());
  }
}

bool config_matches(const TrainConfig& a, const TrainConfig& b) {
  return a.p == b.p && a.n_hidden == b.n_hidden && a.train_frac == b.train_frac &&
         a.alpha == b.alpha && a.master_seed == b.master_seed && a.loss == b.loss &&
         a.optim.learning_rate == b.optim.learning_rate &&
         a.optim.weight_decay == b.optim.weight_decay && a.optim.beta1 == b.optim.beta1 &&
         a.optim.beta2 == b.optim.beta2 && a.optim.eps == b.optim.eps &&
         a.eval_every == b.eval_every && a.plateau_window == b.plateau_window &&
         a.plateau_min_delta == b.plateau_min_delta && a.val_acc_stop == b.val_acc_stop &&
         a.max_steps == b.max_steps && a.saturation_train_acc == b.saturation_train_acc;
}

RunSummary execute_or_reuse_run(const TrainConfig& config, const std::filesystem::path& dir,
                                bool echo) {
  if (auto cached = load_run_summary(dir); cached && config_matches(cached->config, config)) {
    return *cached;
  }
  return execute_run(config, dir, echo);
}

std::string format_alpha(double alpha) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%g", alpha);
  return buf;
}

std::string run_dir_name(double alpha, std::uint64_t seed) {
  return "a" + format_alpha(alpha) + "_s" + std::to_string(seed);
}

}  // namespace grokmlp
