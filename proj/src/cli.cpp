#include "grokmlp/cli.hpp"

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "grokmlp/analysis.hpp"
#include "grokmlp/checkpoint.hpp"
#include "grokmlp/dataset.hpp"
#include "grokmlp/idealize.hpp"
#include "grokmlp/runio.hpp"
#include "grokmlp/spectral.hpp"

namespace grokmlp {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

// 0.01..0.15 in steps of 0.01, then 0.20, 0.25, 0.30, plus the clean run.
const std::vector<double> kDefaultAlphas = {0.0,  0.01, 0.02, 0.03, 0.04, 0.05, 0.06,
                                            0.07, 0.08, 0.09, 0.10, 0.11, 0.12, 0.13,
                                            0.14, 0.15, 0.20, 0.25, 0.30};

const std::vector<int> kDefaultWidths = {16, 32, 64, 96, 128, 192, 256, 384, 512};

fs::path default_out_root() {
  if (const char* env = std::getenv("GROKMLP_OUT")) return fs::path(env);
  return fs::path("runs");
}

std::string csv_version_line() {
  return "# format_version=" + std::to_string(kFormatVersion) + "\n";
}

std::string opt_to_csv(const std::optional<double>& v) {
  return v ? format_double(*v) : std::string();
}

// Training hyperparameters shared by `train` and `sweep`.
struct TrainFlags {
  TrainConfig config;
  std::string loss_name = to_string(TrainConfig{}.loss);
  bool fast = false;

  void attach(CLI::App& cmd, bool with_alpha_seed) {
    cmd.add_option("--p", config.p, "Prime modulus")->check(CLI::PositiveNumber);
    cmd.add_option("--n-hidden", config.n_hidden, "Hidden layer width")
        ->check(CLI::PositiveNumber);
    cmd.add_option("--train-frac", config.train_frac, "Train fraction of the p^2 pairs");
    if (with_alpha_seed) {
      cmd.add_option("--alpha", config.alpha, "Label corruption fraction in [0, 1]");
      cmd.add_option("--seed", config.master_seed, "Master seed");
    }
    cmd.add_option("--loss", loss_name, "Training loss: mse or cross-entropy");
    cmd.add_option("--lr", config.optim.learning_rate, "AdamW learning rate");
    cmd.add_option("--weight-decay", config.optim.weight_decay, "AdamW weight decay");
    cmd.add_option("--eval-every", config.eval_every, "Evaluation cadence in steps");
    cmd.add_option("--plateau-window", config.plateau_window,
                   "Stop when max val accuracy stalls for this many steps");
    cmd.add_option("--min-delta", config.plateau_min_delta,
                   "Minimum val-accuracy improvement that resets the plateau window");
    cmd.add_option("--val-stop", config.val_acc_stop,
                   "Stop once val accuracy rises past this value");
    cmd.add_option("--max-steps", config.max_steps, "Hard step limit");
    cmd.add_option("--saturation-acc", config.saturation_train_acc,
                   "Train accuracy that triggers the saturation checkpoint");
    cmd.add_flag("--fast", fast, "CI profile: p=31, n_hidden=128, eval every 50, 60k step cap");
  }

  // --fast fills in whatever the user did not set explicitly.
  void resolve(const CLI::App& cmd) {
    config.loss = loss_kind_from_string(loss_name);
    if (!fast) return;
    if (!cmd.count("--p")) config.p = 31;
    if (!cmd.count("--n-hidden")) config.n_hidden = 128;
    if (!cmd.count("--eval-every")) config.eval_every = 50;
    if (!cmd.count("--max-steps")) config.max_steps = 60000;
  }
};

void validate_train_config(const TrainConfig& c) {
  if (c.p < 2) throw std::invalid_argument("p must be >= 2");
  if (c.n_hidden < 1) throw std::invalid_argument("n-hidden must be >= 1");
  if (!(c.train_frac > 0.0 && c.train_frac < 1.0)) {
    throw std::invalid_argument("train-frac must lie in (0, 1)");
  }
  if (!(c.alpha >= 0.0 && c.alpha <= 1.0)) throw std::invalid_argument("alpha must lie in [0, 1]");
  if (c.eval_every < 1) throw std::invalid_argument("eval-every must be >= 1");
  if (c.max_steps < 0) throw std::invalid_argument("max-steps must be >= 0");
  if (c.plateau_window < 1) throw std::invalid_argument("plateau-window must be >= 1");
}

// ---------------------------------------------------------------------------
// train
// ---------------------------------------------------------------------------

struct TrainArgs {
  TrainFlags flags;
  std::string out;
  bool quiet = false;
};

int cmd_train(const TrainArgs& args) {
  validate_train_config(args.flags.config);
  fs::path dir = args.out.empty()
                     ? default_out_root() / run_dir_name(args.flags.config.alpha,
                                                         args.flags.config.master_seed)
                     : fs::path(args.out);
  const RunSummary summary = execute_run(args.flags.config, dir, !args.quiet);
  std::cout << "run complete: " << dir.string() << "\n"
            << "  stop_reason " << to_string(summary.stop_reason) << ", final step "
            << summary.final_step << ", wall " << summary.wall_seconds << "s\n";
  return 0;
}

// ---------------------------------------------------------------------------
// sweep
// ---------------------------------------------------------------------------

struct SweepArgs {
  TrainFlags flags;
  std::vector<double> alphas;
  std::vector<std::uint64_t> seeds;
  std::string out;
  unsigned jobs = 1;
  bool quiet = false;
};

int cmd_sweep(const SweepArgs& args) {
  std::vector<double> alphas = args.alphas.empty() ? kDefaultAlphas : args.alphas;
  std::vector<std::uint64_t> seeds = args.seeds.empty() ? std::vector<std::uint64_t>{1}
                                                        : args.seeds;
  const fs::path root = args.out.empty() ? default_out_root() / "sweep" : fs::path(args.out);
  fs::create_directories(root);

  struct Job {
    TrainConfig config;
    fs::path dir;
  };
  std::vector<Job> jobs;
  for (double alpha : alphas) {
    for (std::uint64_t seed : seeds) {
      TrainConfig config = args.flags.config;
      config.alpha = alpha;
      config.master_seed = seed;
      validate_train_config(config);
      jobs.push_back({config, root / run_dir_name(alpha, seed)});
    }
  }

  json entries = json::array();
  std::mutex mutex;
  std::size_t next = 0;
  int failures = 0;
  auto write_manifest = [&]() {
    json manifest;
    manifest["format_version"] = kFormatVersion;
    manifest["runs"] = entries;
    write_text_atomic(manifest.dump(2) + "\n", root / "sweep_manifest.json");
  };

  auto worker = [&]() {
    for (;;) {
      std::size_t index;
      {
        std::lock_guard<std::mutex> lock(mutex);
        if (next >= jobs.size()) return;
        index = next++;
      }
      const Job& job = jobs[index];
      json entry{{"alpha", job.config.alpha},
                 {"seed", job.config.master_seed},
                 {"dir", job.dir.filename().string()}};
      try {
        if (auto cached = load_run_summary(job.dir);
            cached && config_matches(cached->config, job.config)) {
          entry["status"] = "skipped";
          entry["stop_reason"] = to_string(cached->stop_reason);
        } else {
          const RunSummary summary = execute_run(job.config, job.dir, !args.quiet && args.jobs <= 1);
          entry["status"] = "ok";
          entry["stop_reason"] = to_string(summary.stop_reason);
        }
      } catch (const std::exception& e) {
        entry["status"] = "failed";
        entry["error"] = e.what();
        std::lock_guard<std::mutex> lock(mutex);
        ++failures;
      }
      {
        std::lock_guard<std::mutex> lock(mutex);
        entries.push_back(entry);
        write_manifest();
        std::cerr << "sweep: " << job.dir.filename().string() << " "
                  << entry["status"].get<std::string>() << "\n";
      }
    }
  };

  const unsigned n_threads = std::max(1u, args.jobs);
  if (n_threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < n_threads; ++t) pool.emplace_back(worker);
    for (std::thread& t : pool) t.join();
  }
  return failures == 0 ? 0 : 2;
}

// ---------------------------------------------------------------------------
// construct-table
// ---------------------------------------------------------------------------

struct ConstructTableArgs {
  int p = 97;
  std::vector<int> widths;
  std::vector<std::string> settings;
  int n_seeds = 40;
  std::string out = "construct_table.csv";
};

std::vector<ConstructionSetting> resolve_settings(const std::vector<std::string>& names) {
  if (names.empty()) return {kAllSettings.begin(), kAllSettings.end()};
  std::vector<ConstructionSetting> settings;
  settings.reserve(names.size());
  for (const std::string& name : names) settings.push_back(parse_setting(name));
  return settings;
}

int cmd_construct_table(const ConstructTableArgs& args) {
  const std::vector<int> widths = args.widths.empty() ? kDefaultWidths : args.widths;
  const std::vector<ConstructionSetting> settings = resolve_settings(args.settings);
  const auto rows = construct_accuracy_table(args.p, widths, settings, args.n_seeds);

  std::string csv = csv_version_line() + "n_hidden,setting,mean_accuracy,sd_accuracy\n";
  for (const ConstructedTableRow& row : rows) {
    csv += std::to_string(row.n_hidden) + "," + setting_name(row.setting) + "," +
           format_double(row.mean_acc) + "," + format_double(row.sd_acc) + "\n";
  }
  write_text_atomic(csv, args.out);
  std::cout << "wrote " << args.out << " (" << rows.size() << " rows)\n";
  return 0;
}

// ---------------------------------------------------------------------------
// extract-table
// ---------------------------------------------------------------------------

struct ExtractTableArgs {
  std::string runs_dir;
  std::vector<std::string> settings;
  std::string out = "extract_table.csv";
  std::string save_dir;  // when set, extracted models are checkpointed here
};

int cmd_extract_table(const ExtractTableArgs& args) {
  const std::vector<ConstructionSetting> settings = resolve_settings(args.settings);
  std::vector<fs::path> run_dirs;
  if (fs::exists(args.runs_dir)) {
    for (const auto& entry : fs::directory_iterator(args.runs_dir)) {
      if (entry.is_directory() && fs::exists(entry.path() / "manifest.json")) {
        run_dirs.push_back(entry.path());
      }
    }
  }
  std::sort(run_dirs.begin(), run_dirs.end());

  struct Row {
    double alpha;
    int kind_order;  // final first
    std::string kind;
    double real;
    std::map<std::string, double> extracted;
  };
  std::vector<Row> rows;
  int warnings = 0;

  for (const fs::path& dir : run_dirs) {
    std::optional<RunSummary> summary;
    try {
      summary = load_run_summary(dir);
    } catch (const std::exception& e) {
      std::cerr << "warning: " << e.what() << ", run skipped\n";
      ++warnings;
      continue;
    }
    if (!summary) continue;
    const SplitDataset data =
        make_dataset(summary->config.p, summary->config.train_frac, summary->config.alpha,
                     summary->config.master_seed);
    const RunPaths paths = run_paths(dir);
    for (const auto& [kind, path, order] :
         {std::tuple{"final", paths.final_checkpoint, 0},
          std::tuple{"saturation", paths.saturation_checkpoint, 1}}) {
      if (!fs::exists(path)) {
        std::cerr << "warning: missing " << path.string() << ", row skipped\n";
        ++warnings;
        continue;
      }
      const LoadedCheckpoint loaded = load_checkpoint(path);
      Row row;
      row.alpha = summary->config.alpha;
      row.kind = kind;
      row.kind_order = order;
      row.real = evaluate_accuracy(loaded.model, data.val);
      for (const ConstructionSetting& setting : settings) {
        const Model extracted = extract_idealized_model(loaded.model, setting).model;
        row.extracted[setting_name(setting)] = evaluate_accuracy(extracted, data.val);
        if (!args.save_dir.empty()) {
          fs::create_directories(args.save_dir);
          CheckpointInfo info;
          info.kind = "extracted";
          info.alpha = summary->config.alpha;
          info.master_seed = summary->config.master_seed;
          info.setting = setting_name(setting);
          info.source_checkpoint = path.string();
          const std::string name = "extracted_" + run_dir_name(row.alpha, info.master_seed) +
                                   "_" + kind + "_" + setting_name(setting) + ".json";
          save_checkpoint(extracted, info, fs::path(args.save_dir) / name);
        }
      }
      rows.push_back(std::move(row));
    }
  }
  std::sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) {
    return std::tie(a.alpha, a.kind_order) < std::tie(b.alpha, b.kind_order);
  });

  std::string csv = csv_version_line() + "alpha,kind,real,sq-sq,sq-cos,cos-cos\n";
  auto cell = [](const Row& row, const char* name) {
    const auto it = row.extracted.find(name);
    return it == row.extracted.end() ? std::string() : format_double(it->second);
  };
  for (const Row& row : rows) {
    csv += format_alpha(row.alpha) + "," + row.kind + "," + format_double(row.real) + "," +
           cell(row, "sq-sq") + "," + cell(row, "sq-cos") + "," + cell(row, "cos-cos") + "\n";
  }
  write_text_atomic(csv, args.out);
  std::cout << "wrote " << args.out << " (" << rows.size() << " rows, " << warnings
            << " warnings)\n";
  return 0;
}

// ---------------------------------------------------------------------------
// analyze
// ---------------------------------------------------------------------------

struct AnalyzeArgs {
  std::string checkpoint;
  std::string out = "analysis";
  std::string sweep_dir;
  int resolution = 100;
};

std::string band_name(const NeuronClassification& cls, int neuron) {
  if (std::find(cls.structured.begin(), cls.structured.end(), neuron) != cls.structured.end()) {
    return "structured";
  }
  if (std::find(cls.unstructured.begin(), cls.unstructured.end(), neuron) !=
      cls.unstructured.end()) {
    return "unstructured";
  }
  return "excluded";
}

// Validation triples for a trained checkpoint; constructed/extracted models
// are scored on the full task instead.
std::vector<Triple> eval_triples_for(const LoadedCheckpoint& loaded, const fs::path& dir) {
  if (loaded.info.kind == "constructed" || loaded.info.kind == "extracted") {
    return generate_triples(loaded.model.p);
  }
  double train_frac = 0.3;
  if (auto summary = load_run_summary(dir)) train_frac = summary->config.train_frac;
  return make_dataset(loaded.model.p, train_frac, loaded.info.alpha, loaded.info.master_seed).val;
}

int cmd_analyze(const AnalyzeArgs& args) {
  const fs::path checkpoint_path(args.checkpoint);
  const LoadedCheckpoint loaded = load_checkpoint(checkpoint_path);
  const Model& model = loaded.model;
  const std::vector<Triple> val = eval_triples_for(loaded, checkpoint_path.parent_path());

  const NeuronClassification cls = classify_neurons(model);
  const FrequencyMatchRate freq = frequency_match_rate(model, cls);
  const PhaseReport phases = phase_sum_report(model, cls);
  const AblationResult ablation = ablate_unstructured(model, cls, val);
  const double val_acc = evaluate_accuracy(model, val);
  const EffectiveBiasStats beff = effective_bias_stats(model, cls);

  std::optional<TTestResult> ttest_structured;
  std::optional<TTestResult> ttest_all;
  try {
    ttest_structured = fit_distance_ttest(model, cls, NeuronSubset::structured, args.resolution);
  } catch (const std::invalid_argument&) {
  }
  try {
    ttest_all = fit_distance_ttest(model, cls, NeuronSubset::all, args.resolution);
  } catch (const std::invalid_argument&) {
  }

  const fs::path out_dir(args.out);
  fs::create_directories(out_dir);

  // report.json: summary plus per-neuron records
  json report;
  report["format_version"] = kFormatVersion;
  report["checkpoint"] = json{{"path", checkpoint_path.string()},
                              {"kind", loaded.info.kind},
                              {"step", loaded.info.step},
                              {"alpha", loaded.info.alpha},
                              {"master_seed", loaded.info.master_seed}};
  json ttest_json = json::object();
  auto ttest_to_json = [](const std::optional<TTestResult>& t) -> json {
    if (!t) return nullptr;
    return json{{"t", t->t},
                {"df", t->df},
                {"p_value", t->p_value},
                {"p_floored", t->p_floored},
                {"degenerate", t->degenerate}};
  };
  report["summary"] =
      json{{"n_hidden", model.n_hidden},
           {"val_accuracy", val_acc},
           {"structured_count", cls.structured.size()},
           {"unstructured_count", cls.unstructured.size()},
           {"excluded_count", cls.excluded.size()},
           {"ab_band_disagreements", cls.ab_disagreements},
           {"mean_periodicity", sample_mean(cls.score_a)},
           {"freq_match_all", freq.all_rate},
           {"freq_match_structured", freq.structured_rate},
           {"phase_r_all", phases.r_all ? json(*phases.r_all) : json(nullptr)},
           {"phase_r_structured",
            phases.r_structured ? json(*phases.r_structured) : json(nullptr)},
           {"phase_skipped_neurons", phases.skipped},
           {"ablation", json{{"acc_before", ablation.acc_before},
                             {"acc_after", ablation.acc_after},
                             {"delta", ablation.delta}}},
           {"fit_ttest_structured", ttest_to_json(ttest_structured)},
           {"fit_ttest_all", ttest_to_json(ttest_all)},
           {"effective_bias", json{{"mean", beff.mean},
                                   {"sd", beff.sd},
                                   {"max_abs", beff.max_abs},
                                   {"mean_abs", beff.mean_abs}}}};

  std::map<int, const PhaseReport::Entry*> phase_by_neuron;
  for (const auto& entry : phases.entries) phase_by_neuron[entry.neuron] = &entry;

  json neurons = json::array();
  for (int i = 0; i < model.n_hidden; ++i) {
    json neuron;
    neuron["index"] = i;
    neuron["score_a"] = cls.score_a[static_cast<std::size_t>(i)];
    neuron["score_b"] = cls.score_b[static_cast<std::size_t>(i)];
    neuron["band"] = band_name(cls, i);
    const auto dom = try_dominant_component(model.w_a.row(i).transpose());
    neuron["frequency"] = dom ? json(dom->frequency) : json(nullptr);
    if (const auto it = phase_by_neuron.find(i); it != phase_by_neuron.end()) {
      neuron["phi_a"] = it->second->phi_a;
      neuron["phi_b"] = it->second->phi_b;
      neuron["phi_out"] = it->second->phi_out;
      neuron["phi_sum"] = it->second->phi_sum;
    }
    neurons.push_back(std::move(neuron));
  }
  report["neurons"] = std::move(neurons);
  write_text_atomic(report.dump(2) + "\n", out_dir / "report.json");

  // report_summary.csv: one row of headline numbers
  {
    std::ostringstream csv;
    csv << csv_version_line()
        << "kind,step,alpha,val_acc,structured,unstructured,excluded,freq_match_all,"
           "freq_match_structured,r_all,r_structured,ablation_delta,t_structured,p_structured,"
           "beff_mean,beff_sd,beff_max_abs,mean_periodicity\n";
    csv << loaded.info.kind << ',' << loaded.info.step << ',' << format_alpha(loaded.info.alpha)
        << ',' << format_double(val_acc) << ',' << cls.structured.size() << ','
        << cls.unstructured.size() << ',' << cls.excluded.size() << ','
        << format_double(freq.all_rate) << ',' << format_double(freq.structured_rate) << ','
        << opt_to_csv(phases.r_all) << ',' << opt_to_csv(phases.r_structured) << ','
        << format_double(ablation.delta) << ','
        << (ttest_structured ? format_double(ttest_structured->t) : std::string()) << ','
        << (ttest_structured ? format_double(ttest_structured->p_value) : std::string()) << ','
        << format_double(beff.mean) << ',' << format_double(beff.sd) << ','
        << format_double(beff.max_abs) << ',' << format_double(sample_mean(cls.score_a)) << '\n';
    write_text_atomic(csv.str(), out_dir / "report_summary.csv");
  }

  // neuron_waves.csv: actual w_a/w_b with the ideal square wave per neuron
  {
    std::ostringstream csv;
    csv << csv_version_line() << "neuron,j,w_a,w_b,ideal_a,ideal_b\n";
    for (int i = 0; i < model.n_hidden; ++i) {
      std::optional<SquareWaveFit> fit_a;
      std::optional<SquareWaveFit> fit_b;
      try {
        fit_a = fit_ideal_square_wave(model.w_a.row(i).transpose());
        fit_b = fit_ideal_square_wave(model.w_b.row(i).transpose());
      } catch (const NoDominantComponent&) {
      }
      for (int j = 0; j < model.p; ++j) {
        csv << i << ',' << j << ',' << format_double(model.w_a(i, j)) << ','
            << format_double(model.w_b(i, j)) << ','
            << (fit_a ? format_double(wave_value(fit_a->wave, j, model.p)) : std::string()) << ','
            << (fit_b ? format_double(wave_value(fit_b->wave, j, model.p)) : std::string())
            << '\n';
      }
    }
    write_text_atomic(csv.str(), out_dir / "neuron_waves.csv");
  }

  // phase_scatter.csv: the phi_out vs phi_a + phi_b scatter
  {
    std::ostringstream csv;
    csv << csv_version_line() << "neuron,score_a,band,phi_a,phi_b,phi_sum,phi_out\n";
    for (const auto& entry : phases.entries) {
      csv << entry.neuron << ',' << format_double(cls.score_a[static_cast<std::size_t>(entry.neuron)])
          << ',' << band_name(cls, entry.neuron) << ',' << format_double(entry.phi_a) << ','
          << format_double(entry.phi_b) << ',' << format_double(entry.phi_sum) << ','
          << format_double(entry.phi_out) << '\n';
    }
    write_text_atomic(csv.str(), out_dir / "phase_scatter.csv");
  }

  // alpha_sweep.csv (only with --sweep): accuracy/periodicity vs alpha
  if (!args.sweep_dir.empty()) {
    std::vector<fs::path> run_dirs;
    for (const auto& entry : fs::directory_iterator(args.sweep_dir)) {
      if (entry.is_directory() && fs::exists(entry.path() / "manifest.json")) {
        run_dirs.push_back(entry.path());
      }
    }
    std::sort(run_dirs.begin(), run_dirs.end());
    std::vector<SweepRow> rows;
    for (const fs::path& dir : run_dirs) {
      std::optional<RunSummary> summary;
      try {
        summary = load_run_summary(dir);
      } catch (const std::exception& e) {
        std::cerr << "warning: " << e.what() << ", run skipped\n";
        continue;
      }
      if (!summary) continue;
      const RunPaths paths = run_paths(dir);
      if (!fs::exists(paths.final_checkpoint)) continue;
      const LoadedCheckpoint run_final = load_checkpoint(paths.final_checkpoint);
      const SplitDataset data =
          make_dataset(summary->config.p, summary->config.train_frac, summary->config.alpha,
                       summary->config.master_seed);
      rows.push_back(summarize_run(run_final.model, summary->config.alpha, data.val));
    }
    std::sort(rows.begin(), rows.end(),
              [](const SweepRow& a, const SweepRow& b) { return a.alpha < b.alpha; });
    std::ostringstream csv;
    csv << csv_version_line()
        << "alpha,final_val_acc,mean_periodicity,r_all,r_structured,structured_count\n";
    for (const SweepRow& row : rows) {
      csv << format_alpha(row.alpha) << ',' << format_double(row.final_val_acc) << ','
          << format_double(row.mean_periodicity) << ',' << opt_to_csv(row.r_all) << ','
          << opt_to_csv(row.r_structured) << ',' << row.structured_count << '\n';
    }
    write_text_atomic(csv.str(), out_dir / "alpha_sweep.csv");
  }

  std::cout << "analysis written to " << out_dir.string() << " (structured "
            << cls.structured.size() << ", unstructured " << cls.unstructured.size()
            << ", excluded " << cls.excluded.size() << ")\n";
  return 0;
}

// ---------------------------------------------------------------------------
// export-split
// ---------------------------------------------------------------------------

struct ExportSplitArgs {
  int p = 97;
  double train_frac = 0.3;
  double alpha = 0.0;
  std::uint64_t seed = 1;
  std::string out = "split.csv";
};

int cmd_export_split(const ExportSplitArgs& args) {
  export_split_csv(make_dataset(args.p, args.train_frac, args.alpha, args.seed), args.out);
  std::cout << "wrote " << args.out << "\n";
  return 0;
}

}  // namespace

int run_cli(const std::vector<std::string>& args) {
  std::vector<const char*> argv;
  argv.reserve(args.size() + 1);
  static const char* name = "grokmlp";
  argv.push_back(name);
  for (const std::string& a : args) argv.push_back(a.c_str());
  return run_cli(static_cast<int>(argv.size()), argv.data());
}

int run_cli(int argc, const char* const* argv) {
  CLI::App app{"Modular-addition MLP training, Fourier weight analysis and idealized models"};
  app.require_subcommand(1);
  app.set_config("--config", "", "Read options from a config file");

  TrainArgs train_args;
  CLI::App* train_cmd = app.add_subcommand("train", "Train one model and save checkpoints");
  train_args.flags.attach(*train_cmd, true);
  train_cmd->add_option("--out", train_args.out, "Run directory (default <root>/a<alpha>_s<seed>)");
  train_cmd->add_flag("--quiet", train_args.quiet, "Suppress per-eval progress lines");

  SweepArgs sweep_args;
  CLI::App* sweep_cmd = app.add_subcommand("sweep", "Train across alpha and seed grids");
  sweep_args.flags.attach(*sweep_cmd, false);
  sweep_cmd->add_option("--alphas", sweep_args.alphas, "Alpha values (default: the 19-value grid)");
  sweep_cmd->add_option("--seeds", sweep_args.seeds, "Master seeds (default: 1)");
  sweep_cmd->add_option("--out", sweep_args.out, "Sweep root directory");
  sweep_cmd->add_option("--jobs", sweep_args.jobs, "Concurrent runs")->check(CLI::PositiveNumber);
  sweep_cmd->add_flag("--quiet", sweep_args.quiet, "Suppress per-eval progress lines");

  ConstructTableArgs construct_args;
  CLI::App* construct_cmd =
      app.add_subcommand("construct-table", "Accuracy table of from-scratch wave models");
  construct_cmd->add_option("--p", construct_args.p, "Prime modulus")->check(CLI::PositiveNumber);
  construct_cmd->add_option("--widths", construct_args.widths, "Hidden widths");
  construct_cmd->add_option("--settings", construct_args.settings,
                            "Wave settings (cos-cos, sq-cos, sq-sq)");
  construct_cmd->add_option("--num-seeds", construct_args.n_seeds, "Seeds per cell")
      ->check(CLI::PositiveNumber);
  construct_cmd->add_option("--out", construct_args.out, "Output CSV path");

  ExtractTableArgs extract_args;
  CLI::App* extract_cmd = app.add_subcommand(
      "extract-table", "Real vs extracted accuracy across the runs in a sweep directory");
  extract_cmd->add_option("--runs", extract_args.runs_dir, "Directory of run directories")
      ->required();
  extract_cmd->add_option("--settings", extract_args.settings,
                          "Wave settings (cos-cos, sq-cos, sq-sq)");
  extract_cmd->add_option("--out", extract_args.out, "Output CSV path");
  extract_cmd->add_option("--save-extracted", extract_args.save_dir,
                          "Also write each extracted model as a checkpoint into this directory");

  AnalyzeArgs analyze_args;
  CLI::App* analyze_cmd =
      app.add_subcommand("analyze", "Spectral/phase/fit analysis of one checkpoint");
  analyze_cmd->add_option("--checkpoint", analyze_args.checkpoint, "Checkpoint JSON path")
      ->required();
  analyze_cmd->add_option("--out", analyze_args.out, "Output directory");
  analyze_cmd->add_option("--sweep", analyze_args.sweep_dir,
                          "Sweep directory for the alpha-curve CSV");
  analyze_cmd->add_option("--resolution", analyze_args.resolution,
                          "Samples per unit j for nearest-point distances");

  ExportSplitArgs export_args;
  CLI::App* export_cmd = app.add_subcommand("export-split", "Audit CSV of one dataset split");
  export_cmd->add_option("--p", export_args.p, "Prime modulus")->check(CLI::PositiveNumber);
  export_cmd->add_option("--train-frac", export_args.train_frac, "Train fraction");
  export_cmd->add_option("--alpha", export_args.alpha, "Label corruption fraction");
  export_cmd->add_option("--seed", export_args.seed, "Master seed");
  export_cmd->add_option("--out", export_args.out, "Output CSV path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*train_cmd) {
      train_args.flags.resolve(*train_cmd);
      return cmd_train(train_args);
    }
    if (*sweep_cmd) {
      sweep_args.flags.resolve(*sweep_cmd);
      return cmd_sweep(sweep_args);
    }
    if (*construct_cmd) return cmd_construct_table(construct_args);
    if (*extract_cmd) return cmd_extract_table(extract_args);
    if (*analyze_cmd) return cmd_analyze(analyze_args);
    if (*export_cmd) return cmd_export_split(export_args);
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 1;
}

}  // namespace grokmlp
