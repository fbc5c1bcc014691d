#include "grokmlp/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "grokmlp/spectral.hpp"

namespace grokmlp {

namespace {

enum class Band { structured, unstructured, excluded };

Band band_of(double score, const ClassificationThresholds& t) {
  if (score > t.high) return Band::structured;
  if (score < t.low) return Band::unstructured;
  return Band::excluded;
}

}  // namespace

NeuronClassification classify_neurons(const Model& model, ClassificationThresholds thresholds) {
  NeuronClassification cls;
  cls.thresholds = thresholds;
  cls.score_a.reserve(static_cast<std::size_t>(model.n_hidden));
  cls.score_b.reserve(static_cast<std::size_t>(model.n_hidden));
  for (int i = 0; i < model.n_hidden; ++i) {
    const double sa = periodicity_score(model.w_a.row(i).transpose());
    const double sb = periodicity_score(model.w_b.row(i).transpose());
    cls.score_a.push_back(sa);
    cls.score_b.push_back(sb);
    switch (band_of(sa, thresholds)) {
      case Band::structured: cls.structured.push_back(i); break;
      case Band::unstructured: cls.unstructured.push_back(i); break;
      case Band::excluded: cls.excluded.push_back(i); break;
    }
    if (band_of(sa, thresholds) != band_of(sb, thresholds)) ++cls.ab_disagreements;
  }
  return cls;
}

AblationResult ablate_unstructured(const Model& model, const NeuronClassification& cls,
                                   const std::vector<Triple>& val) {
  if (cls.score_a.size() != static_cast<std::size_t>(model.n_hidden)) {
    throw std::invalid_argument("ablate_unstructured: classification does not match model");
  }
  AblationResult result;
  result.acc_before = evaluate_accuracy(model, val);
  Model ablated = model;
  for (int i : cls.unstructured) ablated.w_out.row(i).setZero();
  result.acc_after = evaluate_accuracy(ablated, val);
  result.delta = result.acc_after - result.acc_before;
  return result;
}

FrequencyMatchRate frequency_match_rate(const Model& model, const NeuronClassification& cls) {
  std::vector<bool> matches(static_cast<std::size_t>(model.n_hidden), false);
  for (int i = 0; i < model.n_hidden; ++i) {
    const auto da = try_dominant_component(model.w_a.row(i).transpose());
    const auto db = try_dominant_component(model.w_b.row(i).transpose());
    const auto dout = try_dominant_component(model.w_out.row(i).transpose());
    matches[static_cast<std::size_t>(i)] = da && db && dout &&
                                           da->frequency == db->frequency &&
                                           da->frequency == dout->frequency;
  }
  FrequencyMatchRate rate;
  long all = 0;
  for (bool m : matches) all += m;
  rate.all_rate = static_cast<double>(all) / static_cast<double>(model.n_hidden);
  long structured = 0;
  for (int i : cls.structured) structured += matches[static_cast<std::size_t>(i)];
  rate.structured_rate = cls.structured.empty()
                             ? 1.0  // vacuous
                             : static_cast<double>(structured) /
                                   static_cast<double>(cls.structured.size());
  return rate;
}

PhaseReport phase_sum_report(const Model& model, const NeuronClassification& cls) {
  PhaseReport report;
  std::vector<bool> is_structured(static_cast<std::size_t>(model.n_hidden), false);
  for (int i : cls.structured) is_structured[static_cast<std::size_t>(i)] = true;

  std::vector<double> sums_all, outs_all, sums_struct, outs_struct;
  for (int i = 0; i < model.n_hidden; ++i) {
    const auto da = try_dominant_component(model.w_a.row(i).transpose());
    const auto db = try_dominant_component(model.w_b.row(i).transpose());
    const auto dout = try_dominant_component(model.w_out.row(i).transpose());
    if (!da || !db || !dout) {
      ++report.skipped;
      continue;
    }
    PhaseReport::Entry entry;
    entry.neuron = i;
    entry.phi_a = da->phase;
    entry.phi_b = db->phase;
    entry.phi_out = dout->phase;
    entry.phi_sum = wrap_angle(da->phase + db->phase);
    report.entries.push_back(entry);
    sums_all.push_back(entry.phi_sum);
    outs_all.push_back(entry.phi_out);
    if (is_structured[static_cast<std::size_t>(i)]) {
      sums_struct.push_back(entry.phi_sum);
      outs_struct.push_back(entry.phi_out);
    }
  }

  auto correlate = [](const std::vector<double>& x,
                      const std::vector<double>& y) -> std::optional<double> {
    if (x.size() < 2) return std::nullopt;
    try {
      return circular_correlation(x, y);
    } catch (const DegenerateCircularData&) {
      return std::nullopt;
    }
  };
  report.r_all = correlate(sums_all, outs_all);
  report.r_structured = correlate(sums_struct, outs_struct);
  return report;
}

TTestResult fit_distance_ttest(const Model& model, const NeuronClassification& cls,
                               NeuronSubset subset, int resolution) {
  std::vector<int> neurons;
  if (subset == NeuronSubset::structured) {
    neurons = cls.structured;
  } else {
    neurons.resize(static_cast<std::size_t>(model.n_hidden));
    for (int i = 0; i < model.n_hidden; ++i) neurons[static_cast<std::size_t>(i)] = i;
  }

  std::vector<double> diffs;
  diffs.reserve(neurons.size());
  for (int i : neurons) {
    const Eigen::VectorXd w = model.w_a.row(i).transpose();
    SquareWaveFit fit;
    try {
      fit = fit_ideal_square_wave(w);
    } catch (const NoDominantComponent&) {
      continue;  // nothing to fit against
    }
    WaveSpec cosine = fit.wave;
    cosine.kind = WaveKind::cosine;
    const double d_square = mean_nearest_point_distance(w, fit.wave, resolution);
    const double d_cosine = mean_nearest_point_distance(w, cosine, resolution);
    diffs.push_back(d_square - d_cosine);
  }
  if (diffs.size() < 2) {
    throw std::invalid_argument("fit_distance_ttest: fewer than 2 usable neurons");
  }
  return paired_ttest(diffs);
}

EffectiveBiasStats effective_bias_stats(const Model& model, const NeuronClassification& cls) {
  EffectiveBiasStats stats;
  for (int i : cls.structured) {
    const SquareWaveFit fit_a = fit_ideal_square_wave(model.w_a.row(i).transpose());
    const SquareWaveFit fit_b = fit_ideal_square_wave(model.w_b.row(i).transpose());
    stats.per_neuron.push_back(model.bias_h[i] + fit_a.wave.offset + fit_b.wave.offset);
  }
  if (stats.per_neuron.empty()) return stats;
  stats.mean = sample_mean(stats.per_neuron);
  stats.sd = sample_sd(stats.per_neuron);
  for (double b : stats.per_neuron) {
    stats.max_abs = std::max(stats.max_abs, std::abs(b));
    stats.mean_abs += std::abs(b);
  }
  stats.mean_abs /= static_cast<double>(stats.per_neuron.size());
  return stats;
}

SweepRow summarize_run(const Model& final_model, double alpha, const std::vector<Triple>& val) {
  SweepRow row;
  row.alpha = alpha;
  row.final_val_acc = evaluate_accuracy(final_model, val);
  const NeuronClassification cls = classify_neurons(final_model);
  row.mean_periodicity = sample_mean(cls.score_a);
  row.structured_count = static_cast<int>(cls.structured.size());
  const PhaseReport phases = phase_sum_report(final_model, cls);
  row.r_all = phases.r_all;
  row.r_structured = phases.r_structured;
  return row;
}

std::vector<SweepRow> sweep_summary(const std::vector<RunRecord>& records) {
  if (records.empty()) throw std::invalid_argument("sweep_summary: no runs");
  std::vector<SweepRow> rows;
  rows.reserve(records.size());
  for (const RunRecord& record : records) {
    const SplitDataset data = make_dataset(record.config.p, record.config.train_frac,
                                           record.config.alpha, record.config.master_seed);
    rows.push_back(
        summarize_run(record.final_model.model, record.config.alpha, data.val));
  }
  std::sort(rows.begin(), rows.end(),
            [](const SweepRow& a, const SweepRow& b) { return a.alpha < b.alpha; });
  return rows;
}

}  // namespace grokmlp
