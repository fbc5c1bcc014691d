#pragma once

#include <optional>
#include <vector>

#include "grokmlp/idealize.hpp"
#include "grokmlp/mlp.hpp"
#include "grokmlp/stats.hpp"

namespace grokmlp {

struct ClassificationThresholds {
  double high = 12.0;  // periodicity above this -> structured
  double low = 5.0;    // below this -> unstructured; in between -> excluded
};

struct NeuronClassification {
  std::vector<int> structured;
  std::vector<int> unstructured;
  std::vector<int> excluded;
  std::vector<double> score_a;  // per(w_a) per neuron
  std::vector<double> score_b;  // per(w_b), for the consistency check
  ClassificationThresholds thresholds;
  int ab_disagreements = 0;  // neurons whose w_b score lands in a different band
};

// Classifies every neuron by the periodicity of its w_a row.
NeuronClassification classify_neurons(const Model& model, ClassificationThresholds thresholds = {});

struct AblationResult {
  double acc_before = 0.0;
  double acc_after = 0.0;
  double delta = 0.0;  // after - before
};

// Zeroes the w_out rows of all unstructured neurons and reports accuracy on
// the (uncorrupted) validation set before and after.
AblationResult ablate_unstructured(const Model& model, const NeuronClassification& cls,
                                   const std::vector<Triple>& val);

struct FrequencyMatchRate {
  double all_rate = 0.0;
  double structured_rate = 0.0;
};

// Fraction of neurons whose w_a, w_b and w_out share one dominant frequency.
// Neurons lacking a dominant component anywhere count as non-matching.
FrequencyMatchRate frequency_match_rate(const Model& model, const NeuronClassification& cls);

struct PhaseReport {
  struct Entry {
    int neuron = 0;
    double phi_a = 0.0;
    double phi_b = 0.0;
    double phi_out = 0.0;
    double phi_sum = 0.0;  // wrap(phi_a + phi_b)
  };
  std::vector<Entry> entries;          // neurons with all three phases extractable
  int skipped = 0;                     // neurons without a dominant component
  std::optional<double> r_all;         // nullopt marks a degenerate correlation
  std::optional<double> r_structured;
};

PhaseReport phase_sum_report(const Model& model, const NeuronClassification& cls);

enum class NeuronSubset { all, structured };

// Paired t-test of (distance to ideal square) - (distance to cosine with the
// same frequency/phase/amplitude/offset) over the selected neurons' w_a rows.
TTestResult fit_distance_ttest(const Model& model, const NeuronClassification& cls,
                               NeuronSubset subset, int resolution = 100);

struct EffectiveBiasStats {
  double mean = 0.0;      // signed mean over structured neurons
  double sd = 0.0;
  double max_abs = 0.0;
  double mean_abs = 0.0;
  std::vector<double> per_neuron;  // aligned with cls.structured
};

// b_eff = bias_h + offset(fit(w_a)) + offset(fit(w_b)), structured neurons.
EffectiveBiasStats effective_bias_stats(const Model& model, const NeuronClassification& cls);

struct SweepRow {
  double alpha = 0.0;
  double final_val_acc = 0.0;
  double mean_periodicity = 0.0;  // mean per(w_a) over all neurons
  std::optional<double> r_all;
  std::optional<double> r_structured;
  int structured_count = 0;
};

// Summary row for one finished run; the val triples must match the run's
// split.
SweepRow summarize_run(const Model& final_model, double alpha, const std::vector<Triple>& val);

// One row per run, ordered by alpha.
std::vector<SweepRow> sweep_summary(const std::vector<RunRecord>& records);

}  // namespace grokmlp
