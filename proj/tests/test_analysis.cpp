#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "grokmlp/analysis.hpp"
#include "grokmlp/dataset.hpp"
#include "grokmlp/rng.hpp"
#include "grokmlp/spectral.hpp"

using namespace grokmlp;

namespace {

Model noise_model(int p, int n, std::uint64_t seed) {
  // uniform iid weights: flat spectra everywhere
  return init_model(p, n, seed);
}

}  // namespace

TEST_CASE("classify_neurons partitions the index set") {
  const Model m = construct_scratch_model(97, 40, kCosToCos, 1);
  const NeuronClassification cls = classify_neurons(m);
  CHECK(cls.structured.size() + cls.unstructured.size() + cls.excluded.size() == 40);
  std::set<int> seen;
  for (const auto* group : {&cls.structured, &cls.unstructured, &cls.excluded}) {
    for (int i : *group) seen.insert(i);
  }
  CHECK(seen.size() == 40);
  // idempotent
  const NeuronClassification again = classify_neurons(m);
  CHECK(again.structured == cls.structured);
  CHECK(again.unstructured == cls.unstructured);
}

TEST_CASE("pure wave neurons are all structured, noise neurons none") {
  const Model waves = construct_scratch_model(97, 40, kCosToCos, 2);
  const NeuronClassification wave_cls = classify_neurons(waves);
  CHECK(wave_cls.structured.size() == 40);  // score is exactly 48 > 12
  CHECK(wave_cls.ab_disagreements == 0);
  for (double s : wave_cls.score_a) CHECK(s == doctest::Approx(48.0).epsilon(1e-9));

  const Model noise = noise_model(97, 256, 42);
  const NeuronClassification noise_cls = classify_neurons(noise);
  CHECK(noise_cls.structured.empty());
  CHECK(noise_cls.unstructured.size() >= 250);  // a stray score in [5,12] is tolerated
}

TEST_CASE("classification thresholds are honored") {
  const Model m = construct_scratch_model(97, 8, kCosToCos, 3);
  const NeuronClassification cls = classify_neurons(m, {100.0, 50.0});
  CHECK(cls.structured.empty());  // score 48 < 50 -> everything unstructured
  CHECK(cls.unstructured.size() == 8);
}

TEST_CASE("ablating an empty unstructured set changes nothing") {
  const Model m = construct_scratch_model(97, 64, kSqToCos, 4);
  const NeuronClassification cls = classify_neurons(m);
  REQUIRE(cls.unstructured.empty());
  const auto val = generate_triples(97);
  const AblationResult r = ablate_unstructured(m, cls, val);
  CHECK(r.delta == 0.0);
  CHECK(r.acc_before == r.acc_after);
}

TEST_CASE("ablating every neuron collapses to the tie-break baseline") {
  // all neurons of a noise model are unstructured, so ablation zeroes w_out
  const Model m = noise_model(97, 32, 7);
  const NeuronClassification cls = classify_neurons(m);
  REQUIRE(cls.unstructured.size() == 32);
  const SplitDataset data = make_dataset(97, 0.3, 0.0, 5);
  const AblationResult r = ablate_unstructured(m, cls, data.val);
  // zero logits everywhere -> argmax 0 -> correct iff label == 0
  CHECK(r.acc_after == 68.0 / 6596.0);
}

TEST_CASE("frequency match rates") {
  const Model built = construct_scratch_model(97, 48, kSqToCos, 8);
  const NeuronClassification cls = classify_neurons(built);
  const FrequencyMatchRate rate = frequency_match_rate(built, cls);
  CHECK(rate.all_rate == 1.0);
  CHECK(rate.structured_rate == 1.0);

  const Model noise = noise_model(97, 256, 11);
  const FrequencyMatchRate noise_rate =
      frequency_match_rate(noise, classify_neurons(noise));
  CHECK(noise_rate.all_rate < 0.05);  // chance is ~(1/48)^2
}

TEST_CASE("phase_sum_report detects the imposed relation on cosine constructions") {
  const Model m = construct_scratch_model(97, 128, kCosToCos, 12);
  const NeuronClassification cls = classify_neurons(m);
  const PhaseReport report = phase_sum_report(m, cls);
  CHECK(report.skipped == 0);
  REQUIRE(report.entries.size() == 128);
  REQUIRE(report.r_all.has_value());
  CHECK(std::abs(*report.r_all - 1.0) <= 1e-12);
  REQUIRE(report.r_structured.has_value());
  CHECK(std::abs(*report.r_structured - 1.0) <= 1e-12);
  for (const auto& e : report.entries) {
    CHECK(e.phi_a >= -M_PI);
    CHECK(e.phi_a < M_PI);
    CHECK(e.phi_sum >= -M_PI);
    CHECK(e.phi_sum < M_PI);
    CHECK(std::abs(wrap_angle(e.phi_out - e.phi_sum)) <= 1e-9);
  }
}

TEST_CASE("phase_sum_report on square constructions is near-perfect") {
  // sampled square waves quantize the recoverable phase to the arc midpoint,
  // so the relation shows up as r slightly below 1 rather than exactly 1
  for (const ConstructionSetting& setting : {kSqToCos, kSqToSq}) {
    const Model m = construct_scratch_model(97, 128, setting, 13);
    const PhaseReport report = phase_sum_report(m, classify_neurons(m));
    REQUIRE(report.r_all.has_value());
    CHECK(*report.r_all >= 0.999);
  }
}

TEST_CASE("phase_sum_report skips and counts degenerate neurons") {
  Model m = construct_scratch_model(97, 16, kCosToCos, 14);
  m.w_a.row(3).setZero();
  m.w_out.row(9).setZero();
  const PhaseReport report = phase_sum_report(m, classify_neurons(m));
  CHECK(report.skipped == 2);
  CHECK(report.entries.size() == 14);
}

TEST_CASE("extraction preserves each neuron's phase-sum deviation up to quantization") {
  // a noisy stand-in for a trained model
  Model trained = construct_scratch_model(97, 64, kSqToCos, 21);
  Rng rng(77);
  for (int i = 0; i < trained.n_hidden; ++i) {
    for (int j = 0; j < trained.p; ++j) {
      trained.w_a(i, j) += rng.uniform(-0.05, 0.05);
      trained.w_b(i, j) += rng.uniform(-0.05, 0.05);
      trained.w_out(i, j) += rng.uniform(-0.05, 0.05);
    }
  }
  const PhaseReport before = phase_sum_report(trained, classify_neurons(trained));
  const Model extracted = extract_idealized_model(trained, kSqToCos).model;
  const PhaseReport after = phase_sum_report(extracted, classify_neurons(extracted));
  REQUIRE(before.entries.size() == after.entries.size());
  for (std::size_t i = 0; i < before.entries.size(); ++i) {
    const double dev_before = wrap_angle(before.entries[i].phi_out - before.entries[i].phi_sum);
    const double dev_after = wrap_angle(after.entries[i].phi_out - after.entries[i].phi_sum);
    // square-wave resynthesis can move each input phase by at most pi/97
    CHECK(std::abs(wrap_angle(dev_after - dev_before)) <= 2.0 * M_PI / 97.0 + 1e-9);
  }
}

TEST_CASE("fit_distance_ttest on exact square waves is strongly negative") {
  const Model m = construct_scratch_model(97, 32, kSqToCos, 15);
  const NeuronClassification cls = classify_neurons(m);
  const TTestResult r = fit_distance_ttest(m, cls, NeuronSubset::all);
  CHECK(r.df == 31);
  CHECK(r.t < -10.0);
  CHECK(r.p_value < 1e-6);
  CHECK(!r.degenerate);
}

TEST_CASE("fit_distance_ttest flags zero-variance differences") {
  // identical rows -> identical differences -> degenerate
  Model m = construct_scratch_model(97, 8, kSqToCos, 16);
  for (int i = 1; i < 8; ++i) {
    m.w_a.row(i) = m.w_a.row(0);
    m.w_b.row(i) = m.w_b.row(0);
    m.w_out.row(i) = m.w_out.row(0);
  }
  const NeuronClassification cls = classify_neurons(m);
  const TTestResult r = fit_distance_ttest(m, cls, NeuronSubset::all);
  CHECK(r.degenerate);
}

TEST_CASE("effective bias is zero on constructed models and adds up by hand") {
  Model m = construct_scratch_model(97, 24, kSqToCos, 17);
  const NeuronClassification cls0 = classify_neurons(m);
  REQUIRE(cls0.structured.size() == 24);
  const EffectiveBiasStats zero_stats = effective_bias_stats(m, cls0);
  CHECK(zero_stats.max_abs <= 1e-12);
  CHECK(std::abs(zero_stats.mean) <= 1e-12);

  // bias 0.02, offsets +0.01 on w_a and -0.005 on w_b -> b_eff = 0.025
  m.bias_h[0] = 0.02;
  m.w_a.row(0).array() += 0.01;
  m.w_b.row(0).array() -= 0.005;
  const EffectiveBiasStats stats = effective_bias_stats(m, classify_neurons(m));
  REQUIRE(stats.per_neuron.size() == 24);
  CHECK(stats.per_neuron[0] == doctest::Approx(0.025).epsilon(1e-12));
  CHECK(stats.max_abs == doctest::Approx(0.025).epsilon(1e-12));
}

TEST_CASE("sweep_summary of a single tiny run matches the per-run analyses") {
  TrainConfig cfg;
  cfg.p = 11;
  cfg.n_hidden = 24;
  cfg.train_frac = 0.4;
  cfg.alpha = 0.0;
  cfg.master_seed = 6;
  cfg.eval_every = 50;
  cfg.max_steps = 400;
  cfg.plateau_window = 1000000;
  const RunRecord record = train(cfg);

  const auto rows = sweep_summary({record});
  REQUIRE(rows.size() == 1);
  CHECK(rows[0].alpha == 0.0);

  const SplitDataset data = make_dataset(11, 0.4, 0.0, 6);
  CHECK(rows[0].final_val_acc == evaluate_accuracy(record.final_model.model, data.val));
  const NeuronClassification cls = classify_neurons(record.final_model.model);
  CHECK(rows[0].structured_count == static_cast<int>(cls.structured.size()));
  CHECK(rows[0].mean_periodicity == doctest::Approx(sample_mean(cls.score_a)).epsilon(1e-12));
  CHECK_THROWS_AS(sweep_summary({}), std::invalid_argument);
}
