#include "grokmlp/idealize.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "grokmlp/rng.hpp"
#include "grokmlp/spectral.hpp"

namespace grokmlp {

namespace {

constexpr double kPi = std::numbers::pi;

double median(std::vector<double>& values) {
  const std::size_t n = values.size();
  if (n == 0) throw std::logic_error("median of empty set");
  std::sort(values.begin(), values.end());
  if (n % 2 == 1) return values[n / 2];
  return 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

}  // namespace

std::string setting_name(ConstructionSetting setting) {
  auto part = [](WaveKind k) { return k == WaveKind::square ? "sq" : "cos"; };
  return std::string(part(setting.input_kind)) + "-" + part(setting.output_kind);
}

ConstructionSetting parse_setting(const std::string& name) {
  for (const ConstructionSetting& s : kAllSettings) {
    if (setting_name(s) == name) return s;
  }
  throw std::invalid_argument("unknown setting '" + name + "' (expected cos-cos, sq-cos or sq-sq)");
}

double wave_value(const WaveSpec& spec, double t, int p) {
  const double c = std::cos(2.0 * kPi * spec.frequency * t / p - spec.phase);
  const double f = spec.kind == WaveKind::square ? (c >= 0.0 ? 1.0 : -1.0) : c;
  return spec.offset + spec.amplitude * f;
}

Eigen::VectorXd synth_wave(const WaveSpec& spec, int p) {
  if (p < 2) throw std::invalid_argument("synth_wave: modulus must be >= 2");
  if (spec.kind == WaveKind::square && spec.frequency < 1) {
    throw std::invalid_argument("synth_wave: square waves need frequency >= 1");
  }
  Eigen::VectorXd v(p);
  for (int j = 0; j < p; ++j) v[j] = wave_value(spec, j, p);
  return v;
}

SquareWaveFit fit_ideal_square_wave(const Eigen::Ref<const Eigen::VectorXd>& w) {
  const int p = static_cast<int>(w.size());
  const DominantComponent dom = dominant_component(w);

  std::vector<double> upper;
  std::vector<double> lower;
  for (int j = 0; j < p; ++j) {
    const double c = std::cos(2.0 * kPi * dom.frequency * j / p - dom.phase);
    (c >= 0.0 ? upper : lower).push_back(w[j]);
  }
  // Both half-periods are populated for any k in [1, (p-1)/2] with p prime:
  // the sample phases {2*pi*k*j/p mod 2*pi} cover all p-th roots.
  const double up = median(upper);
  const double lo = median(lower);

  SquareWaveFit fit;
  fit.upper_median = up;
  fit.lower_median = lo;
  fit.wave = WaveSpec{WaveKind::square, dom.frequency, dom.phase, (up - lo) / 2.0,
                      (up + lo) / 2.0};
  return fit;
}

double mean_nearest_point_distance(const Eigen::Ref<const Eigen::VectorXd>& w,
                                   const WaveSpec& spec, int resolution) {
  if (resolution < 10) throw std::invalid_argument("mean_nearest_point_distance: resolution < 10");
  const int p = static_cast<int>(w.size());
  const long n_samples = static_cast<long>(p) * resolution;
  std::vector<double> samples(static_cast<std::size_t>(n_samples));
  for (long m = 0; m < n_samples; ++m) {
    samples[static_cast<std::size_t>(m)] =
        wave_value(spec, static_cast<double>(m) / resolution, p);
  }

  double total = 0.0;
  for (int j = 0; j < p; ++j) {
    const long center = static_cast<long>(j) * resolution;
    double best = std::abs(w[j] - samples[static_cast<std::size_t>(center)]);
    // Any sample farther than `best` along the t axis cannot win.
    for (long d = 1; static_cast<double>(d) / resolution < best; ++d) {
      const double dt = static_cast<double>(d) / resolution;
      for (const long m : {center - d, center + d}) {
        if (m < 0 || m >= n_samples) continue;
        const double dist = std::hypot(dt, w[j] - samples[static_cast<std::size_t>(m)]);
        best = std::min(best, dist);
      }
    }
    total += best;
  }
  return total / p;
}

int scratch_frequency(int neuron, int p) {
  // Cycle i -> (i mod (p-1)) + 1, then fold mirror bins down into
  // [1, (p-1)/2]; every neuron gets a usable frequency and coverage is
  // near-uniform.
  int k = neuron % (p - 1) + 1;
  if (k > (p - 1) / 2) k = p - k;
  return k;
}

Model construct_scratch_model(int p, int n_hidden, ConstructionSetting setting,
                              std::uint64_t seed) {
  if (p < 3) throw std::invalid_argument("construct_scratch_model: modulus must be >= 3");
  if (n_hidden < 1) throw std::invalid_argument("construct_scratch_model: n_hidden must be >= 1");

  Model model;
  model.p = p;
  model.n_hidden = n_hidden;
  model.w_a.resize(n_hidden, p);
  model.w_b.resize(n_hidden, p);
  model.w_out.resize(n_hidden, p);
  model.bias_h = Eigen::VectorXd::Zero(n_hidden);

  Rng rng(derive_seed(seed, Stream::construct));
  for (int i = 0; i < n_hidden; ++i) {
    const int k = scratch_frequency(i, p);
    const double phi_a = rng.uniform(-kPi, kPi);
    const double phi_b = rng.uniform(-kPi, kPi);
    const WaveSpec in_a{setting.input_kind, k, phi_a, 1.0, 0.0};
    const WaveSpec in_b{setting.input_kind, k, phi_b, 1.0, 0.0};
    const WaveSpec out{setting.output_kind, k, phi_a + phi_b, 1.0, 0.0};
    for (int j = 0; j < p; ++j) {
      model.w_a(i, j) = wave_value(in_a, j, p);
      model.w_b(i, j) = wave_value(in_b, j, p);
      model.w_out(i, j) = wave_value(out, j, p);
    }
  }
  return model;
}

ExtractionResult extract_idealized_model(const Model& trained, ConstructionSetting setting,
                                         bool use_amplitudes) {
  ExtractionResult result;
  Model& model = result.model;
  model.p = trained.p;
  model.n_hidden = trained.n_hidden;
  model.w_a = Eigen::MatrixXd::Zero(trained.n_hidden, trained.p);
  model.w_b = Eigen::MatrixXd::Zero(trained.n_hidden, trained.p);
  model.w_out = Eigen::MatrixXd::Zero(trained.n_hidden, trained.p);
  model.bias_h = Eigen::VectorXd::Zero(trained.n_hidden);

  for (int i = 0; i < trained.n_hidden; ++i) {
    const auto dom_a = try_dominant_component(trained.w_a.row(i).transpose());
    const auto dom_b = try_dominant_component(trained.w_b.row(i).transpose());
    const auto dom_out = try_dominant_component(trained.w_out.row(i).transpose());
    if (!dom_a || !dom_b || !dom_out) {
      ++result.zeroed_neurons;  // row stays zero
      continue;
    }
    const int k = dom_a->frequency;  // shared frequency comes from w_a
    const WaveSpec in_a{setting.input_kind, k, dom_a->phase,
                        use_amplitudes ? dom_a->amplitude : 1.0, 0.0};
    const WaveSpec in_b{setting.input_kind, k, dom_b->phase,
                        use_amplitudes ? dom_b->amplitude : 1.0, 0.0};
    const WaveSpec out{setting.output_kind, k, dom_out->phase,
                       use_amplitudes ? dom_out->amplitude : 1.0, 0.0};
    for (int j = 0; j < trained.p; ++j) {
      model.w_a(i, j) = wave_value(in_a, j, trained.p);
      model.w_b(i, j) = wave_value(in_b, j, trained.p);
      model.w_out(i, j) = wave_value(out, j, trained.p);
    }
  }
  return result;
}

std::vector<ConstructedTableRow> construct_accuracy_table(
    int p, const std::vector<int>& widths, const std::vector<ConstructionSetting>& settings,
    int n_seeds) {
  if (widths.empty()) throw std::invalid_argument("construct_accuracy_table: no widths");
  if (n_seeds < 1) throw std::invalid_argument("construct_accuracy_table: n_seeds must be >= 1");
  const std::vector<Triple> task = generate_triples(p);

  std::vector<ConstructedTableRow> rows;
  for (int n_hidden : widths) {
    for (const ConstructionSetting& setting : settings) {
      std::vector<double> accs;
      accs.reserve(static_cast<std::size_t>(n_seeds));
      for (int seed = 1; seed <= n_seeds; ++seed) {
        const Model model =
            construct_scratch_model(p, n_hidden, setting, static_cast<std::uint64_t>(seed));
        accs.push_back(evaluate_accuracy(model, task));
      }
      ConstructedTableRow row;
      row.n_hidden = n_hidden;
      row.setting = setting;
      double sum = 0.0;
      for (double a : accs) sum += a;
      row.mean_acc = sum / static_cast<double>(accs.size());
      double ss = 0.0;
      for (double a : accs) ss += (a - row.mean_acc) * (a - row.mean_acc);
      row.sd_acc = accs.size() > 1 ? std::sqrt(ss / static_cast<double>(accs.size() - 1)) : 0.0;
      rows.push_back(row);
    }
  }
  return rows;
}

}  // namespace grokmlp
