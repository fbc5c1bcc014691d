#pragma once

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <string>

#include "grokmlp/mlp.hpp"

namespace grokmlp {

enum class WaveKind { square, cosine };

// Parametric replacement for one weight vector:
//   v[j] = offset + amplitude * F(2*pi*frequency*j/p - phase)
// with F = cos for cosine waves and sign(cos(.)) for square waves,
// sign(0) = +1.
struct WaveSpec {
  WaveKind kind = WaveKind::cosine;
  int frequency = 0;
  double phase = 0.0;
  double amplitude = 0.0;
  double offset = 0.0;
};

struct SquareWaveFit {
  WaveSpec wave;  // kind == square
  double upper_median = 0.0;
  double lower_median = 0.0;
};

// (input wave, output wave) pair for idealized models. The three settings
// used throughout are cos->cos, sq->cos and sq->sq.
struct ConstructionSetting {
  WaveKind input_kind = WaveKind::cosine;
  WaveKind output_kind = WaveKind::cosine;
};

inline constexpr ConstructionSetting kCosToCos{WaveKind::cosine, WaveKind::cosine};
inline constexpr ConstructionSetting kSqToCos{WaveKind::square, WaveKind::cosine};
inline constexpr ConstructionSetting kSqToSq{WaveKind::square, WaveKind::square};
inline constexpr std::array<ConstructionSetting, 3> kAllSettings{kCosToCos, kSqToCos, kSqToSq};

std::string setting_name(ConstructionSetting setting);             // "cos-cos" etc.
ConstructionSetting parse_setting(const std::string& name);

// Wave value at (possibly fractional) position t in [0, p).
double wave_value(const WaveSpec& spec, double t, int p);

Eigen::VectorXd synth_wave(const WaveSpec& spec, int p);

// Frequency and phase from the dominant DFT component (no fitting); the
// amplitude and offset place the square wave's levels at the medians of w
// over the positive and negative half-periods.
SquareWaveFit fit_ideal_square_wave(const Eigen::Ref<const Eigen::VectorXd>& w);

// Mean over j of the Euclidean distance from (j, w[j]) to the nearest point
// of the wave sampled at `resolution` points per unit j, both axes in raw
// units. resolution must be >= 10.
double mean_nearest_point_distance(const Eigen::Ref<const Eigen::VectorXd>& w,
                                   const WaveSpec& spec, int resolution = 100);

// Frequency assigned to neuron i in from-scratch construction: cycles
// through [1, (p-1)/2] so every neuron gets a valid nonzero frequency.
int scratch_frequency(int neuron, int p);

// Unit-amplitude wave model with per-neuron random phases phi_a, phi_b and
// output phase phi_a + phi_b; all biases zero.
Model construct_scratch_model(int p, int n_hidden, ConstructionSetting setting,
                              std::uint64_t seed);

struct ExtractionResult {
  Model model;
  int zeroed_neurons = 0;  // neurons lacking a dominant component somewhere
};

// Rebuilds each neuron from its dominant components: frequency from w_a,
// phases from w_a, w_b and w_out respectively; unit amplitude, zero offset,
// zero biases. With use_amplitudes, each wave is scaled by its extracted
// amplitude instead (ablation aid, off by default).
ExtractionResult extract_idealized_model(const Model& trained, ConstructionSetting setting,
                                         bool use_amplitudes = false);

struct ConstructedTableRow {
  int n_hidden = 0;
  ConstructionSetting setting;
  double mean_acc = 0.0;
  double sd_acc = 0.0;
};

// Accuracy of from-scratch models on the full p^2 task, mean and sd over
// seeds 1..n_seeds, one row per (width, setting).
std::vector<ConstructedTableRow> construct_accuracy_table(
    int p, const std::vector<int>& widths, const std::vector<ConstructionSetting>& settings,
    int n_seeds);

}  // namespace grokmlp
