#include "grokmlp/spectral.hpp"

#include <cmath>
#include <numbers>

namespace grokmlp {

namespace {
constexpr double kPi = std::numbers::pi;
}

DftSpectrum dft(const Eigen::Ref<const Eigen::VectorXd>& w) {
  const int p = static_cast<int>(w.size());
  if (p < 2) throw std::invalid_argument("dft: need length >= 2");

  // Exact p-th roots of unity; indexing by (j*k) mod p keeps every trig
  // argument small.
  std::vector<std::complex<double>> roots(static_cast<std::size_t>(p));
  for (int m = 0; m < p; ++m) {
    roots[static_cast<std::size_t>(m)] = std::polar(1.0, -2.0 * kPi * m / p);
  }

  DftSpectrum spectrum;
  spectrum.p = p;
  spectrum.coeff.resize(static_cast<std::size_t>(p));
  for (int k = 0; k < p; ++k) {
    std::complex<double> acc(0.0, 0.0);
    for (int j = 0; j < p; ++j) {
      acc += w[j] * roots[static_cast<std::size_t>((static_cast<long>(j) * k) % p)];
    }
    spectrum.coeff[static_cast<std::size_t>(k)] = acc;
  }
  return spectrum;
}

std::optional<DominantComponent> try_dominant_component(
    const Eigen::Ref<const Eigen::VectorXd>& w) {
  const DftSpectrum spectrum = dft(w);
  const int p = spectrum.p;
  const int k_max = (p - 1) / 2;

  int best_k = 0;
  double best_mag = 0.0;
  for (int k = 1; k <= k_max; ++k) {
    const double mag = std::abs(spectrum.coeff[static_cast<std::size_t>(k)]);
    if (mag > best_mag) {
      best_mag = mag;
      best_k = k;
    }
  }
  // Scale-free degeneracy test: anything at rounding-noise level relative to
  // the DC term counts as a flat signal.
  if (best_k == 0 || best_mag <= 1e-12 * std::abs(spectrum.coeff[0])) return std::nullopt;

  const std::complex<double> c = spectrum.coeff[static_cast<std::size_t>(best_k)];
  DominantComponent dom;
  dom.frequency = best_k;
  dom.phase = wrap_angle(-std::arg(c));
  dom.amplitude = 2.0 * std::abs(c) / p;
  dom.dc_offset = spectrum.coeff[0].real() / p;
  return dom;
}

DominantComponent dominant_component(const Eigen::Ref<const Eigen::VectorXd>& w) {
  auto dom = try_dominant_component(w);
  if (!dom) throw NoDominantComponent();
  return *dom;
}

double periodicity_score(const Eigen::Ref<const Eigen::VectorXd>& w) {
  const DftSpectrum spectrum = dft(w);
  const int p = spectrum.p;
  double max_mag = 0.0;
  double sum_mag = 0.0;
  for (int k = 1; k < p; ++k) {
    const double mag = std::abs(spectrum.coeff[static_cast<std::size_t>(k)]);
    max_mag = std::max(max_mag, mag);
    sum_mag += mag;
  }
  // Same flat-signal rule as try_dominant_component, so a neuron scores 1
  // exactly when it has no dominant component.
  if (max_mag <= 1e-12 * std::abs(spectrum.coeff[0])) return 1.0;
  return max_mag / (sum_mag / (p - 1));
}

double circular_mean(const std::vector<double>& angles) {
  if (angles.empty()) throw std::invalid_argument("circular_mean: empty input");
  double s = 0.0;
  double c = 0.0;
  for (double a : angles) {
    s += std::sin(a);
    c += std::cos(a);
  }
  return std::atan2(s, c);
}

double circular_correlation(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size()) throw std::invalid_argument("circular_correlation: length mismatch");
  if (x.size() < 2) throw std::invalid_argument("circular_correlation: need at least 2 angles");
  const double mx = circular_mean(x);
  const double my = circular_mean(y);
  double num = 0.0;
  double sx2 = 0.0;
  double sy2 = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double sx = std::sin(x[i] - mx);
    const double sy = std::sin(y[i] - my);
    num += sx * sy;
    sx2 += sx * sx;
    sy2 += sy * sy;
  }
  const double n = static_cast<double>(x.size());
  if (sx2 <= n * 1e-24 || sy2 <= n * 1e-24) throw DegenerateCircularData();
  const double r = num / std::sqrt(sx2 * sy2);
  return std::clamp(r, -1.0, 1.0);
}

double wrap_angle(double theta) {
  if (!std::isfinite(theta)) throw std::invalid_argument("wrap_angle: non-finite angle");
  double wrapped = theta - 2.0 * kPi * std::floor((theta + kPi) / (2.0 * kPi));
  if (wrapped < -kPi) wrapped += 2.0 * kPi;
  if (wrapped >= kPi) wrapped -= 2.0 * kPi;
  return wrapped;
}

}  // namespace grokmlp
