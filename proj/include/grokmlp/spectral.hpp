#pragma once

#include <Eigen/Dense>
#include <complex>
#include <optional>
#include <stdexcept>
#include <vector>

namespace grokmlp {

// Unnormalized forward DFT of a length-p real vector.
struct DftSpectrum {
  std::vector<std::complex<double>> coeff;
  int p = 0;
};

// Dominant non-DC component of a real signal, with the convention
//   w[j] = dc_offset + amplitude * cos(2*pi*frequency*j/p - phase).
struct DominantComponent {
  int frequency = 0;  // in [1, (p-1)/2]
  double phase = 0.0;  // radians in [-pi, pi)
  double amplitude = 0.0;
  double dc_offset = 0.0;
};

class NoDominantComponent : public std::runtime_error {
 public:
  NoDominantComponent() : std::runtime_error("spectrum has no non-DC component") {}
};

class DegenerateCircularData : public std::runtime_error {
 public:
  DegenerateCircularData()
      : std::runtime_error("circular correlation undefined: zero angular spread") {}
};

// Direct O(p^2) evaluation; p is small and prime here so an FFT buys nothing.
DftSpectrum dft(const Eigen::Ref<const Eigen::VectorXd>& w);

// Largest-magnitude bin over k in [1, (p-1)/2], ties to the lowest k.
// Returns nullopt when the non-DC spectrum is zero (flat signal).
std::optional<DominantComponent> try_dominant_component(
    const Eigen::Ref<const Eigen::VectorXd>& w);

// Throwing variant of the above.
DominantComponent dominant_component(const Eigen::Ref<const Eigen::VectorXd>& w);

// Ratio of the dominant non-DC magnitude to the mean non-DC magnitude.
// A flat (zero non-DC) spectrum scores 1.
double periodicity_score(const Eigen::Ref<const Eigen::VectorXd>& w);

double circular_mean(const std::vector<double>& angles);

// Jammalamadaka-SenGupta circular correlation; throws DegenerateCircularData
// when either sample has no angular spread around its circular mean.
double circular_correlation(const std::vector<double>& x, const std::vector<double>& y);

// Wraps to [-pi, pi).
double wrap_angle(double theta);

}  // namespace grokmlp
