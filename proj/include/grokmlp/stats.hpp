#pragma once

#include <vector>

namespace grokmlp {

double log_beta(double a, double b);

// I_x(a, b) via the Lentz continued fraction; x in [0, 1], a, b > 0.
double regularized_incomplete_beta(double x, double a, double b);

double student_t_cdf(double t, double df);

// 2 * P(|T_df| >= |t|) = I_{df/(t^2+df)}(df/2, 1/2).
double student_t_two_sided_p(double t, double df);

struct TTestResult {
  double t = 0.0;
  long df = 0;
  double p_value = 1.0;
  bool p_floored = false;   // true when p underflowed below 1e-300
  bool degenerate = false;  // zero variance in the differences
};

// One-sample t-test of paired differences against zero mean.
TTestResult paired_ttest(const std::vector<double>& diffs);

double sample_mean(const std::vector<double>& xs);
double sample_sd(const std::vector<double>& xs);  // n-1 denominator; 0 for n < 2

}  // namespace grokmlp
