#pragma once

#include <vector>

namespace smci::dist {

/// Binomial distribution with a fixed number of trials.
struct BinomSpec {
  int trials = 0;
  double success_prob = 0.0;
};

/// Poisson distribution with nonnegative mean.
struct PoissonSpec {
  double mean = 0.0;
};

/// P(X = x). Computed in log space via lgamma so that extreme
/// probabilities underflow to 0 instead of producing NaN.
/// Endpoint conventions: pmf(x; n, 0) = [x == 0], pmf(x; n, 1) = [x == n].
/// Throws std::domain_error for x outside [0, trials] or success_prob
/// outside [0, 1].
double binom_pmf(int x, const BinomSpec& d);

/// P(X <= x) with clamp semantics: x < 0 gives 0, x >= trials gives 1.
/// Uses compensated summation over pmf terms.
double binom_cdf(int x, const BinomSpec& d);

/// P(X = x) for Poisson. pmf(x; 0) = [x == 0].
/// Throws std::domain_error for x < 0 or negative mean.
double pois_pmf(int x, const PoissonSpec& d);

/// P(X <= x) for Poisson; x < 0 gives 0. Compensated summation.
double pois_cdf(int x, const PoissonSpec& d);

/// z such that P(N(0,1) > z) = alpha, accurate to 1e-9.
/// Throws std::domain_error unless 0 < alpha < 1.
double norm_upper_quantile(double alpha);

/// log C(n, x) for x = 0..n.
std::vector<double> log_binom_coeffs(int n);

}  // namespace smci::dist
