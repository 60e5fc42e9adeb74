#include "smci/dist.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace smci::dist {

namespace {

void check_binom(const BinomSpec& d) {
  if (d.trials < 0) {
    throw std::domain_error("binomial trials must be nonnegative");
  }
  if (!(d.success_prob >= 0.0 && d.success_prob <= 1.0)) {
    throw std::domain_error("binomial success probability must lie in [0, 1]");
  }
}

}  // namespace

double binom_pmf(int x, const BinomSpec& d) {
  check_binom(d);
  if (x < 0 || x > d.trials) {
    throw std::domain_error("binomial pmf argument outside [0, trials]");
  }
  const int n = d.trials;
  const double p = d.success_prob;
  if (p == 0.0) return x == 0 ? 1.0 : 0.0;
  if (p == 1.0) return x == n ? 1.0 : 0.0;
  const double logc = std::lgamma(n + 1.0) - std::lgamma(x + 1.0) -
                      std::lgamma(n - x + 1.0);
  return std::exp(logc + x * std::log(p) + (n - x) * std::log1p(-p));
}

double binom_cdf(int x, const BinomSpec& d) {
  check_binom(d);
  if (x < 0) return 0.0;
  if (x >= d.trials) return 1.0;
  // Kahan summation; the individual terms are nonnegative.
  double sum = 0.0, carry = 0.0;
  for (int k = 0; k <= x; ++k) {
    const double term = binom_pmf(k, d) - carry;
    const double next = sum + term;
    carry = (next - sum) - term;
    sum = next;
  }
  return sum < 1.0 ? sum : 1.0;
}

double pois_pmf(int x, const PoissonSpec& d) {
  if (!(d.mean >= 0.0)) {
    throw std::domain_error("Poisson mean must be nonnegative");
  }
  if (x < 0) {
    throw std::domain_error("Poisson pmf argument must be nonnegative");
  }
  if (d.mean == 0.0) return x == 0 ? 1.0 : 0.0;
  return std::exp(-d.mean + x * std::log(d.mean) - std::lgamma(x + 1.0));
}

double pois_cdf(int x, const PoissonSpec& d) {
  if (!(d.mean >= 0.0)) {
    throw std::domain_error("Poisson mean must be nonnegative");
  }
  if (x < 0) return 0.0;
  if (d.mean == 0.0) return 1.0;
  // Recurrence in linear space with Kahan accumulation; terms stay
  // well inside double range for the means this library touches.
  double term = std::exp(-d.mean);
  double sum = 0.0, carry = 0.0;
  for (int k = 0; k <= x; ++k) {
    if (k > 0) term *= d.mean / k;
    const double t = term - carry;
    const double next = sum + t;
    carry = (next - sum) - t;
    sum = next;
  }
  return sum < 1.0 ? sum : 1.0;
}

double norm_upper_quantile(double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw std::domain_error("norm_upper_quantile requires 0 < alpha < 1");
  }
  // Upper tail P(Z > z) = erfc(z / sqrt(2)) / 2, strictly decreasing in z.
  const auto upper_tail = [](double z) {
    return 0.5 * std::erfc(z * 0.7071067811865475244);
  };
  double lo = -40.0, hi = 40.0;
  for (int it = 0; it < 200 && hi - lo > 1e-12; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (upper_tail(mid) > alpha) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

std::vector<double> log_binom_coeffs(int n) {
  if (n < 0) throw std::domain_error("log_binom_coeffs requires n >= 0");
  std::vector<double> out(n + 1);
  const double logn = std::lgamma(n + 1.0);
  for (int x = 0; x <= n; ++x) {
    out[x] = logn - std::lgamma(x + 1.0) - std::lgamma(n - x + 1.0);
  }
  return out;
}

}  // namespace smci::dist
