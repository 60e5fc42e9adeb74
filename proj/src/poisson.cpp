#include "smci/poisson.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "smci/dist.hpp"

namespace smci::poisson {

namespace {

constexpr double kLambdaSpan = 50.0;  // base width of the background grid
constexpr double kLambdaStep = 0.05;

void check_level(double level) {
  if (!(level > 0.0 && level < 1.0)) {
    throw std::domain_error("level must lie in (0, 1)");
  }
}

void check_alpha(double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw std::domain_error("alpha must lie in (0, 1)");
  }
}

// Solves F(count; mean) = target for the mean; F is decreasing in it.
double cdf_root(int count, double target) {
  double lo = 0.0;
  double hi = std::max(1.0, 2.0 * (count + 1));
  while (dist::pois_cdf(count, {hi}) > target) {
    hi *= 2.0;
    if (hi > 1e12) throw std::logic_error("cdf root bracket runaway");
  }
  // Bisected well past the documented 1e-6 so the cdf residual at the
  // root stays below 1e-8 even where the cdf is flat.
  for (int it = 0; it < 200 && hi - lo > 1e-9; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (dist::pois_cdf(count, {mid}) > target) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

// Memoised naive bounds and the acceptance thresholds g they induce.
class NaiveOrdering {
 public:
  NaiveOrdering(double reference, double level)
      : ref_(reference), level_(level) {}

  int g(int y) {
    while (static_cast<int>(g_.size()) <= y) {
      const int yp = static_cast<int>(g_.size());
      const double u = upper(yp);
      int x = g_.empty() ? 0 : g_.back();  // g is nondecreasing in y
      while (lower(x) - u < ref_) {
        ++x;
        if (x > 10'000'000) {
          throw std::logic_error("threshold search runaway");
        }
      }
      g_.push_back(x);
    }
    return g_[y];
  }

 private:
  double lower(int x) {
    while (static_cast<int>(lx_.size()) <= x) {
      lx_.push_back(bolshev_lower(static_cast<int>(lx_.size()), level_));
    }
    return lx_[x];
  }
  double upper(int y) {
    while (static_cast<int>(uy_.size()) <= y) {
      uy_.push_back(bolshev_upper(static_cast<int>(uy_.size()), level_));
    }
    return uy_[y];
  }

  double ref_;
  double level_;
  std::vector<double> lx_;
  std::vector<double> uy_;
  std::vector<int> g_;
};

// P(signal count < g(background count)) at one (delta, lam2) point. The
// background sum truncates once the remaining tail mass is below
// trunc_mass; the dropped terms are nonnegative, so the value is a lower
// bound on the true probability.
double accept_prob(NaiveOrdering& ord, double delta, double lam2,
                   double trunc_mass, int* max_y) {
  const double lam1 = std::max(0.0, lam2 + delta);
  double py = std::exp(-lam2);
  if (py == 0.0) {
    throw accuracy_error("background mean too large for direct summation");
  }
  double cum = 0.0;
  double total = 0.0;
  double px = std::exp(-lam1);
  double cdf = px;  // F(t; lam1), t below
  int t = 0;
  for (int yp = 0;; ++yp) {
    if (yp > 0) py *= lam2 / yp;
    cum += py;
    const int gy = ord.g(yp);
    if (gy > 0) {
      while (t < gy - 1) {
        ++t;
        px *= lam1 / t;
        cdf += px;
      }
      total += py * (cdf > 1.0 ? 1.0 : cdf);
    }
    if (cum >= 1.0 - trunc_mass) {
      *max_y = std::max(*max_y, yp);
      return total;
    }
    if (yp > 2'000'000) {
      throw std::logic_error("tail truncation runaway");
    }
  }
}

struct RowScan {
  double min = 0.0;
  bool at_ceiling = false;  // minimum sat on the grid's top point
};

RowScan scan_row(NaiveOrdering& ord, double delta, double lam2_lo, double span,
                 double trunc_mass, int* max_y) {
  const int count = static_cast<int>(std::llround(span / kLambdaStep)) + 1;
  double best = std::numeric_limits<double>::infinity();
  int best_k = -1;
  for (int k = 0; k < count; ++k) {
    const double v =
        accept_prob(ord, delta, lam2_lo + k * kLambdaStep, trunc_mass, max_y);
    if (v < best) {
      best = v;
      best_k = k;
    }
  }
  return {best, best_k == count - 1};
}

struct ScanCore {
  double limit = 0.0;
  int y_bound = 0;
};

ScanCore scan_improved(int x, double alpha, const engine::ScanConfig& config,
                       NaiveOrdering& ord, double ref) {
  const double threshold = 1.0 - alpha;
  const double cap = x + 30.0 * std::sqrt(x + 1.0) + 60.0;
  int max_y = 0;
  int row = 0;
  for (;; ++row) {
    const double delta = ref + row * config.delta_step;
    if (delta > cap) {
      throw accuracy_error("improvement scan failed to cross");
    }
    const double lo = std::max(0.0, -delta);
    RowScan rs = scan_row(ord, delta, lo, kLambdaSpan, config.trunc_mass,
                          &max_y);
    if (rs.min >= threshold && rs.at_ceiling) {
      rs = scan_row(ord, delta, lo, 2.0 * kLambdaSpan, config.trunc_mass,
                    &max_y);
      if (rs.min >= threshold && rs.at_ceiling) {
        throw accuracy_error(
            "background grid ceiling still binding after extension");
      }
    }
    if (rs.min < threshold) break;
  }
  ScanCore out;
  out.limit = row == 0 ? ref : ref + (row - 1) * config.delta_step;
  out.y_bound = max_y;
  return out;
}

}  // namespace

double bolshev_lower(int x, double level) {
  if (x < 0) throw std::domain_error("count must be >= 0");
  check_level(level);
  if (x == 0) return 0.0;
  return cdf_root(x - 1, level);
}

double bolshev_upper(int y, double level) {
  if (y < 0) throw std::domain_error("count must be >= 0");
  check_level(level);
  return cdf_root(y, 1.0 - level);
}

double naive_limit(int x, int y, double alpha) {
  check_alpha(alpha);
  const double level = std::sqrt(1.0 - alpha);
  return bolshev_lower(x, level) - bolshev_upper(y, level);
}

int threshold_g(int y, double reference, double alpha) {
  if (y < 0) throw std::domain_error("count must be >= 0");
  check_alpha(alpha);
  const double level = std::sqrt(1.0 - alpha);
  const double u = bolshev_upper(y, level);
  for (int x = 0; x <= 10'000'000; ++x) {
    if (bolshev_lower(x, level) - u >= reference) return x;
  }
  throw std::logic_error("threshold search runaway");
}

double improved_limit(int x, int y, double alpha,
                      const engine::ScanConfig& config) {
  return improved_report(x, y, alpha, config).improved;
}

PoissonReport improved_report(int x, int y, double alpha,
                              const engine::ScanConfig& config) {
  if (x < 0 || y < 0) throw std::domain_error("counts must be >= 0");
  check_alpha(alpha);
  config.validate();

  PoissonReport rep;
  rep.x = x;
  rep.y = y;
  rep.alpha = alpha;
  const double level = std::sqrt(1.0 - alpha);
  rep.lower_single = bolshev_lower(x, level);
  rep.upper_single = bolshev_upper(y, level);
  rep.naive = rep.lower_single - rep.upper_single;

  NaiveOrdering ord(rep.naive, level);
  const ScanCore core = scan_improved(x, alpha, config, ord, rep.naive);
  rep.improved = core.limit;
  rep.g_table.resize(core.y_bound + 1);
  for (int yp = 0; yp <= core.y_bound; ++yp) rep.g_table[yp] = ord.g(yp);
  return rep;
}

}  // namespace smci::poisson
