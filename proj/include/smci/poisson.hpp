#pragma once

#include <stdexcept>
#include <vector>

#include "smci/engine.hpp"

namespace smci::poisson {

/// Thrown when a scan cannot vouch for its declared tolerances, e.g. the
/// nuisance grid ceiling still binds after its one allowed extension.
class accuracy_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Lower confidence bound for a Poisson mean at the given one-sided
/// level: the mean at which exactly `level` probability sits at or above
/// the observed count x. Zero when x = 0. Solved by bisection; the cdf
/// residual at the root is below 1e-8.
double bolshev_lower(int x, double level);

/// Matching upper bound: the mean at which `level` probability sits at or
/// below the observed count y.
double bolshev_upper(int y, double level);

/// Naive lower limit for a difference of Poisson means at level
/// 1 - alpha: lower bound on the signal mean minus upper bound on the
/// background mean, each at one-sided level sqrt(1 - alpha).
double naive_limit(int x, int y, double alpha);

/// Smallest signal count whose naive limit against `y` reaches
/// `reference`. Nondecreasing in y.
int threshold_g(int y, double reference, double alpha);

/// Improved lower limit: the naive limit's acceptance ordering is scanned
/// upward from naive_limit(x, y, alpha) in steps of config.delta_step,
/// and the limit is the last grid point where the minimised acceptance
/// probability still reaches 1 - alpha. The background-mean grid spans 50
/// units above its floor in steps of 0.05; if the minimum lands on the
/// moving ceiling the span doubles once, and a second hit raises
/// accuracy_error. Tail sums truncate when the remaining mass drops below
/// config.trunc_mass (dropped mass only lowers the computed probability,
/// so truncation errs conservative).
double improved_limit(int x, int y, double alpha,
                      const engine::ScanConfig& config);

struct PoissonReport {
  int x = 0;
  int y = 0;
  double alpha = 0.0;
  double lower_single = 0.0;   // lower bound for the signal mean alone
  double upper_single = 0.0;   // upper bound for the background mean alone
  double naive = 0.0;          // difference of the two single bounds
  double improved = 0.0;       // scanned improvement, never below naive
  std::vector<int> g_table;    // threshold_g(y') up to the truncation bound
};

PoissonReport improved_report(int x, int y, double alpha,
                              const engine::ScanConfig& config);

}  // namespace smci::poisson
