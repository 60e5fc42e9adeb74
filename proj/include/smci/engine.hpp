#pragma once

#include <functional>
#include <span>
#include <vector>

#include "smci/space.hpp"

namespace smci::engine {

using space::OrderedPartition;
using space::SamplePoint;
using space::SampleSpace;

/// Closed interval.
struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  double width() const { return hi - lo; }
};

/// Grid resolution knobs shared by the scan-based constructions.
struct ScanConfig {
  /// Step of the interest-parameter grid.
  double delta_step = 1e-3;
  /// Points of the per-delta nuisance grid (both endpoints included).
  int nuisance_points = 1001;
  /// Crossings closer than this merge as ties; negative means delta_step.
  double tie_tol = -1.0;
  /// Tail mass excluded when a sum over an infinite support is truncated.
  double trunc_mass = 1e-10;

  double resolved_tie_tol() const {
    return tie_tol < 0.0 ? delta_step : tie_tol;
  }
  void validate() const;
  bool operator==(const ScanConfig&) const = default;
};

/// A two-sample testing family: finite outcome lattice, joint pmf
/// parameterised by (interest, nuisance), interest range, and the
/// nuisance domain D(interest).
struct ProblemFamily {
  SampleSpace space;
  /// pmf of one point at (interest, nuisance).
  std::function<double(const SamplePoint&, double, double)> joint_pmf;
  /// Optional fast path: pmf of every point, row-major. Falls back to
  /// looping joint_pmf when absent.
  std::function<void(double, double, std::span<double>)> joint_pmf_all;
  Interval interest;
  std::function<Interval(double)> nuisance_domain;

  void pmf_all(double interest, double nuisance, std::span<double> out) const;
};

/// Difference of two binomial proportions: X ~ Bin(n, p0 + delta),
/// Y ~ Bin(m, p0), delta in [-1, 1], D(delta) = [max(0,-delta),
/// min(1, 1-delta)].
ProblemFamily binomial_diff_family(int n, int m);

/// Uniform grid lo, lo+step, ..., clamped so the final point is exactly hi.
struct DeltaGrid {
  double lo = 0.0;
  double hi = 0.0;
  double step = 0.0;
  int count = 0;

  static DeltaGrid over(const Interval& range, double step);
  double value(int i) const {
    const double v = lo + i * step;
    return v > hi ? hi : v;
  }
};

/// Uniform nuisance grid over one domain, both endpoints included exactly.
/// Every scan in the library goes through this type so that independently
/// written routines probe bit-identical nuisance values.
struct NuisanceRow {
  double lo = 0.0;
  double hi = 0.0;
  double step = 0.0;
  int count = 0;

  static NuisanceRow over(const Interval& domain, int points);
  double value(int k) const {
    if (k == count - 1) return hi;
    const double v = lo + k * step;
    return v > hi ? hi : v;
  }
};

/// The running tail matrix P(excluded set complement) over the
/// (interest grid x nuisance grid) lattice. Each interest row carries its
/// own uniform nuisance grid over D(delta), endpoints included. Blocks
/// are excluded by cellwise subtraction of their pmf.
class TailScanner {
 public:
  TailScanner(const ProblemFamily& family, const ScanConfig& config);

  const DeltaGrid& grid() const { return grid_; }
  int cols() const { return cols_; }
  double nuisance_value(int row, int col) const;
  double cell(int row, int col) const;

  /// Subtracts the points' pmf from rows [0, row_limit).
  void exclude(std::span<const SamplePoint> pts, int row_limit);

  /// Smallest row index in [0, row_limit) whose minimum over the nuisance
  /// grid is < threshold; returns row_limit when no row qualifies.
  int first_failure(double threshold, int row_limit) const;

  /// Same, but with one extra point virtually excluded (its pmf is
  /// subtracted on the fly, the stored matrix is untouched).
  int first_failure_with(const SamplePoint& extra, double threshold,
                         int row_limit) const;

 private:
  double row_min(int row, const SamplePoint* extra) const;

  const ProblemFamily* family_;
  DeltaGrid grid_;
  int cols_ = 0;
  std::vector<NuisanceRow> rows_;  // one nuisance grid per interest row
  std::vector<double> tail_;       // row-major, grid_.count x cols_
};

/// Lower confidence limits, constant on the blocks of an ordered partition
/// and nonincreasing along it.
struct LowerLimitTable {
  int n = 0;
  int m = 0;
  double alpha = 0.0;
  OrderedPartition partition;
  std::vector<double> block_limits;  // one per block
  std::vector<double> point_limits;  // row-major per point

  double lower(const SamplePoint& p) const;
  double min_limit() const;
};

/// Builds the per-point table from per-block limits and checks class
/// membership: constant on blocks, nonincreasing along the partition,
/// minimum equal to interest.lo. Throws std::logic_error on violation.
LowerLimitTable assemble_table(const SampleSpace& s,
                               const OrderedPartition& partition, double alpha,
                               std::vector<double> block_limits,
                               double interest_lo);

/// min over the nuisance grid of P(complement of `excluded`) at `delta`.
/// Reference implementation by direct summation (no caching).
double f_of_delta(const ProblemFamily& family,
                  std::span<const SamplePoint> excluded, double delta,
                  const ScanConfig& config);

/// The smallest one-sided lower-limit table under the given ordered
/// partition: block j's limit is the last grid point Delta such that
/// every grid point Delta' <= Delta keeps f_j(Delta') >= 1 - alpha,
/// where f_j minimises P(complement of the first j blocks) over the
/// nuisance grid. interest.lo when the condition fails at the grid
/// origin, interest.hi when it never fails.
LowerLimitTable smallest_limits(const ProblemFamily& family,
                                const OrderedPartition& partition, double alpha,
                                const ScanConfig& config);

/// Tail probabilities P(complement of `excluded`) on caller-supplied
/// grids. Cells whose nuisance value falls outside D(interest) hold NaN.
struct TailMatrix {
  std::vector<double> interest;
  std::vector<double> nuisance;
  std::vector<double> cells;  // row-major, interest x nuisance

  double at(int i, int k) const {
    return cells[static_cast<size_t>(i) * nuisance.size() + k];
  }
};

TailMatrix tail_matrix(const ProblemFamily& family,
                       std::span<const SamplePoint> excluded,
                       std::span<const double> interest_grid,
                       std::span<const double> nuisance_grid);

}  // namespace smci::engine
