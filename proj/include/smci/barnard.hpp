#pragma once

#include <vector>

#include "smci/engine.hpp"
#include "smci/space.hpp"

namespace smci::barnard {

using engine::LowerLimitTable;
using engine::ProblemFamily;
using engine::ScanConfig;
using space::Block;
using space::OrderedPartition;
using space::SamplePoint;
using space::SampleSpace;

/// Frontier of an accepted staircase set: points outside `accepted` whose
/// right neighbour (x+1, y) or lower neighbour (x, y-1) is accepted.
/// Returned in row-major order.
std::vector<SamplePoint> neighbor_set(const SampleSpace& s,
                                      const std::vector<SamplePoint>& accepted);

/// Corner subset of the frontier: neighbours whose own right and lower
/// neighbours are not frontier points themselves. Only corners keep the
/// accepted set staircase-shaped when moved in.
std::vector<SamplePoint> candidate_set(const SampleSpace& s,
                                       const std::vector<SamplePoint>& accepted);

/// Provisional lower limit of the set `accepted + {z0}`: the limit the
/// partial ordering would emit if z0 joined the accepted set now. z0 must
/// lie outside `accepted`. Standalone full scan, used by tests; the
/// builder evaluates candidates incrementally.
double provisional_limit(const ProblemFamily& family,
                         const std::vector<SamplePoint>& accepted,
                         const SamplePoint& z0, double alpha,
                         const ScanConfig& config);

/// One committed block of the inductive build, with the bookkeeping the
/// trace output reports.
struct BuildStep {
  int step = 0;                           // 1-based block index
  Block block;                            // the block committed at this step
  double block_limit = 0.0;               // its final lower limit
  std::vector<SamplePoint> neighbors;     // frontier after committing
  std::vector<SamplePoint> candidates;    // corner candidates evaluated
  std::vector<double> candidate_limits;   // provisional limit per candidate
  bool tie_merged = false;                // next block merged near-equal ties
};

struct BarnardBuild {
  OrderedPartition partition;
  LowerLimitTable table;
  std::vector<BuildStep> steps;
};

/// Inductive data-driven ordering for the two-binomial lower-limit
/// problem: start from {(n, 0)}, repeatedly evaluate the corner
/// candidates' provisional limits and admit every maximiser within the
/// tie tolerance as the next block. Emits the partition, its limit table
/// and the full per-step trace.
BarnardBuild build_barnard_partition(int n, int m, double alpha,
                                     const ScanConfig& config);

}  // namespace smci::barnard
