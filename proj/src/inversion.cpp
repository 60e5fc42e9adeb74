#include "smci/inversion.hpp"

#include <stdexcept>
#include <vector>

namespace smci::inversion {

using engine::DeltaGrid;
using engine::NuisanceRow;
using space::SamplePoint;

namespace {

void check_partition(const ProblemFamily& family,
                     const OrderedPartition& partition) {
  size_t npts = 0;
  for (const auto& b : partition.blocks) npts += b.size();
  const auto bix = space::block_index_by_point(family.space, partition);
  if (npts != bix.size()) {
    throw std::invalid_argument("partition must cover the space exactly once");
  }
  for (int v : bix) {
    if (v < 0) {
      throw std::invalid_argument(
          "partition must cover the space exactly once");
    }
  }
}

// P(prefix) at one (delta, nuisance) point by plain summation.
double prefix_prob(const ProblemFamily& family,
                   const std::vector<SamplePoint>& prefix, double delta,
                   double p0) {
  double sum = 0.0;
  for (const auto& z : prefix) sum += family.joint_pmf(z, delta, p0);
  return sum;
}

// True when the prefix test rejects somewhere on the row's nuisance grid.
bool row_rejects(const ProblemFamily& family,
                 const std::vector<SamplePoint>& prefix, double delta,
                 double alpha, int nuisance_points) {
  const NuisanceRow row =
      NuisanceRow::over(family.nuisance_domain(delta), nuisance_points);
  for (int k = 0; k < row.count; ++k) {
    if (prefix_prob(family, prefix, delta, row.value(k)) > alpha) return true;
  }
  return false;
}

}  // namespace

int s_delta(const ProblemFamily& family, const OrderedPartition& partition,
            double delta, double alpha, const ScanConfig& config) {
  config.validate();
  if (!(alpha >= 0.0 && alpha < 1.0)) {
    throw std::domain_error("alpha must lie in [0, 1)");
  }
  if (!(delta >= family.interest.lo && delta <= family.interest.hi)) {
    throw std::domain_error("delta outside the interest range");
  }
  check_partition(family, partition);

  const DeltaGrid grid = DeltaGrid::over(family.interest, config.delta_step);
  std::vector<SamplePoint> prefix;
  for (int nblocks = 1; nblocks <= partition.block_count(); ++nblocks) {
    const auto& b = partition.blocks[nblocks - 1];
    prefix.insert(prefix.end(), b.begin(), b.end());
    for (int i = 0; i < grid.count && grid.value(i) <= delta + 1e-12; ++i) {
      if (row_rejects(family, prefix, grid.value(i), alpha,
                      config.nuisance_points)) {
        return nblocks - 1;
      }
    }
  }
  return partition.block_count();
}

LowerLimitTable invert_tests(const ProblemFamily& family,
                             const OrderedPartition& partition, double alpha,
                             const ScanConfig& config) {
  config.validate();
  if (!(alpha >= 0.0 && alpha < 1.0)) {
    throw std::domain_error("alpha must lie in [0, 1)");
  }
  check_partition(family, partition);

  const DeltaGrid grid = DeltaGrid::over(family.interest, config.delta_step);
  std::vector<SamplePoint> prefix;
  std::vector<double> limits;
  limits.reserve(partition.block_count());
  // P(prefix) only grows with the block index, so each prefix's first
  // rejection row sits at or below the previous one; rows above the
  // previous crossing need never be revisited.
  int cap = grid.count;
  for (const auto& block : partition.blocks) {
    prefix.insert(prefix.end(), block.begin(), block.end());
    int cross = cap;
    for (int i = 0; i < cap; ++i) {
      if (row_rejects(family, prefix, grid.value(i), alpha,
                      config.nuisance_points)) {
        cross = i;
        break;
      }
    }
    limits.push_back(cross >= grid.count ? family.interest.hi
                                         : grid.value(cross));
    cap = cross;
  }
  return engine::assemble_table(family.space, partition, alpha,
                                std::move(limits), family.interest.lo);
}

}  // namespace smci::inversion
