#pragma once

#include "smci/engine.hpp"
#include "smci/space.hpp"

namespace smci::inversion {

using engine::LowerLimitTable;
using engine::ProblemFamily;
using engine::ScanConfig;
using space::OrderedPartition;

/// Size of the accepted prefix at `delta`: the largest n such that the
/// level-alpha prefix test of the first n blocks accepts every grid point
/// delta' <= delta, i.e. sup over those grid points and the nuisance grid
/// of P(union of blocks 1..n) stays <= alpha. Zero when even the first
/// block's test rejects.
int s_delta(const ProblemFamily& family, const OrderedPartition& partition,
            double delta, double alpha, const ScanConfig& config);

/// Lower limits by direct test inversion: block i's limit is the smallest
/// grid delta at which the prefix test of blocks 1..i rejects (the upper
/// interest endpoint when it never rejects). Evaluates every tail
/// probability by pointwise summation on the same grids as the scan
/// engine but shares no state with it, so the two routes cross-check one
/// another; their conventions differ by at most one grid step.
LowerLimitTable invert_tests(const ProblemFamily& family,
                             const OrderedPartition& partition, double alpha,
                             const ScanConfig& config);

}  // namespace smci::inversion
