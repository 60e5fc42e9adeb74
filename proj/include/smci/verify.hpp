#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "smci/engine.hpp"
#include "smci/med.hpp"

namespace smci::verify {

using engine::LowerLimitTable;
using engine::ProblemFamily;
using engine::ScanConfig;
using space::SamplePoint;

/// Grid used to re-check tables built on the construction defaults: half
/// the interest step and a nuisance refinement whose points contain the
/// construction points, so verification probes between construction rows
/// without ever skipping one.
ScanConfig verification_defaults();

/// Coverage h(delta) = min over the nuisance grid of the probability that
/// the interval [L(Z), hi] contains delta, per interest grid point.
struct CoverageProfile {
  std::vector<double> deltas;
  std::vector<double> coverage;
  double min_coverage = 1.0;
  double argmin_delta = 0.0;
};

CoverageProfile coverage_profile(const ProblemFamily& family,
                                 const LowerLimitTable& table,
                                 const ScanConfig& config);

enum class Dominance { Equal, ADominates, BDominates, Incomparable };

/// Pointwise comparison of two tables on the same space with 1e-12
/// equality tolerance. A dominates when its limits are everywhere >= B's
/// and strictly larger somewhere; witnesses record one strict point per
/// direction.
struct DominanceVerdict {
  Dominance verdict = Dominance::Equal;
  std::optional<SamplePoint> a_strict;  // L_A > L_B here
  std::optional<SamplePoint> b_strict;  // L_B > L_A here
};

DominanceVerdict set_inclusion_compare(const LowerLimitTable& a,
                                       const LowerLimitTable& b);

/// Componentwise monotonicity on the lattice: limits nondecreasing in x
/// at fixed y and nonincreasing in y at fixed x. Violations list the
/// offending adjacent pairs.
struct CConditionReport {
  bool ok = true;
  std::vector<std::pair<SamplePoint, SamplePoint>> violations;
};

CConditionReport check_c_condition(const LowerLimitTable& table);

/// True when no single block's limit can be raised by `bump` without the
/// coverage minimum dropping below 1 - alpha. Blocks whose raised limit
/// would exceed their predecessor's are skipped: such a bump leaves the
/// nonincreasing class entirely, so it cannot witness slack.
bool maximality_check(const ProblemFamily& family, const LowerLimitTable& table,
                      const space::OrderedPartition& partition, double alpha,
                      double bump, const ScanConfig& config);

/// Monte-Carlo familywise error estimate for the step-down procedure.
struct FwerEstimate {
  double estimate = 0.0;
  double std_error = 0.0;
  std::uint64_t errors = 0;      // replicates asserting a true null
  std::uint64_t replicates = 0;
  std::uint64_t seed = 0;
};

/// Simulates `reps` studies shaped like `design` (its observed counts are
/// ignored) with the given true response probabilities, runs the
/// step-down assertions, and counts replicates asserting any dose i whose
/// null holds, i.e. min over j >= i of p_j - p_0 is <= design.delta.
/// Draws come from a counter-based generator keyed by (seed, replicate,
/// dose index) with the control on stream 0, so results are reproducible
/// bit for bit regardless of evaluation order.
FwerEstimate fwer_simulate(const med::DoseStudy& design,
                           const std::vector<double>& dose_probs,
                           double control_prob, std::uint64_t reps,
                           std::uint64_t seed, const ScanConfig& config,
                           med::TableCache* cache = nullptr);

}  // namespace smci::verify
