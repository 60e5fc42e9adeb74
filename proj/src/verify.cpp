#include "smci/verify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "smci/dist.hpp"

namespace smci::verify {

namespace {

constexpr double kEqualTol = 1e-12;

void check_table_space(const ProblemFamily& family,
                       const LowerLimitTable& table) {
  if (table.n != family.space.n() || table.m != family.space.m() ||
      static_cast<int>(table.point_limits.size()) != family.space.size()) {
    throw std::domain_error("table does not cover the family's space");
  }
}

CoverageProfile profile_of_limits(const ProblemFamily& family,
                                  const std::vector<double>& point_limits,
                                  const ScanConfig& config) {
  const engine::DeltaGrid grid =
      engine::DeltaGrid::over(family.interest, config.delta_step);
  CoverageProfile prof;
  prof.deltas.resize(grid.count);
  prof.coverage.resize(grid.count);
  prof.min_coverage = std::numeric_limits<double>::infinity();
  std::vector<double> buf(family.space.size());
  std::vector<char> covered(family.space.size());
  for (int i = 0; i < grid.count; ++i) {
    const double delta = grid.value(i);
    for (size_t t = 0; t < covered.size(); ++t) {
      covered[t] = point_limits[t] <= delta;
    }
    const engine::NuisanceRow row = engine::NuisanceRow::over(
        family.nuisance_domain(delta), config.nuisance_points);
    double h = std::numeric_limits<double>::infinity();
    for (int k = 0; k < row.count; ++k) {
      family.pmf_all(delta, row.value(k), buf);
      double sum = 0.0;
      for (size_t t = 0; t < buf.size(); ++t) {
        if (covered[t]) sum += buf[t];
      }
      if (sum < h) h = sum;
    }
    prof.deltas[i] = delta;
    prof.coverage[i] = h;
    if (h < prof.min_coverage) {
      prof.min_coverage = h;
      prof.argmin_delta = delta;
    }
  }
  return prof;
}

}  // namespace

ScanConfig verification_defaults() {
  ScanConfig c;
  c.delta_step = 5e-4;
  c.nuisance_points = 2001;
  return c;
}

CoverageProfile coverage_profile(const ProblemFamily& family,
                                 const LowerLimitTable& table,
                                 const ScanConfig& config) {
  config.validate();
  check_table_space(family, table);
  return profile_of_limits(family, table.point_limits, config);
}

DominanceVerdict set_inclusion_compare(const LowerLimitTable& a,
                                       const LowerLimitTable& b) {
  if (a.n != b.n || a.m != b.m) {
    throw std::domain_error("tables live on different spaces");
  }
  const space::SampleSpace s(a.n, a.m);
  DominanceVerdict v;
  for (int i = 0; i < s.size(); ++i) {
    const double la = a.point_limits[i];
    const double lb = b.point_limits[i];
    if (la > lb + kEqualTol && !v.a_strict) v.a_strict = s.points()[i];
    if (lb > la + kEqualTol && !v.b_strict) v.b_strict = s.points()[i];
  }
  if (v.a_strict && v.b_strict) {
    v.verdict = Dominance::Incomparable;
  } else if (v.a_strict) {
    v.verdict = Dominance::ADominates;
  } else if (v.b_strict) {
    v.verdict = Dominance::BDominates;
  } else {
    v.verdict = Dominance::Equal;
  }
  return v;
}

CConditionReport check_c_condition(const LowerLimitTable& table) {
  const space::SampleSpace s(table.n, table.m);
  CConditionReport rep;
  for (int x = 0; x <= table.n; ++x) {
    for (int y = 0; y <= table.m; ++y) {
      const SamplePoint z{x, y};
      if (x + 1 <= table.n) {
        const SamplePoint r{x + 1, y};
        if (table.lower(r) < table.lower(z) - kEqualTol) {
          rep.violations.emplace_back(z, r);
        }
      }
      if (y + 1 <= table.m) {
        const SamplePoint u{x, y + 1};
        if (table.lower(u) > table.lower(z) + kEqualTol) {
          rep.violations.emplace_back(z, u);
        }
      }
    }
  }
  rep.ok = rep.violations.empty();
  return rep;
}

bool maximality_check(const ProblemFamily& family, const LowerLimitTable& table,
                      const space::OrderedPartition& partition, double alpha,
                      double bump, const ScanConfig& config) {
  config.validate();
  check_table_space(family, table);
  if (!(bump > 0.0)) throw std::domain_error("bump must be positive");
  if (partition.block_count() !=
      static_cast<int>(table.block_limits.size())) {
    throw std::domain_error("partition does not match the table's blocks");
  }
  const auto bix = space::block_index_by_point(family.space, partition);
  const double floor = 1.0 - alpha;
  for (size_t j = 0; j < table.block_limits.size(); ++j) {
    const double raised = table.block_limits[j] + bump;
    // A raise past the predecessor's limit leaves the nonincreasing class;
    // only raises that stay inside it can witness slack.
    if (j > 0 && raised > table.block_limits[j - 1] + kEqualTol) continue;
    std::vector<double> bumped = table.point_limits;
    for (size_t t = 0; t < bumped.size(); ++t) {
      if (bix[t] == static_cast<int>(j)) bumped[t] = raised;
    }
    const CoverageProfile prof = profile_of_limits(family, bumped, config);
    if (prof.min_coverage >= floor) return false;  // the block had slack
  }
  return true;
}

namespace {

std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

double uniform01(std::uint64_t seed, std::uint64_t rep, std::uint64_t stream) {
  const std::uint64_t h = mix64(mix64(mix64(seed) ^ rep) ^ stream);
  return static_cast<double>(h >> 11) * 0x1.0p-53;
}

// Smallest count whose cdf reaches u; cdf[last] = 1 > any u in [0, 1).
int draw_from_cdf(const std::vector<double>& cdf, double u) {
  return static_cast<int>(
      std::lower_bound(cdf.begin(), cdf.end(), u) - cdf.begin());
}

std::vector<double> binom_cdf_table(int n, double p) {
  std::vector<double> cdf(n + 1);
  for (int t = 0; t <= n; ++t) {
    cdf[t] = dist::binom_cdf(t, {n, p});
  }
  cdf[n] = 1.0;
  return cdf;
}

}  // namespace

FwerEstimate fwer_simulate(const med::DoseStudy& design,
                           const std::vector<double>& dose_probs,
                           double control_prob, std::uint64_t reps,
                           std::uint64_t seed, const ScanConfig& config,
                           med::TableCache* cache) {
  med::validate(design);
  config.validate();
  if (reps < 1) throw std::invalid_argument("need at least one replicate");
  if (dose_probs.size() != design.doses.size()) {
    throw std::invalid_argument("need one response probability per dose");
  }
  for (double p : dose_probs) {
    if (!(p >= 0.0 && p <= 1.0)) {
      throw std::invalid_argument("probabilities must lie in [0, 1]");
    }
  }
  if (!(control_prob >= 0.0 && control_prob <= 1.0)) {
    throw std::invalid_argument("probabilities must lie in [0, 1]");
  }

  const size_t k = design.doses.size();
  med::TableCache local;
  med::TableCache& tables = cache ? *cache : local;
  std::vector<const engine::LowerLimitTable*> per_dose(k);
  for (size_t i = 0; i < k; ++i) {
    per_dose[i] = &tables.table(design.doses[i].n, design.control.m,
                                design.alpha, config);
  }

  // H_0i holds when every dose at or above i sits within delta of control.
  std::vector<bool> true_null(k);
  for (size_t i = 0; i < k; ++i) {
    double lift = std::numeric_limits<double>::infinity();
    for (size_t j = i; j < k; ++j) {
      lift = std::min(lift, dose_probs[j] - control_prob);
    }
    true_null[i] = lift <= design.delta + kEqualTol;
  }

  const std::vector<double> ccdf =
      binom_cdf_table(design.control.m, control_prob);
  std::vector<std::vector<double>> dcdf(k);
  for (size_t i = 0; i < k; ++i) {
    dcdf[i] = binom_cdf_table(design.doses[i].n, dose_probs[i]);
  }

  std::uint64_t errors = 0;
  std::vector<double> limits(k);
  for (std::uint64_t rep = 0; rep < reps; ++rep) {
    const int y = draw_from_cdf(ccdf, uniform01(seed, rep, 0));
    for (size_t i = 0; i < k; ++i) {
      const int x = draw_from_cdf(dcdf[i], uniform01(seed, rep, i + 1));
      limits[i] = per_dose[i]->lower({x, y});
    }
    const auto rej = med::rejections_from_limits(limits, design.delta);
    for (size_t i = 0; i < k; ++i) {
      if (rej[i] && true_null[i]) {
        ++errors;
        break;
      }
    }
  }

  FwerEstimate est;
  est.errors = errors;
  est.replicates = reps;
  est.seed = seed;
  est.estimate = static_cast<double>(errors) / static_cast<double>(reps);
  est.std_error =
      std::sqrt(est.estimate * (1.0 - est.estimate) / static_cast<double>(reps));
  return est;
}

}  // namespace smci::verify
