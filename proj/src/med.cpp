#include "smci/med.hpp"

#include <algorithm>
#include <stdexcept>

#include "smci/barnard.hpp"

namespace smci::med {

void validate(const DoseStudy& study) {
  if (study.doses.empty()) {
    throw std::invalid_argument("a study needs at least one dose arm");
  }
  if (study.control.m < 1) {
    throw std::invalid_argument("control arm size must be positive");
  }
  if (study.control.y < 0 || study.control.y > study.control.m) {
    throw std::invalid_argument("control responders outside [0, m]");
  }
  for (const auto& d : study.doses) {
    if (d.n < 1) throw std::invalid_argument("dose arm size must be positive");
    if (d.x < 0 || d.x > d.n) {
      throw std::invalid_argument("dose responders outside [0, n]");
    }
  }
  if (!(study.delta >= 0.0)) {
    throw std::invalid_argument("skip margin delta must be >= 0");
  }
  if (!(study.alpha >= 0.0 && study.alpha < 1.0)) {
    throw std::invalid_argument("alpha must lie in [0, 1)");
  }
}

const engine::LowerLimitTable& TableCache::table(
    int n, int m, double alpha, const engine::ScanConfig& config) {
  for (const auto& e : entries_) {
    if (e.n == n && e.m == m && e.alpha == alpha && e.config == config) {
      return e.table;
    }
  }
  entries_.push_back(
      {n, m, alpha, config,
       barnard::build_barnard_partition(n, m, alpha, config).table});
  return entries_.back().table;
}

std::vector<double> dose_lower_limits(
    const DoseStudy& study, const engine::ScanConfig& config, TableCache* cache,
    const std::vector<space::OrderedPartition>* overrides) {
  validate(study);
  config.validate();
  if (overrides && !overrides->empty() &&
      overrides->size() != study.doses.size()) {
    throw std::invalid_argument("need one ordering override per dose");
  }

  TableCache local;
  TableCache& tables = cache ? *cache : local;
  std::vector<double> limits;
  limits.reserve(study.doses.size());
  for (size_t i = 0; i < study.doses.size(); ++i) {
    const auto& d = study.doses[i];
    const space::SamplePoint z{d.x, study.control.y};
    if (overrides && !overrides->empty()) {
      const auto fam = engine::binomial_diff_family(d.n, study.control.m);
      const auto t =
          engine::smallest_limits(fam, (*overrides)[i], study.alpha, config);
      limits.push_back(t.lower(z));
    } else {
      limits.push_back(
          tables.table(d.n, study.control.m, study.alpha, config).lower(z));
    }
  }
  return limits;
}

std::vector<bool> rejections_from_limits(const std::vector<double>& limits,
                                         double delta) {
  const size_t k = limits.size();
  std::vector<bool> rej(k, false);
  for (size_t i = 0; i < k; ++i) {
    double suffix_min = limits[i];
    for (size_t j = i + 1; j < k; ++j) {
      suffix_min = std::min(suffix_min, limits[j]);
    }
    rej[i] = suffix_min > delta;
  }
  return rej;
}

MedResult step_down_med(const DoseStudy& study,
                        const engine::ScanConfig& config, TableCache* cache,
                        const std::vector<space::OrderedPartition>* overrides) {
  MedResult res;
  res.dose_limits = dose_lower_limits(study, config, cache, overrides);
  res.rejections = rejections_from_limits(res.dose_limits, study.delta);

  // Independent route: walk down from the top dose while limits clear the
  // margin. Both must give the same upper suffix.
  const int k = static_cast<int>(res.dose_limits.size());
  int lowest = k + 1;  // 1-based dose index of the lowest asserted dose
  for (int i = k; i >= 1; --i) {
    if (res.dose_limits[i - 1] > study.delta) {
      lowest = i;
    } else {
      break;
    }
  }
  for (int i = 1; i <= k; ++i) {
    if (res.rejections[i - 1] != (i >= lowest)) {
      throw std::logic_error("step-down routes disagree");
    }
  }
  res.med = lowest <= k ? lowest : 0;
  return res;
}

}  // namespace smci::med
