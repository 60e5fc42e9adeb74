#pragma once

#include <vector>

#include "smci/engine.hpp"

namespace smci::med {

/// One dose arm: x responders out of n.
struct DoseObservation {
  int x = 0;
  int n = 0;
};

/// Shared control arm: y responders out of m.
struct ControlObservation {
  int y = 0;
  int m = 0;
};

/// A dose-finding study: k >= 1 ordered dose arms against one control,
/// a skip margin delta >= 0 and the familywise level alpha.
struct DoseStudy {
  std::vector<DoseObservation> doses;  // index 0 is dose 1
  ControlObservation control;
  double delta = 0.0;
  double alpha = 0.05;
};

void validate(const DoseStudy& study);

/// Memoises one lower-limit table per (n, m, alpha, config) shape so a
/// study with equal-sized arms builds its table once.
class TableCache {
 public:
  const engine::LowerLimitTable& table(int n, int m, double alpha,
                                       const engine::ScanConfig& config);

 private:
  struct Entry {
    int n;
    int m;
    double alpha;
    engine::ScanConfig config;
    engine::LowerLimitTable table;
  };
  std::vector<Entry> entries_;
};

/// Per-dose lower confidence limits for p_i - p_0, each from the
/// data-driven ordering of that arm's shape. `overrides`, when nonempty,
/// supplies one explicit ordered partition per dose instead.
std::vector<double> dose_lower_limits(
    const DoseStudy& study, const engine::ScanConfig& config,
    TableCache* cache = nullptr,
    const std::vector<space::OrderedPartition>* overrides = nullptr);

/// Step-down rejections from per-dose limits: dose i is asserted when
/// min over j >= i of L_j exceeds delta (strictly). The asserted set is
/// always an upper suffix of the doses.
std::vector<bool> rejections_from_limits(const std::vector<double>& limits,
                                         double delta);

struct MedResult {
  std::vector<double> dose_limits;
  std::vector<bool> rejections;  // dose i at index i-1
  int med = 0;                   // smallest asserted dose, 0 when none
};

/// Runs the closed step-down procedure and cross-checks the suffix-walk
/// shortcut against the definition (std::logic_error on disagreement).
MedResult step_down_med(
    const DoseStudy& study, const engine::ScanConfig& config,
    TableCache* cache = nullptr,
    const std::vector<space::OrderedPartition>* overrides = nullptr);

}  // namespace smci::med
