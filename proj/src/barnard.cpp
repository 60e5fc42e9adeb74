#include "smci/barnard.hpp"

#include <algorithm>
#include <limits>
#include <stdexcept>

namespace smci::barnard {

namespace {

std::vector<char> mask_of(const SampleSpace& s,
                          const std::vector<SamplePoint>& pts) {
  std::vector<char> mask(s.size(), 0);
  for (const auto& z : pts) mask[s.index_of(z)] = 1;
  return mask;
}

bool marked(const SampleSpace& s, const std::vector<char>& mask, int x, int y) {
  if (x < 0 || x > s.n() || y < 0 || y > s.m()) return false;
  return mask[static_cast<size_t>(x) * (s.m() + 1) + y] != 0;
}

double limit_from_fail(const engine::DeltaGrid& grid,
                       const engine::Interval& range, int fail) {
  if (fail >= grid.count) return range.hi;
  if (fail == 0) return range.lo;
  return grid.value(fail - 1);
}

}  // namespace

std::vector<SamplePoint> neighbor_set(
    const SampleSpace& s, const std::vector<SamplePoint>& accepted) {
  const auto mask = mask_of(s, accepted);
  std::vector<SamplePoint> out;
  for (const auto& z : s.points()) {
    if (marked(s, mask, z.x, z.y)) continue;
    if (marked(s, mask, z.x + 1, z.y) || marked(s, mask, z.x, z.y - 1)) {
      out.push_back(z);
    }
  }
  return out;
}

std::vector<SamplePoint> candidate_set(
    const SampleSpace& s, const std::vector<SamplePoint>& accepted) {
  const auto nbrs = neighbor_set(s, accepted);
  const auto nmask = mask_of(s, nbrs);
  std::vector<SamplePoint> out;
  for (const auto& z : nbrs) {
    if (marked(s, nmask, z.x + 1, z.y) || marked(s, nmask, z.x, z.y - 1)) {
      continue;
    }
    out.push_back(z);
  }
  return out;
}

double provisional_limit(const ProblemFamily& family,
                         const std::vector<SamplePoint>& accepted,
                         const SamplePoint& z0, double alpha,
                         const ScanConfig& config) {
  if (!(alpha >= 0.0 && alpha < 1.0)) {
    throw std::domain_error("alpha must lie in [0, 1)");
  }
  for (const auto& z : accepted) {
    if (z == z0) {
      throw std::invalid_argument("z0 already belongs to the accepted set");
    }
  }
  engine::TailScanner scanner(family, config);
  scanner.exclude(accepted, scanner.grid().count);
  const int fail = scanner.first_failure_with(z0, 1.0 - alpha,
                                              scanner.grid().count);
  return limit_from_fail(scanner.grid(), family.interest, fail);
}

BarnardBuild build_barnard_partition(int n, int m, double alpha,
                                     const ScanConfig& config) {
  if (!(alpha >= 0.0 && alpha < 1.0)) {
    throw std::domain_error("alpha must lie in [0, 1)");
  }
  const ProblemFamily family = engine::binomial_diff_family(n, m);
  const SampleSpace& s = family.space;
  engine::TailScanner scanner(family, config);
  const double threshold = 1.0 - alpha;
  const double tie_tol = config.resolved_tie_tol();

  std::vector<SamplePoint> accepted;
  accepted.reserve(s.size());
  std::vector<Block> blocks;
  std::vector<double> block_limits;
  std::vector<BuildStep> steps;

  int bound = scanner.grid().count;
  Block current{{n, 0}};
  int step_no = 1;
  for (;;) {
    scanner.exclude(current, bound);
    const int fail = scanner.first_failure(threshold, bound);
    if (fail == bound && bound < scanner.grid().count) {
      throw std::logic_error("scan invariant violated: failure row vanished");
    }
    const double limit = limit_from_fail(scanner.grid(), family.interest, fail);
    blocks.push_back(current);
    block_limits.push_back(limit);
    accepted.insert(accepted.end(), current.begin(), current.end());
    bound = std::min(bound, fail + 1);

    BuildStep st;
    st.step = step_no;
    st.block = current;
    st.block_limit = limit;
    st.neighbors = neighbor_set(s, accepted);
    st.candidates = candidate_set(s, accepted);

    if (static_cast<int>(accepted.size()) == s.size()) {
      steps.push_back(std::move(st));
      break;
    }
    if (st.candidates.empty()) {
      // Provably impossible while points remain: the accepted set stays
      // staircase-shaped, so its frontier always has a corner.
      throw std::logic_error("staircase invariant violated: empty candidate "
                             "set before the space was exhausted");
    }

    st.candidate_limits.resize(st.candidates.size());
    double best = -std::numeric_limits<double>::infinity();
    for (size_t i = 0; i < st.candidates.size(); ++i) {
      const int cfail =
          scanner.first_failure_with(st.candidates[i], threshold, bound);
      st.candidate_limits[i] =
          limit_from_fail(scanner.grid(), family.interest, cfail);
      best = std::max(best, st.candidate_limits[i]);
    }

    Block next;
    bool exact = true;
    for (size_t i = 0; i < st.candidates.size(); ++i) {
      if (best - st.candidate_limits[i] <= tie_tol + 1e-12) {
        next.push_back(st.candidates[i]);
        if (st.candidate_limits[i] != best) exact = false;
      }
    }
    st.tie_merged = next.size() > 1 && !exact;
    steps.push_back(std::move(st));
    current = std::move(next);  // candidates were row-major already
    ++step_no;
  }

  BarnardBuild out;
  out.partition = space::explicit_partition(s, blocks);
  out.table = engine::assemble_table(s, out.partition, alpha,
                                     std::move(block_limits),
                                     family.interest.lo);
  out.steps = std::move(steps);
  return out;
}

}  // namespace smci::barnard
