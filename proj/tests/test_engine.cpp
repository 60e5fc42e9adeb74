#include <doctest.h>

#include <cmath>
#include <span>
#include <stdexcept>
#include <vector>

#include "smci/dist.hpp"
#include "smci/engine.hpp"
#include "smci/space.hpp"

using namespace smci;
using namespace smci::engine;

namespace {

const ScanConfig kCoarse{0.01, 101, -1.0, 1e-10};

// Direct tail sum, written independently of the scanner's running matrix.
double direct_tail(const ProblemFamily& fam,
                   const std::vector<SamplePoint>& excluded, double delta,
                   double nuisance) {
  double sum = 0.0;
  for (const auto& pt : fam.space.points()) {
    bool out = false;
    for (const auto& e : excluded) out = out || (e == pt);
    if (!out) sum += fam.joint_pmf(pt, delta, nuisance);
  }
  return sum;
}

// Reference limits: per block, scan the interest grid from the left and
// evaluate f via f_of_delta (direct summation) at every row.
std::vector<double> reference_limits(const ProblemFamily& fam,
                                     const space::OrderedPartition& part,
                                     double alpha, const ScanConfig& config) {
  const auto grid = DeltaGrid::over(fam.interest, config.delta_step);
  std::vector<SamplePoint> prefix;
  std::vector<double> limits;
  for (const auto& block : part.blocks) {
    prefix.insert(prefix.end(), block.begin(), block.end());
    int fail = grid.count;
    for (int i = 0; i < grid.count; ++i) {
      if (f_of_delta(fam, prefix, grid.value(i), config) < 1.0 - alpha) {
        fail = i;
        break;
      }
    }
    if (fail >= grid.count) {
      limits.push_back(fam.interest.hi);
    } else if (fail == 0) {
      limits.push_back(fam.interest.lo);
    } else {
      limits.push_back(grid.value(fail - 1));
    }
  }
  return limits;
}

}  // namespace

TEST_SUITE("engine") {

TEST_CASE("ScanConfig validation") {
  CHECK_NOTHROW(ScanConfig{}.validate());
  CHECK_THROWS_AS((ScanConfig{0.0, 101}.validate()), std::domain_error);
  CHECK_THROWS_AS((ScanConfig{-1e-3, 101}.validate()), std::domain_error);
  CHECK_THROWS_AS((ScanConfig{1e-3, 1}.validate()), std::domain_error);
  CHECK_THROWS_AS((ScanConfig{1e-3, 101, -1.0, -1e-3}.validate()),
                  std::domain_error);
  const ScanConfig nan_tie{1e-3, 101, std::nan(""), 1e-10};
  CHECK_THROWS_AS(nan_tie.validate(), std::domain_error);
  CHECK((ScanConfig{1e-3, 101, -5.0}.resolved_tie_tol()) == 1e-3);
  CHECK((ScanConfig{1e-3, 101, 0.25}.resolved_tie_tol()) == 0.25);
}

TEST_CASE("DeltaGrid covers the interval and ends exactly at hi") {
  const auto g = DeltaGrid::over({-1.0, 1.0}, 0.25);
  CHECK(g.count == 9);
  CHECK(g.value(0) == -1.0);
  CHECK(g.value(4) == doctest::Approx(0.0));
  CHECK(g.value(g.count - 1) == 1.0);
  // A step that does not divide the width still lands exactly on hi.
  const auto h = DeltaGrid::over({0.0, 1.0}, 0.3);
  CHECK(h.value(h.count - 1) == 1.0);
  CHECK(h.value(0) == 0.0);
  for (int i = 1; i < h.count; ++i) CHECK(h.value(i) > h.value(i - 1));
}

TEST_CASE("NuisanceRow endpoints are exact") {
  const auto r = NuisanceRow::over({0.25, 0.75}, 11);
  CHECK(r.count == 11);
  CHECK(r.value(0) == 0.25);
  CHECK(r.value(10) == 0.75);
  for (int k = 1; k < r.count; ++k) CHECK(r.value(k) >= r.value(k - 1));
  // Degenerate domain: every point is the single admissible value.
  const auto d = NuisanceRow::over({0.4, 0.4}, 5);
  for (int k = 0; k < 5; ++k) CHECK(d.value(k) == 0.4);
  CHECK_THROWS_AS(NuisanceRow::over({0.0, 1.0}, 1), std::domain_error);
  CHECK_THROWS_AS(NuisanceRow::over({0.5, 0.2}, 11), std::domain_error);
}

TEST_CASE("binomial family: pmf sums to one and respects the domain") {
  const auto fam = binomial_diff_family(3, 2);
  CHECK(fam.interest.lo == -1.0);
  CHECK(fam.interest.hi == 1.0);
  for (double delta : {-0.6, 0.0, 0.35}) {
    const auto dom = fam.nuisance_domain(delta);
    CHECK(dom.lo == doctest::Approx(std::max(0.0, -delta)));
    CHECK(dom.hi == doctest::Approx(std::min(1.0, 1.0 - delta)));
    for (double t : {0.0, 0.33, 1.0}) {
      const double p0 = dom.lo + t * (dom.hi - dom.lo);
      double sum = 0.0;
      for (const auto& pt : fam.space.points())
        sum += fam.joint_pmf(pt, delta, p0);
      CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
      // The bulk path must agree with the pointwise pmf.
      std::vector<double> bulk(fam.space.size());
      fam.pmf_all(delta, p0, bulk);
      for (const auto& pt : fam.space.points()) {
        CHECK(bulk[fam.space.index_of(pt)] ==
              doctest::Approx(fam.joint_pmf(pt, delta, p0)).epsilon(1e-13));
      }
    }
  }
}

TEST_CASE("joint pmf factorises as Bin(n, p0+delta) x Bin(m, p0)") {
  const auto fam = binomial_diff_family(4, 1);
  const double delta = -0.3, p0 = 0.7;
  for (const auto& pt : fam.space.points()) {
    const double want = dist::binom_pmf(pt.x, {4, p0 + delta}) *
                        dist::binom_pmf(pt.y, {1, p0});
    CHECK(fam.joint_pmf(pt, delta, p0) == doctest::Approx(want).epsilon(1e-13));
  }
}

TEST_CASE("scanner cells equal direct summation after exclusions") {
  const auto fam = binomial_diff_family(3, 2);
  TailScanner scan(fam, kCoarse);
  const std::vector<SamplePoint> first = {{3, 0}};
  const std::vector<SamplePoint> second = {{2, 0}, {3, 1}};
  scan.exclude(first, scan.grid().count);
  scan.exclude(second, scan.grid().count);
  std::vector<SamplePoint> all = first;
  all.insert(all.end(), second.begin(), second.end());
  for (int row : {0, 57, 100, scan.grid().count - 1}) {
    for (int col : {0, 13, kCoarse.nuisance_points - 1}) {
      const double delta = scan.grid().value(row);
      const double p0 = scan.nuisance_value(row, col);
      CHECK(scan.cell(row, col) ==
            doctest::Approx(direct_tail(fam, all, delta, p0)).epsilon(1e-10));
    }
  }
}

TEST_CASE("first_failure_with matches a real exclusion") {
  const auto fam = binomial_diff_family(3, 2);
  const double threshold = 0.95;
  TailScanner probe(fam, kCoarse);
  const std::vector<SamplePoint> head = {{3, 0}};
  probe.exclude(head, probe.grid().count);
  const int virt = probe.first_failure_with({2, 0}, threshold,
                                            probe.grid().count);
  TailScanner real(fam, kCoarse);
  const std::vector<SamplePoint> both = {{3, 0}, {2, 0}};
  real.exclude(both, real.grid().count);
  CHECK(virt == real.first_failure(threshold, real.grid().count));
}

TEST_CASE("f_of_delta: published crossing of the first 4x1 block") {
  const auto fam = binomial_diff_family(4, 1);
  const ScanConfig def{};
  const std::vector<SamplePoint> s1 = {{4, 0}};
  // The first block's limit is -0.095 at the default resolution: f stays
  // at or above 0.95 there and drops below one step later.
  CHECK(f_of_delta(fam, s1, -0.095, def) >= 0.95);
  CHECK(f_of_delta(fam, s1, -0.094, def) < 0.95);
}

TEST_CASE("smallest_limits agrees with the direct reference on 3x2") {
  const auto fam = binomial_diff_family(3, 2);
  const auto part = space::partition_from_scores(fam.space,
                                                 space::zstat_scores(fam.space));
  const auto table = smallest_limits(fam, part, 0.1, kCoarse);
  const auto want = reference_limits(fam, part, 0.1, kCoarse);
  REQUIRE(table.block_limits.size() == want.size());
  for (size_t j = 0; j < want.size(); ++j) {
    CHECK(table.block_limits[j] == want[j]);
  }
}

TEST_CASE("limits are nonincreasing and end at the lower endpoint") {
  const auto fam = binomial_diff_family(4, 1);
  const auto part = space::partition_from_scores(fam.space,
                                                 space::zstat_scores(fam.space));
  for (double alpha : {0.05, 0.2}) {
    const auto table = smallest_limits(fam, part, alpha, kCoarse);
    for (size_t j = 1; j < table.block_limits.size(); ++j) {
      CHECK(table.block_limits[j] <= table.block_limits[j - 1]);
    }
    CHECK(table.block_limits.back() == -1.0);
    CHECK(table.min_limit() == -1.0);
    // Point limits are constant on blocks.
    for (int b = 0; b < part.block_count(); ++b) {
      for (const auto& pt : part.blocks[b]) {
        CHECK(table.lower(pt) == table.block_limits[b]);
      }
    }
  }
}

TEST_CASE("assemble_table rejects class violations") {
  const auto fam = binomial_diff_family(2, 1);
  const auto part = space::partition_from_scores(fam.space,
                                                 space::zstat_scores(fam.space));
  const auto k = part.block_count();
  std::vector<double> good(k, -1.0);
  good[0] = -0.5;
  CHECK_NOTHROW(assemble_table(fam.space, part, 0.05, good, -1.0));
  std::vector<double> increasing(k, -1.0);
  increasing[0] = -0.9;
  if (k > 1) increasing[1] = -0.5;
  CHECK_THROWS_AS(assemble_table(fam.space, part, 0.05, increasing, -1.0),
                  std::logic_error);
  std::vector<double> short_min(k, -0.5);
  CHECK_THROWS_AS(assemble_table(fam.space, part, 0.05, short_min, -1.0),
                  std::logic_error);
  std::vector<double> wrong_count(k + 1, -1.0);
  CHECK_THROWS_AS(assemble_table(fam.space, part, 0.05, wrong_count, -1.0),
                  std::logic_error);
}

TEST_CASE("tail_matrix marks out-of-domain cells and matches direct sums") {
  const auto fam = binomial_diff_family(2, 1);
  const std::vector<SamplePoint> excl = {{2, 0}};
  const std::vector<double> interest = {-0.5, 0.0, 0.5};
  const std::vector<double> nuisance = {0.0, 0.25, 0.6, 1.0};
  const auto mat = tail_matrix(fam, excl, interest, nuisance);
  for (size_t i = 0; i < interest.size(); ++i) {
    const auto dom = fam.nuisance_domain(interest[i]);
    for (size_t k = 0; k < nuisance.size(); ++k) {
      const double v = mat.at(static_cast<int>(i), static_cast<int>(k));
      if (nuisance[k] < dom.lo || nuisance[k] > dom.hi) {
        CHECK(std::isnan(v));
      } else {
        CHECK(v == doctest::Approx(direct_tail(fam, excl, interest[i],
                                               nuisance[k]))
                       .epsilon(1e-12));
      }
    }
  }
}

}  // TEST_SUITE
