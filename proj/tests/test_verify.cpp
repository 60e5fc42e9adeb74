#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "smci/engine.hpp"
#include "smci/med.hpp"
#include "smci/space.hpp"
#include "smci/verify.hpp"

using namespace smci;
using namespace smci::verify;

namespace {

const ScanConfig kCoarse{0.01, 101, -1.0, 1e-10};

engine::LowerLimitTable coarse_table(int n, int m, double alpha) {
  const auto fam = engine::binomial_diff_family(n, m);
  const auto part = space::partition_from_scores(fam.space,
                                                 space::zstat_scores(fam.space));
  return engine::smallest_limits(fam, part, alpha, kCoarse);
}

}  // namespace

TEST_SUITE("verify") {

TEST_CASE("verification grid interleaves the construction grid") {
  const auto v = verification_defaults();
  CHECK(v.delta_step == 0.0005);
  CHECK(v.nuisance_points == 2001);
  // Halving the construction step keeps every construction point exact:
  // lo + 2k * (step/2) is bit-identical to lo + k * step.
  const auto fine = engine::DeltaGrid::over({-1.0, 1.0}, v.delta_step);
  const auto base = engine::DeltaGrid::over({-1.0, 1.0}, 0.001);
  for (int i = 0; i < base.count; ++i) {
    CHECK(fine.value(2 * i) == base.value(i));
  }
}

TEST_CASE("coverage of a constructed table holds on its own grid") {
  const auto fam = engine::binomial_diff_family(3, 2);
  const auto table = coarse_table(3, 2, 0.1);
  const auto prof = coverage_profile(fam, table, kCoarse);
  CHECK(prof.deltas.size() == prof.coverage.size());
  CHECK(prof.min_coverage >= 0.9 - 1e-9);
  // min/argmin are consistent with the stored profile.
  double lowest = 2.0;
  double at = 0.0;
  for (size_t i = 0; i < prof.deltas.size(); ++i) {
    if (prof.coverage[i] < lowest) {
      lowest = prof.coverage[i];
      at = prof.deltas[i];
    }
  }
  CHECK(prof.min_coverage == lowest);
  CHECK(prof.argmin_delta == at);
}

TEST_CASE("coverage profile equals direct enumeration on a tiny design") {
  const auto fam = engine::binomial_diff_family(2, 1);
  const auto table = coarse_table(2, 1, 0.1);
  const ScanConfig tiny{0.05, 21, -1.0, 1e-10};
  const auto prof = coverage_profile(fam, table, tiny);
  const auto grid = engine::DeltaGrid::over(fam.interest, tiny.delta_step);
  REQUIRE(static_cast<int>(prof.deltas.size()) == grid.count);
  for (int i = 0; i < grid.count; ++i) {
    const double delta = grid.value(i);
    CHECK(prof.deltas[i] == delta);
    const auto row = engine::NuisanceRow::over(fam.nuisance_domain(delta),
                                               tiny.nuisance_points);
    double min_cov = 2.0;
    for (int k = 0; k < row.count; ++k) {
      double cov = 0.0;
      for (const auto& pt : fam.space.points()) {
        if (table.lower(pt) <= delta) {
          cov += fam.joint_pmf(pt, delta, row.value(k));
        }
      }
      min_cov = std::min(min_cov, cov);
    }
    CHECK(prof.coverage[i] == doctest::Approx(min_cov).epsilon(1e-12));
  }
}

TEST_CASE("coverage_profile rejects a table from another space") {
  const auto fam = engine::binomial_diff_family(3, 2);
  const auto table = coarse_table(2, 1, 0.1);
  CHECK_THROWS_AS(coverage_profile(fam, table, kCoarse), std::domain_error);
}

TEST_CASE("set inclusion verdicts") {
  const auto a = coarse_table(2, 1, 0.1);
  auto b = a;
  CHECK(set_inclusion_compare(a, b).verdict == Dominance::Equal);
  // Raising one point makes a table dominant.
  b.point_limits[0] += 0.05;
  const auto v1 = set_inclusion_compare(b, a);
  CHECK(v1.verdict == Dominance::ADominates);
  REQUIRE(v1.a_strict.has_value());
  CHECK(*v1.a_strict == SamplePoint{0, 0});
  CHECK_FALSE(v1.b_strict.has_value());
  const auto v2 = set_inclusion_compare(a, b);
  CHECK(v2.verdict == Dominance::BDominates);
  // Opposite strict points in the two directions: incomparable.
  auto c = a;
  c.point_limits[0] += 0.05;
  c.point_limits[1] -= 0.05;
  const auto v3 = set_inclusion_compare(c, a);
  CHECK(v3.verdict == Dominance::Incomparable);
  REQUIRE(v3.a_strict.has_value());
  REQUIRE(v3.b_strict.has_value());
  CHECK(*v3.a_strict == SamplePoint{0, 0});
  CHECK(*v3.b_strict == SamplePoint{0, 1});
  // Differences inside the tolerance count as equal.
  auto d = a;
  for (auto& l : d.point_limits) l += 1e-13;
  CHECK(set_inclusion_compare(d, a).verdict == Dominance::Equal);
  // Mismatched shapes are an error.
  const auto e = coarse_table(3, 2, 0.1);
  CHECK_THROWS_AS(set_inclusion_compare(a, e), std::domain_error);
}

TEST_CASE("componentwise monotonicity check") {
  const auto good = coarse_table(3, 2, 0.1);
  CHECK(check_c_condition(good).ok);
  CHECK(check_c_condition(good).violations.empty());
  // Break the x direction at (1,0)-(2,0).
  auto bad = good;
  const auto& s = engine::binomial_diff_family(3, 2).space;
  bad.point_limits[s.index_of({2, 0})] =
      bad.point_limits[s.index_of({1, 0})] - 0.1;
  const auto rep = check_c_condition(bad);
  CHECK_FALSE(rep.ok);
  bool found = false;
  for (const auto& [p, q] : rep.violations) {
    found = found || (p == SamplePoint{1, 0} && q == SamplePoint{2, 0});
  }
  CHECK(found);
  // Break the y direction: a limit that grows with y.
  auto bady = good;
  bady.point_limits[s.index_of({3, 2})] =
      bady.point_limits[s.index_of({3, 1})] + 0.1;
  CHECK_FALSE(check_c_condition(bady).ok);
}

TEST_CASE("maximality: constructed tables have no slack at their own grid") {
  const auto fam = engine::binomial_diff_family(4, 1);
  const auto part = space::partition_from_scores(fam.space,
                                                 space::zstat_scores(fam.space));
  const auto table = engine::smallest_limits(fam, part, 0.05, kCoarse);
  CHECK(maximality_check(fam, table, part, 0.05, 2 * kCoarse.delta_step,
                         kCoarse));
}

TEST_CASE("maximality: a uniformly trivial table has slack") {
  const auto fam = engine::binomial_diff_family(4, 1);
  const auto part = space::partition_from_scores(fam.space,
                                                 space::zstat_scores(fam.space));
  auto table = engine::smallest_limits(fam, part, 0.05, kCoarse);
  for (auto& l : table.block_limits) l = -1.0;
  for (auto& l : table.point_limits) l = -1.0;
  CHECK_FALSE(maximality_check(fam, table, part, 0.05, 0.02, kCoarse));
}

TEST_CASE("maximality: lowering one block opens slack") {
  const auto fam = engine::binomial_diff_family(4, 1);
  const auto part = space::partition_from_scores(fam.space,
                                                 space::zstat_scores(fam.space));
  auto table = engine::smallest_limits(fam, part, 0.05, kCoarse);
  // Pull the first block down by a tenth; bumping it back up must keep
  // coverage, so the check reports slack.
  table.block_limits[0] -= 0.1;
  for (const auto& pt : part.blocks[0]) {
    table.point_limits[fam.space.index_of(pt)] -= 0.1;
  }
  CHECK_FALSE(maximality_check(fam, table, part, 0.05, 0.02, kCoarse));
}

TEST_CASE("maximality argument checks") {
  const auto fam = engine::binomial_diff_family(2, 1);
  const auto part = space::partition_from_scores(fam.space,
                                                 space::zstat_scores(fam.space));
  const auto table = engine::smallest_limits(fam, part, 0.05, kCoarse);
  CHECK_THROWS_AS(maximality_check(fam, table, part, 0.05, 0.0, kCoarse),
                  std::domain_error);
  CHECK_THROWS_AS(maximality_check(fam, table, part, 0.05, -0.01, kCoarse),
                  std::domain_error);
  const auto other = space::partition_from_scores(
      engine::binomial_diff_family(3, 2).space,
      space::zstat_scores(engine::binomial_diff_family(3, 2).space));
  CHECK_THROWS_AS(maximality_check(fam, table, other, 0.05, 0.02, kCoarse),
                  std::domain_error);
}

TEST_CASE("fwer simulation is reproducible and respects null structure") {
  med::DoseStudy design;
  design.doses = {{0, 3}, {0, 3}};
  design.control = {0, 3};
  design.delta = 0.0;
  design.alpha = 0.1;
  med::TableCache cache;
  const auto a =
      fwer_simulate(design, {0.4, 0.4}, 0.4, 4000, 7, kCoarse, &cache);
  const auto b =
      fwer_simulate(design, {0.4, 0.4}, 0.4, 4000, 7, kCoarse, &cache);
  CHECK(a.estimate == b.estimate);
  CHECK(a.errors == b.errors);
  CHECK(a.replicates == 4000);
  CHECK(a.seed == 7);
  CHECK(a.estimate == doctest::Approx((double)a.errors / 4000.0));
  CHECK(a.std_error ==
        doctest::Approx(std::sqrt(a.estimate * (1 - a.estimate) / 4000.0)));
  // Boundary null at the familywise level: the procedure is conservative.
  CHECK(a.estimate <= design.alpha + 3.0 * a.std_error + 0.05);
  const auto c =
      fwer_simulate(design, {0.4, 0.4}, 0.4, 4000, 8, kCoarse, &cache);
  CHECK(c.seed == 8);
  // All doses far above control: no true nulls, so no family errors.
  const auto d =
      fwer_simulate(design, {0.95, 0.95}, 0.05, 2000, 7, kCoarse, &cache);
  CHECK(d.errors == 0);
  CHECK(d.estimate == 0.0);
}

TEST_CASE("fwer validates its arguments") {
  med::DoseStudy design;
  design.doses = {{0, 3}};
  design.control = {0, 3};
  med::TableCache cache;
  CHECK_THROWS_AS(
      fwer_simulate(design, {0.4, 0.4}, 0.4, 100, 1, kCoarse, &cache),
      std::invalid_argument);  // probability count mismatch
  CHECK_THROWS_AS(fwer_simulate(design, {1.4}, 0.4, 100, 1, kCoarse, &cache),
                  std::invalid_argument);
  CHECK_THROWS_AS(fwer_simulate(design, {0.4}, -0.1, 100, 1, kCoarse, &cache),
                  std::invalid_argument);
  CHECK_THROWS_AS(fwer_simulate(design, {0.4}, 0.4, 0, 1, kCoarse, &cache),
                  std::invalid_argument);
}

}  // TEST_SUITE
