#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "smci/engine.hpp"
#include "smci/inversion.hpp"
#include "smci/space.hpp"

using namespace smci;
using namespace smci::inversion;

namespace {

const ScanConfig kCoarse{0.01, 101, -1.0, 1e-10};

}  // namespace

TEST_SUITE("inversion") {

TEST_CASE("invert_tests stays within one grid step of the scan engine") {
  for (auto [n, m] : {std::pair{4, 1}, std::pair{3, 2}}) {
    const auto fam = engine::binomial_diff_family(n, m);
    const auto part = space::partition_from_scores(
        fam.space, space::zstat_scores(fam.space));
    for (double alpha : {0.05, 0.1}) {
      const auto direct = smallest_limits(fam, part, alpha, kCoarse);
      const auto inverted = invert_tests(fam, part, alpha, kCoarse);
      REQUIRE(direct.point_limits.size() == inverted.point_limits.size());
      for (size_t i = 0; i < direct.point_limits.size(); ++i) {
        CHECK(std::abs(direct.point_limits[i] - inverted.point_limits[i]) <=
              2.0 * kCoarse.delta_step + 1e-12);
      }
    }
  }
}

TEST_CASE("inverted limits live in the same monotone class") {
  const auto fam = engine::binomial_diff_family(3, 2);
  const auto part = space::partition_from_scores(fam.space,
                                                 space::zstat_scores(fam.space));
  const auto t = invert_tests(fam, part, 0.05, kCoarse);
  for (size_t j = 1; j < t.block_limits.size(); ++j) {
    CHECK(t.block_limits[j] <= t.block_limits[j - 1]);
  }
  CHECK(t.block_limits.back() == -1.0);
  CHECK(t.min_limit() == -1.0);
}

TEST_CASE("s_delta counts the blocks whose inverted limit exceeds delta") {
  const auto fam = engine::binomial_diff_family(3, 2);
  const auto part = space::partition_from_scores(fam.space,
                                                 space::zstat_scores(fam.space));
  const double alpha = 0.1;
  const auto t = invert_tests(fam, part, alpha, kCoarse);
  for (double delta : {-1.0, -0.83, -0.5, -0.17, 0.0, 0.42, 1.0}) {
    int want = 0;
    for (double l : t.block_limits) want += (l > delta + 1e-12) ? 1 : 0;
    CHECK(s_delta(fam, part, delta, alpha, kCoarse) == want);
  }
}

TEST_CASE("s_delta spans its full range") {
  const auto fam = engine::binomial_diff_family(3, 2);
  const auto part = space::partition_from_scores(fam.space,
                                                 space::zstat_scores(fam.space));
  // At the lower endpoint every prefix test accepts somewhere below only
  // vacuously; the full space always has probability one, so the last
  // block can never be rejected.
  CHECK(s_delta(fam, part, -1.0, 0.05, kCoarse) < part.block_count());
  CHECK(s_delta(fam, part, 1.0, 0.05, kCoarse) == 0);
}

TEST_CASE("invert_tests validates the partition") {
  const auto fam = engine::binomial_diff_family(2, 1);
  space::OrderedPartition bad;
  bad.n = 2;
  bad.m = 1;
  bad.blocks = {{{2, 0}}, {{1, 0}}};  // misses half the lattice
  CHECK_THROWS_AS(invert_tests(fam, bad, 0.05, kCoarse),
                  std::invalid_argument);
}

}  // TEST_SUITE
