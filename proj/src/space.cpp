#include "smci/space.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "smci/dist.hpp"

namespace smci::space {

std::string to_string(const SamplePoint& p) {
  return "(" + std::to_string(p.x) + "," + std::to_string(p.y) + ")";
}

SampleSpace::SampleSpace(int n, int m) : n_(n), m_(m) {
  if (n < 1 || m < 1) {
    throw std::domain_error("sample space requires n >= 1 and m >= 1");
  }
  points_.reserve(static_cast<size_t>(n + 1) * (m + 1));
  for (int x = 0; x <= n; ++x) {
    for (int y = 0; y <= m; ++y) {
      points_.push_back({x, y});
    }
  }
}

bool SampleSpace::contains(const SamplePoint& p) const {
  return p.x >= 0 && p.x <= n_ && p.y >= 0 && p.y <= m_;
}

int SampleSpace::index_of(const SamplePoint& p) const {
  if (!contains(p)) {
    throw std::domain_error("point " + to_string(p) + " outside sample space");
  }
  return p.x * (m_ + 1) + p.y;
}

SampleSpace build_space(int n, int m) { return SampleSpace(n, m); }

double ScoreTable::at(const SamplePoint& p) const {
  return score.at(static_cast<size_t>(p.x) * (m + 1) + p.y);
}

namespace {

double wald_se(double p1, int n, double p0, int m) {
  return std::sqrt(p1 * (1.0 - p1) / n + p0 * (1.0 - p0) / m);
}

}  // namespace

ScoreTable zstat_scores(const SampleSpace& s) {
  ScoreTable t{s.n(), s.m(), {}};
  t.score.reserve(s.size());
  for (const auto& p : s.points()) {
    const double p1 = static_cast<double>(p.x) / s.n();
    const double p0 = static_cast<double>(p.y) / s.m();
    const double num = p1 - p0;
    const double den = wald_se(p1, s.n(), p0, s.m());
    double z;
    if (den == 0.0) {
      z = num > 0.0 ? std::numeric_limits<double>::infinity()
          : num < 0.0 ? -std::numeric_limits<double>::infinity()
                      : 0.0;
    } else {
      z = num / den;
    }
    t.score.push_back(z);
  }
  return t;
}

ScoreTable asymptotic_lower_scores(const SampleSpace& s, double alpha) {
  const double z = dist::norm_upper_quantile(alpha);
  ScoreTable t{s.n(), s.m(), {}};
  t.score.reserve(s.size());
  for (const auto& p : s.points()) {
    const double p1 = static_cast<double>(p.x) / s.n();
    const double p0 = static_cast<double>(p.y) / s.m();
    t.score.push_back(p1 - p0 - z * wald_se(p1, s.n(), p0, s.m()));
  }
  return t;
}

bool same_partition(const OrderedPartition& a, const OrderedPartition& b) {
  if (!a.same_space(b) || a.block_count() != b.block_count()) return false;
  for (int j = 0; j < a.block_count(); ++j) {
    Block x = a.blocks[j], y = b.blocks[j];
    std::sort(x.begin(), x.end());
    std::sort(y.begin(), y.end());
    if (x != y) return false;
  }
  return true;
}

std::vector<int> block_index_by_point(const SampleSpace& s,
                                      const OrderedPartition& p) {
  if (p.n != s.n() || p.m != s.m()) {
    throw std::domain_error("partition does not match sample space");
  }
  std::vector<int> idx(s.size(), -1);
  for (int j = 0; j < p.block_count(); ++j) {
    for (const auto& pt : p.blocks[j]) {
      idx.at(s.index_of(pt)) = j;
    }
  }
  return idx;
}

OrderedPartition partition_from_scores(const SampleSpace& s,
                                       const ScoreTable& scores,
                                       double tie_tol) {
  if (scores.n != s.n() || scores.m != s.m() ||
      static_cast<int>(scores.score.size()) != s.size()) {
    throw std::domain_error("score table does not match sample space");
  }
  if (!(tie_tol >= 0.0)) {
    throw std::domain_error("tie tolerance must be nonnegative");
  }
  for (double v : scores.score) {
    if (std::isnan(v)) {
      throw std::invalid_argument("scores must not contain NaN");
    }
  }
  std::vector<int> order(s.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return scores.score[a] > scores.score[b];
  });

  OrderedPartition part{s.n(), s.m(), {}};
  const auto tie = [&](double a, double b) {
    return a == b || std::fabs(a - b) <= tie_tol;
  };
  size_t i = 0;
  while (i < order.size()) {
    Block block{s.points()[order[i]]};
    const double head = scores.score[order[i]];
    size_t j = i + 1;
    while (j < order.size() && tie(head, scores.score[order[j]])) {
      block.push_back(s.points()[order[j]]);
      ++j;
    }
    std::sort(block.begin(), block.end());  // stable row-major order in ties
    part.blocks.push_back(std::move(block));
    i = j;
  }
  return part;
}

OrderedPartition explicit_partition(const SampleSpace& s,
                                    std::vector<Block> blocks) {
  std::vector<char> seen(s.size(), 0);
  int covered = 0;
  for (const auto& block : blocks) {
    if (block.empty()) {
      throw std::invalid_argument("partition blocks must be nonempty");
    }
    for (const auto& pt : block) {
      if (!s.contains(pt)) {
        throw std::invalid_argument("partition point " + to_string(pt) +
                                    " outside sample space");
      }
      char& flag = seen[s.index_of(pt)];
      if (flag) {
        throw std::invalid_argument("partition point " + to_string(pt) +
                                    " appears twice");
      }
      flag = 1;
      ++covered;
    }
  }
  if (covered != s.size()) {
    throw std::invalid_argument("partition does not cover the sample space");
  }
  return OrderedPartition{s.n(), s.m(), std::move(blocks)};
}

bool is_refinement(const OrderedPartition& fine, const OrderedPartition& coarse) {
  if (!fine.same_space(coarse)) {
    throw std::domain_error("is_refinement requires partitions over one space");
  }
  const SampleSpace s(fine.n, fine.m);
  const auto coarse_of = block_index_by_point(s, coarse);
  int last = -1;
  for (const auto& block : fine.blocks) {
    int target = -1;
    for (const auto& pt : block) {
      const int c = coarse_of[s.index_of(pt)];
      if (target == -1) target = c;
      if (c != target) return false;  // block straddles coarse blocks
    }
    if (target < last) return false;  // containing indices must not decrease
    last = target;
  }
  return true;
}

OrderedPartition builtin_singleton_ordering_4x1() {
  const SampleSpace s(4, 1);
  std::vector<Block> blocks = {
      {{4, 0}}, {{3, 0}}, {{2, 0}}, {{1, 0}}, {{4, 1}},
      {{3, 1}}, {{2, 1}}, {{0, 0}}, {{1, 1}}, {{0, 1}},
  };
  return explicit_partition(s, std::move(blocks));
}

}  // namespace smci::space
