#include "smci/engine.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "smci/dist.hpp"

namespace smci::engine {

namespace {

double clamp01(double v) { return v < 0.0 ? 0.0 : (v > 1.0 ? 1.0 : v); }

double binom_point(int n, const std::vector<double>& logc, int x, double p) {
  if (p == 0.0) return x == 0 ? 1.0 : 0.0;
  if (p == 1.0) return x == n ? 1.0 : 0.0;
  return std::exp(logc[x] + x * std::log(p) + (n - x) * std::log1p(-p));
}

void binom_row(int n, const std::vector<double>& logc, double p, double* out) {
  if (p == 0.0) {
    std::fill(out, out + n + 1, 0.0);
    out[0] = 1.0;
    return;
  }
  if (p == 1.0) {
    std::fill(out, out + n + 1, 0.0);
    out[n] = 1.0;
    return;
  }
  const double lp = std::log(p);
  const double lq = std::log1p(-p);
  for (int x = 0; x <= n; ++x) {
    out[x] = std::exp(logc[x] + x * lp + (n - x) * lq);
  }
}

}  // namespace

void ScanConfig::validate() const {
  if (!(delta_step > 0.0)) {
    throw std::domain_error("delta_step must be positive");
  }
  if (nuisance_points < 2) {
    throw std::domain_error("nuisance_points must be at least 2");
  }
  if (std::isnan(tie_tol)) {
    throw std::domain_error("tie_tol must not be NaN");
  }
  if (!(trunc_mass >= 0.0 && trunc_mass < 1.0)) {
    throw std::domain_error("trunc_mass must lie in [0, 1)");
  }
}

void ProblemFamily::pmf_all(double interest, double nuisance,
                            std::span<double> out) const {
  if (joint_pmf_all) {
    joint_pmf_all(interest, nuisance, out);
    return;
  }
  const auto& pts = space.points();
  for (size_t i = 0; i < pts.size(); ++i) {
    out[i] = joint_pmf(pts[i], interest, nuisance);
  }
}

ProblemFamily binomial_diff_family(int n, int m) {
  SampleSpace s(n, m);
  const std::vector<double> logc_n = dist::log_binom_coeffs(n);
  const std::vector<double> logc_m = dist::log_binom_coeffs(m);

  ProblemFamily fam;
  fam.space = s;
  fam.interest = {-1.0, 1.0};
  fam.nuisance_domain = [](double delta) {
    return delta >= 0.0 ? Interval{0.0, 1.0 - delta} : Interval{-delta, 1.0};
  };
  fam.joint_pmf = [n, m, logc_n, logc_m](const SamplePoint& z, double delta,
                                         double p0) {
    const double pc = clamp01(p0);
    const double p1 = clamp01(p0 + delta);
    return binom_point(n, logc_n, z.x, p1) * binom_point(m, logc_m, z.y, pc);
  };
  fam.joint_pmf_all = [n, m, logc_n, logc_m, px = std::vector<double>(n + 1),
                       py = std::vector<double>(m + 1)](
                          double delta, double p0,
                          std::span<double> out) mutable {
    const double pc = clamp01(p0);
    const double p1 = clamp01(p0 + delta);
    binom_row(n, logc_n, p1, px.data());
    binom_row(m, logc_m, pc, py.data());
    size_t i = 0;
    for (int x = 0; x <= n; ++x) {
      for (int y = 0; y <= m; ++y) {
        out[i++] = px[x] * py[y];
      }
    }
  };
  return fam;
}

DeltaGrid DeltaGrid::over(const Interval& range, double step) {
  if (!(step > 0.0)) throw std::domain_error("grid step must be positive");
  if (!(range.hi >= range.lo)) {
    throw std::domain_error("grid range must be nonempty");
  }
  DeltaGrid g;
  g.lo = range.lo;
  g.hi = range.hi;
  g.step = step;
  g.count = static_cast<int>(std::floor(range.width() / step + 1e-9)) + 1;
  // Make sure the final (clamped) point lands exactly on hi.
  if (g.lo + (g.count - 1) * step < g.hi - step * 1e-9) g.count += 1;
  return g;
}

NuisanceRow NuisanceRow::over(const Interval& domain, int points) {
  if (points < 2) throw std::domain_error("nuisance grid needs >= 2 points");
  double width = domain.width();
  if (width < -1e-12) throw std::domain_error("empty nuisance domain");
  if (width < 0.0) width = 0.0;
  NuisanceRow r;
  r.lo = domain.lo;
  r.hi = domain.lo + width;
  r.step = width / (points - 1);
  r.count = points;
  return r;
}

TailScanner::TailScanner(const ProblemFamily& family, const ScanConfig& config)
    : family_(&family) {
  config.validate();
  grid_ = DeltaGrid::over(family.interest, config.delta_step);
  cols_ = config.nuisance_points;
  rows_.resize(grid_.count);
  tail_.assign(static_cast<size_t>(grid_.count) * cols_, 0.0);

  std::vector<double> buf(family.space.size());
  for (int i = 0; i < grid_.count; ++i) {
    const double delta = grid_.value(i);
    rows_[i] = NuisanceRow::over(family.nuisance_domain(delta), cols_);
    double* row = tail_.data() + static_cast<size_t>(i) * cols_;
    for (int k = 0; k < cols_; ++k) {
      family.pmf_all(delta, rows_[i].value(k), buf);
      double total = 0.0;
      for (double v : buf) total += v;
      row[k] = total;
    }
  }
}

double TailScanner::nuisance_value(int row, int col) const {
  return rows_[row].value(col);
}

double TailScanner::cell(int row, int col) const {
  return tail_[static_cast<size_t>(row) * cols_ + col];
}

void TailScanner::exclude(std::span<const SamplePoint> pts, int row_limit) {
  for (int i = 0; i < row_limit; ++i) {
    const double delta = grid_.value(i);
    double* row = tail_.data() + static_cast<size_t>(i) * cols_;
    for (int k = 0; k < cols_; ++k) {
      const double p0 = nuisance_value(i, k);
      double drop = 0.0;
      for (const auto& z : pts) drop += family_->joint_pmf(z, delta, p0);
      row[k] -= drop;
    }
  }
}

double TailScanner::row_min(int row, const SamplePoint* extra) const {
  const double* cells = tail_.data() + static_cast<size_t>(row) * cols_;
  const double delta = grid_.value(row);
  double best = std::numeric_limits<double>::infinity();
  for (int k = 0; k < cols_; ++k) {
    double v = cells[k];
    if (extra) v -= family_->joint_pmf(*extra, delta, nuisance_value(row, k));
    if (v < best) best = v;
  }
  return best;
}

int TailScanner::first_failure(double threshold, int row_limit) const {
  for (int i = 0; i < row_limit; ++i) {
    if (row_min(i, nullptr) < threshold) return i;
  }
  return row_limit;
}

int TailScanner::first_failure_with(const SamplePoint& extra, double threshold,
                                    int row_limit) const {
  for (int i = 0; i < row_limit; ++i) {
    if (row_min(i, &extra) < threshold) return i;
  }
  return row_limit;
}

double LowerLimitTable::lower(const SamplePoint& p) const {
  return point_limits.at(static_cast<size_t>(p.x) * (m + 1) + p.y);
}

double LowerLimitTable::min_limit() const {
  return *std::min_element(point_limits.begin(), point_limits.end());
}

LowerLimitTable assemble_table(const SampleSpace& s,
                               const OrderedPartition& partition, double alpha,
                               std::vector<double> block_limits,
                               double interest_lo) {
  if (static_cast<int>(block_limits.size()) != partition.block_count()) {
    throw std::logic_error("one limit per block required");
  }
  for (size_t j = 1; j < block_limits.size(); ++j) {
    if (block_limits[j] > block_limits[j - 1]) {
      throw std::logic_error("block limits must be nonincreasing");
    }
  }
  if (!block_limits.empty() && block_limits.back() != interest_lo) {
    throw std::logic_error("the last block's limit must equal the lower "
                           "interest endpoint");
  }
  const auto bix = space::block_index_by_point(s, partition);
  LowerLimitTable t;
  t.n = s.n();
  t.m = s.m();
  t.alpha = alpha;
  t.partition = partition;
  t.block_limits = std::move(block_limits);
  t.point_limits.resize(s.size());
  for (int i = 0; i < s.size(); ++i) {
    if (bix[i] < 0) {
      throw std::logic_error("partition does not cover the sample space");
    }
    t.point_limits[i] = t.block_limits[bix[i]];
  }
  return t;
}

double f_of_delta(const ProblemFamily& family,
                  std::span<const SamplePoint> excluded, double delta,
                  const ScanConfig& config) {
  config.validate();
  if (!(delta >= family.interest.lo && delta <= family.interest.hi)) {
    throw std::domain_error("delta outside the interest range");
  }
  const NuisanceRow row =
      NuisanceRow::over(family.nuisance_domain(delta), config.nuisance_points);

  std::vector<char> out_mask(family.space.size(), 1);
  for (const auto& z : excluded) out_mask[family.space.index_of(z)] = 0;

  std::vector<double> buf(family.space.size());
  double best = std::numeric_limits<double>::infinity();
  for (int k = 0; k < row.count; ++k) {
    const double p0 = row.value(k);
    family.pmf_all(delta, p0, buf);
    double sum = 0.0;
    for (size_t i = 0; i < buf.size(); ++i) {
      if (out_mask[i]) sum += buf[i];
    }
    if (sum < best) best = sum;
  }
  return best;
}

LowerLimitTable smallest_limits(const ProblemFamily& family,
                                const OrderedPartition& partition, double alpha,
                                const ScanConfig& config) {
  config.validate();
  if (!(alpha >= 0.0 && alpha < 1.0)) {
    throw std::domain_error("alpha must lie in [0, 1)");
  }
  // Reject partitions that do not tile the space (covers both gaps and
  // duplicates; block_index_by_point checks the shape).
  size_t npts = 0;
  for (const auto& b : partition.blocks) npts += b.size();
  const auto bix = space::block_index_by_point(family.space, partition);
  if (npts != bix.size() ||
      std::count(bix.begin(), bix.end(), -1) != 0) {
    throw std::invalid_argument("partition must cover the space exactly once");
  }

  TailScanner scanner(family, config);
  const double threshold = 1.0 - alpha;
  int bound = scanner.grid().count;
  std::vector<double> block_limits;
  block_limits.reserve(partition.block_count());
  for (const auto& block : partition.blocks) {
    scanner.exclude(block, bound);
    const int fail = scanner.first_failure(threshold, bound);
    if (fail == bound && bound < scanner.grid().count) {
      throw std::logic_error("scan invariant violated: failure row vanished");
    }
    double limit;
    if (fail >= scanner.grid().count) {
      limit = family.interest.hi;  // the condition never fails
    } else if (fail == 0) {
      limit = family.interest.lo;  // fails already at the grid origin
    } else {
      limit = scanner.grid().value(fail - 1);  // last grid point still valid
    }
    block_limits.push_back(limit);
    bound = std::min(bound, fail + 1);
  }
  return assemble_table(family.space, partition, alpha, std::move(block_limits),
                        family.interest.lo);
}

TailMatrix tail_matrix(const ProblemFamily& family,
                       std::span<const SamplePoint> excluded,
                       std::span<const double> interest_grid,
                       std::span<const double> nuisance_grid) {
  std::vector<char> out_mask(family.space.size(), 1);
  for (const auto& z : excluded) out_mask[family.space.index_of(z)] = 0;

  TailMatrix mat;
  mat.interest.assign(interest_grid.begin(), interest_grid.end());
  mat.nuisance.assign(nuisance_grid.begin(), nuisance_grid.end());
  mat.cells.assign(mat.interest.size() * mat.nuisance.size(),
                   std::numeric_limits<double>::quiet_NaN());
  std::vector<double> buf(family.space.size());
  for (size_t i = 0; i < mat.interest.size(); ++i) {
    const Interval dom = family.nuisance_domain(mat.interest[i]);
    for (size_t k = 0; k < mat.nuisance.size(); ++k) {
      const double p0 = mat.nuisance[k];
      if (p0 < dom.lo - 1e-12 || p0 > dom.hi + 1e-12) continue;
      family.pmf_all(mat.interest[i], p0, buf);
      double sum = 0.0;
      for (size_t t = 0; t < buf.size(); ++t) {
        if (out_mask[t]) sum += buf[t];
      }
      mat.cells[i * mat.nuisance.size() + k] = sum;
    }
  }
  return mat;
}

}  // namespace smci::engine
