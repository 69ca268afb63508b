#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <set>
#include <span>
#include <utility>
#include <vector>

#include "volcolor/error.hpp"
#include "volcolor/sparse.hpp"

namespace volcolor {

struct AmgParams {
  double strength_threshold = 0.25;  // theta
  int pre_sweeps = 1;
  int post_sweeps = 1;
  double jacobi_weight = 2.0 / 3.0;
  std::size_t max_coarse = 64;
  int max_levels = 25;
};

// Dense Cholesky factor used on the coarsest level. Pivots that vanish (a
// consistent singular system) are skipped and the matching unknown is zero.
class DenseCholesky {
public:
  DenseCholesky() = default;

  explicit DenseCholesky(const SparseMatrix& a) : n_(a.rows), l_(to_dense(a)), skip_(a.rows, 0) {
    double scale = 0.0;
    for (std::size_t i = 0; i < n_; ++i) scale = std::max(scale, std::abs(l_[i * n_ + i]));
    const double tiny = 1e-13 * (scale > 0 ? scale : 1.0);
    for (std::size_t j = 0; j < n_; ++j) {
      double d = l_[j * n_ + j];
      for (std::size_t k = 0; k < j; ++k) d -= l_[j * n_ + k] * l_[j * n_ + k];
      if (d <= tiny) {
        if (d < -1e-8 * (scale > 0 ? scale : 1.0))
          throw numerical_error("not_spd", "coarse-level matrix is not positive semidefinite");
        skip_[j] = 1;
        for (std::size_t i = j; i < n_; ++i) l_[i * n_ + j] = 0.0;
        continue;
      }
      d = std::sqrt(d);
      l_[j * n_ + j] = d;
      for (std::size_t i = j + 1; i < n_; ++i) {
        double s = l_[i * n_ + j];
        for (std::size_t k = 0; k < j; ++k) s -= l_[i * n_ + k] * l_[j * n_ + k];
        l_[i * n_ + j] = s / d;
      }
    }
    for (std::size_t i = 0; i < n_; ++i)
      for (std::size_t j = i + 1; j < n_; ++j) l_[i * n_ + j] = 0.0;
  }

  std::size_t size() const noexcept { return n_; }

  void solve(std::span<const double> b, std::span<double> x) const {
    std::vector<double> y(n_);
    for (std::size_t i = 0; i < n_; ++i) {
      if (skip_[i]) {
        y[i] = 0.0;
        continue;
      }
      double s = b[i];
      for (std::size_t k = 0; k < i; ++k) s -= l_[i * n_ + k] * y[k];
      y[i] = s / l_[i * n_ + i];
    }
    for (std::size_t ii = n_; ii-- > 0;) {
      if (skip_[ii]) {
        x[ii] = 0.0;
        continue;
      }
      double s = y[ii];
      for (std::size_t k = ii + 1; k < n_; ++k) s -= l_[k * n_ + ii] * x[k];
      x[ii] = s / l_[ii * n_ + ii];
    }
  }

private:
  std::size_t n_ = 0;
  std::vector<double> l_;
  std::vector<std::uint8_t> skip_;
};

struct AmgLevel {
  SparseMatrix a;
  SparseMatrix p;  // prolongation to this level from the next coarser one
  SparseMatrix r;  // restriction, P^T
  Vector inv_diag;
};

namespace amg_detail {

// j strongly influences i when -a_ij >= theta * max_k(-a_ik), k != i.
inline std::vector<std::vector<std::uint32_t>> strong_connections(const SparseMatrix& a, double theta) {
  std::vector<std::vector<std::uint32_t>> s(a.rows);
  for (std::size_t i = 0; i < a.rows; ++i) {
    double max_neg = 0.0;
    for (std::size_t p = a.row_start[i]; p < a.row_start[i + 1]; ++p)
      if (a.col_index[p] != i) max_neg = std::max(max_neg, -a.values[p]);
    if (max_neg <= 0.0) continue;
    for (std::size_t p = a.row_start[i]; p < a.row_start[i + 1]; ++p)
      if (a.col_index[p] != i && -a.values[p] >= theta * max_neg) s[i].push_back(a.col_index[p]);
  }
  return s;
}

enum class Mark : std::uint8_t { undecided, coarse, fine };

// First-pass Ruge-Stueben splitting, ties toward the lower index, followed by
// promoting any F point with strong dependencies but no strong C neighbour.
inline std::vector<Mark> cf_split(const std::vector<std::vector<std::uint32_t>>& s) {
  const std::size_t n = s.size();
  std::vector<std::vector<std::uint32_t>> st(n);
  for (std::size_t i = 0; i < n; ++i)
    for (auto j : s[i]) st[j].push_back(static_cast<std::uint32_t>(i));

  std::vector<Mark> mark(n, Mark::undecided);
  std::vector<long> measure(n);
  std::set<std::pair<long, std::size_t>> queue;  // (-measure, index)
  for (std::size_t i = 0; i < n; ++i) {
    measure[i] = static_cast<long>(st[i].size());
    if (s[i].empty() && st[i].empty()) {
      mark[i] = Mark::fine;
      continue;
    }
    queue.insert({-measure[i], i});
  }
  auto bump = [&](std::size_t k, long delta) {
    queue.erase({-measure[k], k});
    measure[k] += delta;
    queue.insert({-measure[k], k});
  };
  while (!queue.empty()) {
    std::size_t c = queue.begin()->second;
    queue.erase(queue.begin());
    mark[c] = Mark::coarse;
    for (auto i : st[c]) {
      if (mark[i] != Mark::undecided) continue;
      queue.erase({-measure[i], i});
      mark[i] = Mark::fine;
      for (auto k : s[i])
        if (mark[k] == Mark::undecided) bump(k, +1);
    }
    for (auto k : s[c])
      if (mark[k] == Mark::undecided) bump(k, -1);
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (mark[i] != Mark::fine || s[i].empty()) continue;
    bool has_c = std::any_of(s[i].begin(), s[i].end(), [&](auto j) { return mark[j] == Mark::coarse; });
    if (!has_c) mark[i] = Mark::coarse;
  }
  return mark;
}

// Direct interpolation; positive off-diagonals are lumped into the diagonal.
inline SparseMatrix direct_interpolation(const SparseMatrix& a, const std::vector<std::vector<std::uint32_t>>& s,
                                         const std::vector<Mark>& mark, std::vector<std::uint32_t>& coarse_id,
                                         std::size_t& n_coarse) {
  const std::size_t n = a.rows;
  coarse_id.assign(n, 0);
  n_coarse = 0;
  for (std::size_t i = 0; i < n; ++i)
    if (mark[i] == Mark::coarse) coarse_id[i] = static_cast<std::uint32_t>(n_coarse++);

  SparseMatrix p = zero_matrix(n, n_coarse);
  std::vector<std::uint8_t> strong_c(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    if (mark[i] == Mark::coarse) {
      p.col_index.push_back(coarse_id[i]);
      p.values.push_back(1.0);
      p.row_start[i + 1] = p.values.size();
      continue;
    }
    for (auto j : s[i])
      if (mark[j] == Mark::coarse) strong_c[j] = 1;
    double diag = 0.0, neg_all = 0.0, neg_c = 0.0, pos_all = 0.0;
    for (std::size_t q = a.row_start[i]; q < a.row_start[i + 1]; ++q) {
      auto j = a.col_index[q];
      double v = a.values[q];
      if (j == i) diag = v;
      else if (v < 0) {
        neg_all += v;
        if (strong_c[j]) neg_c += v;
      } else
        pos_all += v;
    }
    double denom = diag + pos_all;
    if (neg_c < 0.0 && denom > 0.0) {
      const double alpha = neg_all / neg_c;
      for (std::size_t q = a.row_start[i]; q < a.row_start[i + 1]; ++q) {
        auto j = a.col_index[q];
        if (strong_c[j] && a.values[q] < 0) {
          p.col_index.push_back(coarse_id[j]);
          p.values.push_back(-alpha * a.values[q] / denom);
        }
      }
    }
    for (auto j : s[i]) strong_c[j] = 0;
    p.row_start[i + 1] = p.values.size();
  }
  // coarse ids are monotone in fine index, so each row is already sorted
  return p;
}

}  // namespace amg_detail

class AmgHierarchy {
public:
  AmgHierarchy() = default;

  std::size_t num_levels() const noexcept { return levels_.size(); }
  const AmgLevel& level(std::size_t l) const { return levels_.at(l); }
  const AmgParams& params() const noexcept { return params_; }

  // Sum of nonzeros over all levels divided by the fine-level nonzeros.
  double operator_complexity() const {
    if (levels_.empty() || levels_[0].a.nnz() == 0) return 0.0;
    double total = 0;
    for (const auto& l : levels_) total += static_cast<double>(l.a.nnz());
    return total / static_cast<double>(levels_[0].a.nnz());
  }

  // One V-cycle for A z = r starting from z = 0.
  void apply(std::span<const double> r, std::span<double> z) const { vcycle(0, r, z); }

  friend AmgHierarchy amg_build(const SparseMatrix& a, const AmgParams& params);

private:
  void smooth(const AmgLevel& lv, std::span<const double> b, std::span<double> x, int sweeps) const {
    const std::size_t n = lv.a.rows;
    std::vector<double> ax(n);
    for (int s = 0; s < sweeps; ++s) {
      matvec(lv.a, x, ax);
      for (std::size_t i = 0; i < n; ++i) x[i] += params_.jacobi_weight * lv.inv_diag[i] * (b[i] - ax[i]);
    }
  }

  void vcycle(std::size_t l, std::span<const double> b, std::span<double> x) const {
    const AmgLevel& lv = levels_[l];
    if (l + 1 == levels_.size()) {
      if (coarse_.size() == lv.a.rows) {
        coarse_.solve(b, x);
      } else {
        std::fill(x.begin(), x.end(), 0.0);
        smooth(lv, b, x, coarse_sweeps_);
      }
      return;
    }
    const std::size_t n = lv.a.rows;
    std::fill(x.begin(), x.end(), 0.0);
    smooth(lv, b, x, params_.pre_sweeps);
    std::vector<double> res(n);
    matvec(lv.a, x, res);
    for (std::size_t i = 0; i < n; ++i) res[i] = b[i] - res[i];
    const AmgLevel& next = levels_[l + 1];
    std::vector<double> rc(next.a.rows), ec(next.a.rows);
    matvec(lv.r, res, rc);
    vcycle(l + 1, rc, ec);
    matvec(lv.p, ec, res);
    for (std::size_t i = 0; i < n; ++i) x[i] += res[i];
    smooth(lv, b, x, params_.post_sweeps);
  }

  std::vector<AmgLevel> levels_;
  DenseCholesky coarse_;
  AmgParams params_;
  int coarse_sweeps_ = 20;
};

inline Vector inverse_diagonal(const SparseMatrix& a) {
  Vector d = diagonal(a);
  for (std::size_t i = 0; i < d.size(); ++i) {
    if (!(d[i] > 0.0))
      throw validation_error("degenerate_matrix", "row " + std::to_string(i) + " has a nonpositive diagonal");
    d[i] = 1.0 / d[i];
  }
  return d;
}

// Classical Ruge-Stueben hierarchy with Galerkin coarse operators R A P.
inline AmgHierarchy amg_build(const SparseMatrix& a, const AmgParams& params) {
  if (a.rows != a.cols) throw validation_error("not_square", "amg_build needs a square matrix");
  for (std::size_t i = 0; i < a.rows; ++i)
    if (a.row_start[i] == a.row_start[i + 1])
      throw validation_error("degenerate_matrix", "row " + std::to_string(i) + " is empty");
  if (!(params.strength_threshold > 0.0 && params.strength_threshold <= 1.0))
    throw validation_error("bad_config", "AMG strength threshold must be in (0, 1]");

  constexpr std::size_t max_dense_coarse = 2048;
  AmgHierarchy h;
  h.params_ = params;
  h.levels_.push_back({a, {}, {}, inverse_diagonal(a)});
  while (h.levels_.back().a.rows > params.max_coarse && static_cast<int>(h.levels_.size()) < params.max_levels) {
    const SparseMatrix& fine = h.levels_.back().a;
    auto strong = amg_detail::strong_connections(fine, params.strength_threshold);
    auto mark = amg_detail::cf_split(strong);
    std::vector<std::uint32_t> coarse_id;
    std::size_t nc = 0;
    SparseMatrix p = amg_detail::direct_interpolation(fine, strong, mark, coarse_id, nc);
    if (nc == 0 || nc >= fine.rows) break;
    SparseMatrix r = transpose(p);
    SparseMatrix coarse = multiply(r, multiply(fine, p));
    bool empty_row = false;
    for (std::size_t i = 0; i < coarse.rows && !empty_row; ++i) empty_row = coarse.row_start[i] == coarse.row_start[i + 1];
    if (empty_row) break;
    Vector inv_d;
    try {
      inv_d = inverse_diagonal(coarse);
    } catch (const Error&) {
      break;
    }
    h.levels_.back().p = std::move(p);
    h.levels_.back().r = std::move(r);
    h.levels_.push_back({std::move(coarse), {}, {}, std::move(inv_d)});
  }
  const SparseMatrix& last = h.levels_.back().a;
  if (last.rows <= max_dense_coarse) h.coarse_ = DenseCholesky(last);
  return h;
}

}  // namespace volcolor
