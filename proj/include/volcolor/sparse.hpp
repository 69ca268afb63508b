#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "volcolor/error.hpp"
#include "volcolor/parallel.hpp"

namespace volcolor {

using Vector = std::vector<double>;

struct Triplet {
  std::size_t row, col;
  double value;
};

// Compressed-row matrix. Column indices are strictly increasing within a row
// and explicit zeros are dropped by the builders below.
struct SparseMatrix {
  std::size_t rows = 0, cols = 0;
  std::vector<std::size_t> row_start{0};
  std::vector<std::uint32_t> col_index;
  std::vector<double> values;

  std::size_t nnz() const noexcept { return values.size(); }

  double at(std::size_t r, std::size_t c) const {
    auto b = col_index.begin() + static_cast<std::ptrdiff_t>(row_start[r]);
    auto e = col_index.begin() + static_cast<std::ptrdiff_t>(row_start[r + 1]);
    auto it = std::lower_bound(b, e, static_cast<std::uint32_t>(c));
    return (it != e && *it == c) ? values[static_cast<std::size_t>(it - col_index.begin())] : 0.0;
  }
};

inline SparseMatrix zero_matrix(std::size_t rows, std::size_t cols) {
  SparseMatrix m;
  m.rows = rows;
  m.cols = cols;
  m.row_start.assign(rows + 1, 0);
  return m;
}

inline SparseMatrix identity_matrix(std::size_t n) {
  SparseMatrix m;
  m.rows = m.cols = n;
  m.row_start.resize(n + 1);
  m.col_index.resize(n);
  m.values.assign(n, 1.0);
  for (std::size_t i = 0; i <= n; ++i) m.row_start[i] = i;
  for (std::size_t i = 0; i < n; ++i) m.col_index[i] = static_cast<std::uint32_t>(i);
  return m;
}

// Sums duplicates; drops entries that sum to exactly zero.
inline SparseMatrix assemble(std::size_t rows, std::size_t cols, std::vector<Triplet> triplets) {
  if (cols > std::numeric_limits<std::uint32_t>::max())
    throw validation_error("too_large", "matrix column count exceeds 32-bit index range");
  for (const auto& t : triplets)
    if (t.row >= rows || t.col >= cols)
      throw validation_error("index_out_of_bounds", "triplet (" + std::to_string(t.row) + "," +
                                                        std::to_string(t.col) + ") outside " +
                                                        std::to_string(rows) + "x" + std::to_string(cols));
  std::sort(triplets.begin(), triplets.end(),
            [](const Triplet& a, const Triplet& b) { return a.row != b.row ? a.row < b.row : a.col < b.col; });
  SparseMatrix m = zero_matrix(rows, cols);
  std::size_t t = 0;
  for (std::size_t r = 0; r < rows; ++r) {
    while (t < triplets.size() && triplets[t].row == r) {
      std::size_t c = triplets[t].col;
      double sum = 0.0;
      while (t < triplets.size() && triplets[t].row == r && triplets[t].col == c) sum += triplets[t++].value;
      if (sum != 0.0) {
        m.col_index.push_back(static_cast<std::uint32_t>(c));
        m.values.push_back(sum);
      }
    }
    m.row_start[r + 1] = m.values.size();
  }
  return m;
}

inline SparseMatrix assemble(std::size_t n, std::vector<Triplet> triplets) {
  return assemble(n, n, std::move(triplets));
}

inline void matvec(const SparseMatrix& a, std::span<const double> x, std::span<double> y) {
  if (x.size() != a.cols || y.size() != a.rows)
    throw validation_error("length_mismatch", "matvec: vector length does not match matrix shape");
  parallel_for(a.rows, [&](std::size_t b, std::size_t e) {
    for (std::size_t r = b; r < e; ++r) {
      double s = 0.0;
      for (std::size_t p = a.row_start[r]; p < a.row_start[r + 1]; ++p) s += a.values[p] * x[a.col_index[p]];
      y[r] = s;
    }
  });
}

inline Vector matvec(const SparseMatrix& a, std::span<const double> x) {
  Vector y(a.rows);
  matvec(a, x, y);
  return y;
}

inline SparseMatrix transpose(const SparseMatrix& a) {
  SparseMatrix t = zero_matrix(a.cols, a.rows);
  std::vector<std::size_t> count(a.cols + 1, 0);
  for (auto c : a.col_index) ++count[c + 1];
  std::partial_sum(count.begin(), count.end(), count.begin());
  t.row_start = count;
  t.col_index.resize(a.nnz());
  t.values.resize(a.nnz());
  std::vector<std::size_t> next(count.begin(), count.end() - 1);
  for (std::size_t r = 0; r < a.rows; ++r)
    for (std::size_t p = a.row_start[r]; p < a.row_start[r + 1]; ++p) {
      std::size_t dst = next[a.col_index[p]]++;
      t.col_index[dst] = static_cast<std::uint32_t>(r);
      t.values[dst] = a.values[p];
    }
  return t;
}

// C = A * B, row-by-row with a dense accumulator. Rows come out sorted.
inline SparseMatrix multiply(const SparseMatrix& a, const SparseMatrix& b) {
  if (a.cols != b.rows) throw validation_error("shape_mismatch", "multiply: inner dimensions differ");
  SparseMatrix c = zero_matrix(a.rows, b.cols);
  std::vector<double> acc(b.cols, 0.0);
  std::vector<std::uint8_t> used(b.cols, 0);
  std::vector<std::uint32_t> touched;
  for (std::size_t r = 0; r < a.rows; ++r) {
    touched.clear();
    for (std::size_t p = a.row_start[r]; p < a.row_start[r + 1]; ++p) {
      const double av = a.values[p];
      const std::size_t k = a.col_index[p];
      for (std::size_t q = b.row_start[k]; q < b.row_start[k + 1]; ++q) {
        auto j = b.col_index[q];
        if (!used[j]) {
          used[j] = 1;
          touched.push_back(j);
        }
        acc[j] += av * b.values[q];
      }
    }
    std::sort(touched.begin(), touched.end());
    for (auto j : touched) {
      if (acc[j] != 0.0) {
        c.col_index.push_back(j);
        c.values.push_back(acc[j]);
      }
      acc[j] = 0.0;
      used[j] = 0;
    }
    c.row_start[r + 1] = c.values.size();
  }
  return c;
}

inline Vector diagonal(const SparseMatrix& a) {
  Vector d(std::min(a.rows, a.cols), 0.0);
  for (std::size_t r = 0; r < d.size(); ++r) d[r] = a.at(r, r);
  return d;
}

// max |a_ij - a_ji| relative to max |a_ij|.
inline double asymmetry(const SparseMatrix& a) {
  if (a.rows != a.cols) return std::numeric_limits<double>::infinity();
  double worst = 0.0, scale = 0.0;
  for (std::size_t r = 0; r < a.rows; ++r)
    for (std::size_t p = a.row_start[r]; p < a.row_start[r + 1]; ++p) {
      scale = std::max(scale, std::abs(a.values[p]));
      worst = std::max(worst, std::abs(a.values[p] - a.at(a.col_index[p], r)));
    }
  return scale > 0 ? worst / scale : 0.0;
}

inline bool is_symmetric(const SparseMatrix& a, double rel_tol = 1e-12) { return asymmetry(a) <= rel_tol; }

inline std::vector<double> to_dense(const SparseMatrix& a) {
  std::vector<double> d(a.rows * a.cols, 0.0);
  for (std::size_t r = 0; r < a.rows; ++r)
    for (std::size_t p = a.row_start[r]; p < a.row_start[r + 1]; ++p) d[r * a.cols + a.col_index[p]] = a.values[p];
  return d;
}

// Matrix Market coordinate format, 1-based indices.
inline void write_matrix_market(const SparseMatrix& a, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw io_error("io", "cannot write " + path.string());
  out << "%%MatrixMarket matrix coordinate real general\n";
  out << a.rows << " " << a.cols << " " << a.nnz() << "\n";
  out << std::setprecision(17);
  for (std::size_t r = 0; r < a.rows; ++r)
    for (std::size_t p = a.row_start[r]; p < a.row_start[r + 1]; ++p)
      out << r + 1 << " " << a.col_index[p] + 1 << " " << a.values[p] << "\n";
}

// ---------------------------------------------------------------- vectors

inline double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double norm2(std::span<const double> a) { return std::sqrt(dot(a, a)); }

inline void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
}

}  // namespace volcolor
