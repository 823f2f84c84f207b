#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <span>
#include <string>
#include <vector>

#include "apmm/errors.hpp"
#include "apmm/stencils.hpp"

namespace apmm {

/// Square matrix in compressed sparse row layout. Column indices are strictly
/// increasing inside each row.
struct SparseMatrix {
  int n = 0;
  std::vector<int> row_ptr{0};
  std::vector<int> col;
  std::vector<double> val;

  int rows() const { return n; }
  std::size_t nnz() const { return val.size(); }

  std::size_t row_size(int r) const { return static_cast<std::size_t>(row_ptr[r + 1] - row_ptr[r]); }
  std::span<const int> row_cols(int r) const { return {col.data() + row_ptr[r], row_size(r)}; }
  std::span<const double> row_vals(int r) const { return {val.data() + row_ptr[r], row_size(r)}; }

  double at(int r, int c) const {
    auto cols = row_cols(r);
    auto it = std::lower_bound(cols.begin(), cols.end(), c);
    if (it == cols.end() || *it != c) return 0.0;
    return row_vals(r)[static_cast<std::size_t>(it - cols.begin())];
  }

  double max_abs() const {
    double m = 0.0;
    for (double v : val) m = std::max(m, std::abs(v));
    return m;
  }

  /// y = A x
  void multiply(std::span<const double> x, std::span<double> y) const {
    for (int r = 0; r < n; ++r) {
      double s = 0.0;
      for (int k = row_ptr[r]; k < row_ptr[r + 1]; ++k) s += val[k] * x[col[k]];
      y[r] = s;
    }
  }

  std::vector<double> multiply(std::span<const double> x) const {
    std::vector<double> y(n);
    multiply(x, y);
    return y;
  }

  /// r = b - A x, accumulated in long double.
  void residual(std::span<const double> x, std::span<const double> b, std::span<double> r) const {
    for (int i = 0; i < n; ++i) {
      long double s = b[i];
      for (int k = row_ptr[i]; k < row_ptr[i + 1]; ++k) s -= static_cast<long double>(val[k]) * x[col[k]];
      r[i] = static_cast<double>(s);
    }
  }

  /// y = A^T x
  void multiply_transposed(std::span<const double> x, std::span<double> y) const {
    std::fill(y.begin(), y.end(), 0.0);
    for (int r = 0; r < n; ++r) {
      const double xr = x[r];
      for (int k = row_ptr[r]; k < row_ptr[r + 1]; ++k) y[col[k]] += val[k] * xr;
    }
  }

  bool operator==(const SparseMatrix&) const = default;

  static SparseMatrix identity(int n) {
    SparseMatrix a;
    a.n = n;
    for (int r = 0; r < n; ++r) {
      a.col.push_back(r);
      a.val.push_back(1.0);
      a.row_ptr.push_back(r + 1);
    }
    return a;
  }

  /// Builds from a dense row-major array, dropping exact zeros.
  static SparseMatrix from_dense(int n, std::span<const double> dense) {
    SparseMatrix a;
    a.n = n;
    for (int r = 0; r < n; ++r) {
      for (int c = 0; c < n; ++c) {
        const double v = dense[r * n + c];
        if (v != 0.0) {
          a.col.push_back(c);
          a.val.push_back(v);
        }
      }
      a.row_ptr.push_back(static_cast<int>(a.col.size()));
    }
    return a;
  }
};

/// Collects rows in arbitrary order and compresses them.
class SparseBuilder {
 public:
  explicit SparseBuilder(int n) : rows_(n) {}

  void set_row(int r, StencilRow row) { rows_[r] = std::move(row); }
  StencilRow& row(int r) { return rows_[r]; }

  /// Throws SingularStructure on an empty row or column.
  SparseMatrix build() const {
    SparseMatrix a;
    a.n = static_cast<int>(rows_.size());
    std::vector<char> col_seen(rows_.size(), 0);
    for (std::size_t r = 0; r < rows_.size(); ++r) {
      bool any = false;
      for (auto [c, v] : rows_[r].entries) {
        if (v == 0.0) continue;
        a.col.push_back(c);
        a.val.push_back(v);
        col_seen[c] = 1;
        any = true;
      }
      if (!any) throw Error(ErrorKind::SingularStructure, "row " + std::to_string(r) + " is empty");
      a.row_ptr.push_back(static_cast<int>(a.col.size()));
    }
    for (std::size_t c = 0; c < col_seen.size(); ++c)
      if (!col_seen[c]) throw Error(ErrorKind::SingularStructure, "column " + std::to_string(c) + " is empty");
    return a;
  }

 private:
  std::vector<StencilRow> rows_;
};

/// Shortest decimal text that parses back to the same double.
inline std::string format_double(double v) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

/// MatrixMarket coordinate real general, 1-based indices.
inline void write_matrix_market(const SparseMatrix& a, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::IoError, "cannot open " + path);
  out << "%%MatrixMarket matrix coordinate real general\n";
  out << a.n << ' ' << a.n << ' ' << a.nnz() << '\n';
  for (int r = 0; r < a.n; ++r) {
    auto cols = a.row_cols(r);
    auto vals = a.row_vals(r);
    for (std::size_t k = 0; k < cols.size(); ++k)
      out << r + 1 << ' ' << cols[k] + 1 << ' ' << format_double(vals[k]) << '\n';
  }
  if (!out) throw Error(ErrorKind::IoError, "write failed for " + path);
}

}  // namespace apmm
