#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "apmm/errors.hpp"
#include "apmm/sparse.hpp"

namespace apmm {

/// P D A = L U with D = diag(row_scale) equilibrating every row to unit max
/// and unit lower L. U row k is stored densely over the columns [k, k + len),
/// L column k as (row position, multiplier) pairs.
struct LUFactors {
  int n = 0;
  std::vector<int> pivot_row;  // original row chosen as pivot k
  std::vector<double> row_scale;
  std::vector<std::int64_t> l_ptr{0};
  std::vector<int> l_pos;
  std::vector<double> l_val;
  std::vector<std::int64_t> u_ptr{0};
  std::vector<double> u_val;

  std::span<const double> u_row(int k) const {
    return {u_val.data() + u_ptr[k], static_cast<std::size_t>(u_ptr[k + 1] - u_ptr[k])};
  }
  std::size_t stored_entries() const { return l_val.size() + u_val.size(); }
};

/// Process-wide count of factorizations, used to check that time loops
/// factorize their constant matrix once.
inline std::atomic<long>& lu_factorization_count() {
  static std::atomic<long> count{0};
  return count;
}

namespace detail {

struct ActiveRow {
  int orig = 0;
  int first = 0;  // column of v[0]
  std::vector<double> v;

  double at(int c) const {
    const int k = c - first;
    return (k >= 0 && k < static_cast<int>(v.size())) ? v[k] : 0.0;
  }
};

}  // namespace detail

/// Gaussian elimination with partial pivoting on the row-equilibrated
/// matrix. Rows enter the working window when elimination reaches their
/// first nonzero column, so banded matrices only ever touch their envelope.
/// Throws SingularPivot when the best pivot of a column falls below
/// 1e-14 * max|D A| = 1e-14.
inline LUFactors lu_factorize(const SparseMatrix& a) {
  const int n = a.rows();
  LUFactors f;
  f.n = n;
  f.pivot_row.resize(n);
  f.row_scale.assign(n, 1.0);
  double scaled_max = 0.0;
  for (int r = 0; r < n; ++r) {
    double m = 0.0;
    for (double v : a.row_vals(r)) m = std::max(m, std::abs(v));
    if (m > 0.0) f.row_scale[r] = 1.0 / m;
    scaled_max = std::max(scaled_max, m * f.row_scale[r]);
  }
  const double threshold = 1e-14 * scaled_max;

  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  auto first_col = [&](int r) { return a.row_size(r) ? a.row_cols(r).front() : n; };
  std::stable_sort(order.begin(), order.end(), [&](int x, int y) { return first_col(x) < first_col(y); });

  std::vector<detail::ActiveRow> active;
  std::vector<int> l_orig;  // row ids, remapped to positions at the end
  std::vector<int> pos_of_row(n, -1);
  std::size_t next = 0;

  for (int k = 0; k < n; ++k) {
    while (next < order.size() && first_col(order[next]) <= k) {
      const int r = order[next++];
      auto cols = a.row_cols(r);
      auto vals = a.row_vals(r);
      detail::ActiveRow row;
      row.orig = r;
      row.first = cols.front();
      row.v.assign(static_cast<std::size_t>(cols.back() - cols.front() + 1), 0.0);
      for (std::size_t e = 0; e < cols.size(); ++e) row.v[cols[e] - row.first] = vals[e] * f.row_scale[r];
      active.push_back(std::move(row));
    }

    int best = -1;
    double best_abs = 0.0;
    for (int s = 0; s < static_cast<int>(active.size()); ++s) {
      const double v = std::abs(active[s].at(k));
      if (v > best_abs || (v == best_abs && best >= 0 && v > 0.0 && active[s].orig < active[best].orig)) {
        best = s;
        best_abs = v;
      }
    }
    if (best < 0 || best_abs <= threshold) {
      throw Error(ErrorKind::SingularPivot, "pivot " + std::to_string(k) + " is " + std::to_string(best_abs) +
                                                " (threshold " + std::to_string(threshold) + ")");
    }

    std::swap(active[best], active.back());
    detail::ActiveRow pivot = std::move(active.back());
    active.pop_back();

    const int off = k - pivot.first;
    const int len = static_cast<int>(pivot.v.size()) - off;
    const double* urow = pivot.v.data() + off;
    f.u_val.insert(f.u_val.end(), urow, urow + len);
    f.u_ptr.push_back(static_cast<std::int64_t>(f.u_val.size()));
    f.pivot_row[k] = pivot.orig;
    pos_of_row[pivot.orig] = k;

    const double piv = urow[0];
    const int end = k + len;  // one past the last column of the pivot row
    for (auto& row : active) {
      const double ark = row.at(k);
      if (ark == 0.0) continue;
      const double m = ark / piv;
      l_orig.push_back(row.orig);
      f.l_val.push_back(m);
      const int need = end - row.first;
      if (need > static_cast<int>(row.v.size())) row.v.resize(need, 0.0);
      double* dst = row.v.data() + (k - row.first);
      dst[0] = 0.0;
      for (int c = 1; c < len; ++c) dst[c] -= m * urow[c];
    }
    f.l_ptr.push_back(static_cast<std::int64_t>(f.l_val.size()));
  }

  f.l_pos.resize(l_orig.size());
  for (std::size_t e = 0; e < l_orig.size(); ++e) f.l_pos[e] = pos_of_row[l_orig[e]];
  ++lu_factorization_count();
  return f;
}

/// Solves A x = b in place (b becomes x).
inline void lu_solve_inplace(const LUFactors& f, std::span<double> b, std::vector<double>& work) {
  if (static_cast<int>(b.size()) != f.n)
    throw Error(ErrorKind::DimensionMismatch, "rhs has " + std::to_string(b.size()) + " entries, expected " +
                                                  std::to_string(f.n));
  work.resize(f.n);
  for (int k = 0; k < f.n; ++k) work[k] = b[f.pivot_row[k]] * f.row_scale[f.pivot_row[k]];
  for (int k = 0; k < f.n; ++k) {
    const double yk = work[k];
    if (yk == 0.0) continue;
    for (auto e = f.l_ptr[k]; e < f.l_ptr[k + 1]; ++e) work[f.l_pos[e]] -= f.l_val[e] * yk;
  }
  for (int k = f.n - 1; k >= 0; --k) {
    auto u = f.u_row(k);
    double s = work[k];
    const double* x = work.data() + k;
    for (std::size_t c = 1; c < u.size(); ++c) s -= u[c] * x[c];
    work[k] = s / u[0];
  }
  std::copy(work.begin(), work.end(), b.begin());
}

inline std::vector<double> lu_solve(const LUFactors& f, std::span<const double> b) {
  std::vector<double> x(b.begin(), b.end());
  std::vector<double> work;
  lu_solve_inplace(f, x, work);
  return x;
}

/// Solves A^T x = b.
inline std::vector<double> lu_solve_transposed(const LUFactors& f, std::span<const double> b) {
  if (static_cast<int>(b.size()) != f.n)
    throw Error(ErrorKind::DimensionMismatch, "rhs has " + std::to_string(b.size()) + " entries, expected " +
                                                  std::to_string(f.n));
  std::vector<double> z(b.begin(), b.end());
  // U^T z = b
  for (int k = 0; k < f.n; ++k) {
    auto u = f.u_row(k);
    z[k] /= u[0];
    const double zk = z[k];
    double* tail = z.data() + k;
    for (std::size_t c = 1; c < u.size(); ++c) tail[c] -= u[c] * zk;
  }
  // L^T w = z
  for (int k = f.n - 1; k >= 0; --k) {
    double s = z[k];
    for (auto e = f.l_ptr[k]; e < f.l_ptr[k + 1]; ++e) s -= f.l_val[e] * z[f.l_pos[e]];
    z[k] = s;
  }
  std::vector<double> x(f.n);
  for (int k = 0; k < f.n; ++k) x[f.pivot_row[k]] = z[k] * f.row_scale[f.pivot_row[k]];
  return x;
}

struct CondEstimate {
  double value = 0.0;
  double sigma_max = 0.0;
  double sigma_min = 0.0;
  int iterations_max = 0;
  int iterations_min = 0;
  bool converged = false;
};

namespace detail {

inline double norm2(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

inline void normalize(std::span<double> v) {
  const double nv = norm2(v);
  for (double& x : v) x /= nv;
}

// Power iteration for the dominant eigenvalue of a symmetric positive
// operator. Stops once ||B v - mu v|| <= tol * mu.
template <class Apply>
double dominant_eigenvalue(int n, Apply&& apply, double tol, int max_iter, int& iterations, bool& converged) {
  std::mt19937_64 rng(0x5eed);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  std::vector<double> v(n), w(n);
  for (double& x : v) x = dist(rng);
  normalize(v);
  double mu = 0.0;
  converged = false;
  for (iterations = 1; iterations <= max_iter; ++iterations) {
    apply(v, w);
    mu = std::inner_product(v.begin(), v.end(), w.begin(), 0.0);
    double r2 = 0.0;
    for (int k = 0; k < n; ++k) r2 += (w[k] - mu * v[k]) * (w[k] - mu * v[k]);
    const double wn = norm2(w);
    for (int k = 0; k < n; ++k) v[k] = w[k] / wn;
    if (std::sqrt(r2) <= tol * mu) {
      converged = true;
      break;
    }
  }
  iterations = std::min(iterations, max_iter);
  return mu;
}

}  // namespace detail

/// 2-norm condition number sigma_max / sigma_min. sigma_max from power
/// iteration on A^T A, sigma_min from inverse iteration through the LU
/// factors. `converged` is false when either iteration hit the cap.
inline CondEstimate estimate_cond2(const SparseMatrix& a, const LUFactors& f, double tol = 1e-4,
                                   int max_iter = 10000) {
  const int n = a.rows();
  CondEstimate est;
  std::vector<double> tmp(n);
  bool conv_max = false, conv_min = false;

  const double lmax = detail::dominant_eigenvalue(
      n,
      [&](std::span<const double> v, std::span<double> w) {
        a.multiply(v, tmp);
        a.multiply_transposed(tmp, w);
      },
      tol, max_iter, est.iterations_max, conv_max);

  const double inv_lmin = detail::dominant_eigenvalue(
      n,
      [&](std::span<const double> v, std::span<double> w) {
        auto y = lu_solve_transposed(f, v);
        auto x = lu_solve(f, y);
        std::copy(x.begin(), x.end(), w.begin());
      },
      tol, max_iter, est.iterations_min, conv_min);

  est.sigma_max = std::sqrt(lmax);
  est.sigma_min = 1.0 / std::sqrt(inv_lmin);
  est.value = est.sigma_max / est.sigma_min;
  est.converged = conv_max && conv_min;
  return est;
}

}  // namespace apmm
