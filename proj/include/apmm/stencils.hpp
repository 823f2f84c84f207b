#pragma once

#include <algorithm>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "apmm/errors.hpp"
#include "apmm/geometry.hpp"

namespace apmm {

/// One finite-difference row: (unknown index, coefficient) pairs sorted by
/// index, duplicates merged.
struct StencilRow {
  std::vector<std::pair<int, double>> entries;

  void add(int index, double coef) {
    auto it = std::lower_bound(entries.begin(), entries.end(), index,
                               [](const auto& e, int k) { return e.first < k; });
    if (it != entries.end() && it->first == index)
      it->second += coef;
    else
      entries.insert(it, {index, coef});
  }

  void add(const StencilRow& other, double scale) {
    for (auto [k, c] : other.entries) add(k, scale * c);
  }

  double coefficient(int index) const {
    for (auto [k, c] : entries)
      if (k == index) return c;
    return 0.0;
  }

  double sum() const {
    double s = 0.0;
    for (auto [k, c] : entries) s += c;
    return s;
  }

  /// Row applied to a vector indexed like the row's unknowns.
  double apply(std::span<const double> values) const {
    double s = 0.0;
    for (auto [k, c] : entries) s += c * values[k];
    return s;
  }
};

namespace detail {

inline std::string where(int i, int j) {
  return "(i=" + std::to_string(i) + ", j=" + std::to_string(j) + ")";
}

inline int require_node(const Grid& g, int i, int j) {
  const int id = g.node(i, j);
  if (id < 0 || g.is_ghost(id)) throw Error(ErrorKind::OutOfDomain, "no plasma node at " + where(i, j));
  return id;
}

inline int require_x_neighbor(const Grid& g, int i, int j, int offset) {
  const int id = g.x_neighbor(i, j, offset);
  if (id < 0) throw Error(ErrorKind::MissingNeighbor, "no x-neighbour " + std::to_string(offset) + " of " + where(i, j));
  return id;
}

// Row index after even reflection about the ends of the column's y range.
// Reflection encodes the Sigma_par closure phi_{-k} = phi_{k}.
inline int reflect_row(int j, int lo, int hi) {
  if (j < lo) j = 2 * lo - j;
  if (j > hi) j = 2 * hi - j;
  return j;
}

template <std::size_t K>
StencilRow y_stencil(const Grid& g, Layout layout, Field f, int i, int j, const double (&weights)[K],
                     double scale) {
  constexpr int half = static_cast<int>(K / 2);
  require_node(g, i, j);
  const int lo = g.column_y_begin(i);
  const int hi = g.ny() - 1;
  if (hi - lo < 2 * half) {
    throw Error(ErrorKind::GridTooCoarse,
                "column " + std::to_string(i) + " has " + std::to_string(hi - lo + 1) + " rows, stencil needs " +
                    std::to_string(2 * half + 1));
  }
  StencilRow row;
  for (int k = -half; k <= half; ++k) {
    const int jj = reflect_row(j + k, lo, hi);
    row.add(layout.index(f, require_node(g, i, jj)), weights[k + half] * scale);
  }
  return row;
}

}  // namespace detail

/// Central first difference in x.
inline StencilRow dx_central_row(const Grid& g, Layout layout, Field f, int i, int j) {
  detail::require_node(g, i, j);
  const double c = 1.0 / (2.0 * g.dx());
  StencilRow row;
  row.add(layout.index(f, detail::require_x_neighbor(g, i, j, -1)), -c);
  row.add(layout.index(f, detail::require_x_neighbor(g, i, j, +1)), c);
  return row;
}

/// Central second difference in x, (1, -2, 1)/dx^2.
inline StencilRow dxx_row(const Grid& g, Layout layout, Field f, int i, int j) {
  const int centre = detail::require_node(g, i, j);
  const double c = 1.0 / (g.dx() * g.dx());
  StencilRow row;
  row.add(layout.index(f, detail::require_x_neighbor(g, i, j, -1)), c);
  row.add(layout.index(f, centre), -2.0 * c);
  row.add(layout.index(f, detail::require_x_neighbor(g, i, j, +1)), c);
  return row;
}

/// Second difference in y with the dy(phi) = 0 ghost folded in on Sigma_par.
inline StencilRow dyy_row(const Grid& g, Layout layout, Field f, int i, int j) {
  static constexpr double w[3] = {1.0, -2.0, 1.0};
  return detail::y_stencil(g, layout, f, i, j, w, 1.0 / (g.dy() * g.dy()));
}

/// Fourth difference in y, (1, -4, 6, -4, 1)/dy^4, with ghosts
/// phi_{-1} = phi_1 and phi_{-2} = phi_2 folded in on Sigma_par. Needs at
/// least five rows in the column.
inline StencilRow dyyyy_row(const Grid& g, Layout layout, Field f, int i, int j) {
  static constexpr double w[5] = {1.0, -4.0, 6.0, -4.0, 1.0};
  const double h2 = g.dy() * g.dy();
  return detail::y_stencil(g, layout, f, i, j, w, 1.0 / (h2 * h2));
}

}  // namespace apmm
