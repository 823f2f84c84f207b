#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "apmm/config.hpp"
#include "apmm/errors.hpp"

namespace apmm {

enum class NodeClass : std::uint8_t {
  Interior,
  SigmaParBottom,      // y = 0
  SigmaParTop,         // y = 1
  SigmaParLimiterTop,  // y = l over the limiter (full mode)
  FaceWest,            // x = -L, 0 <= y < l
  FaceEast,            // x = +L, 0 <= y < l
  PeriodicSeam,        // x = +-0.5, l < y < 1 (full mode)
  AnchorLine,          // x = -L, any y; only ever a secondary flag
};

inline const char* to_string(NodeClass c) {
  switch (c) {
    case NodeClass::Interior: return "Interior";
    case NodeClass::SigmaParBottom: return "SigmaParBottom";
    case NodeClass::SigmaParTop: return "SigmaParTop";
    case NodeClass::SigmaParLimiterTop: return "SigmaParLimiterTop";
    case NodeClass::FaceWest: return "FaceWest";
    case NodeClass::FaceEast: return "FaceEast";
    case NodeClass::PeriodicSeam: return "PeriodicSeam";
    case NodeClass::AnchorLine: return "AnchorLine";
  }
  return "?";
}

/// Primary class of a node plus any secondary classes it also belongs to.
struct NodeClassification {
  NodeClass primary = NodeClass::Interior;
  std::uint16_t extra = 0;
  bool ghost = false;

  bool has(NodeClass c) const {
    return primary == c || (extra & (1u << static_cast<unsigned>(c))) != 0;
  }
  void add(NodeClass c) {
    if (c != primary) extra |= static_cast<std::uint16_t>(1u << static_cast<unsigned>(c));
  }
};

enum class Field : std::uint8_t { Phi = 0, Q = 1 };

/// Structured node-based mesh of the plasma domain.
///
/// Column index `i` maps to x = x_origin + i*dx and row `j` to y = j*dy.
/// Strip mode: x_origin = -L, plasma columns 0..Nx-1, ghost columns -1 and Nx.
/// Full mode: x_origin = -0.5, columns 0..1/dx; the x = +0.5 column aliases
/// the x = -0.5 column on the periodic band. Ghost nodes sit at I1-1 and I2+1
/// below the limiter top.
///
/// Nodes (plasma and ghost) carry a dense id. Strip mode numbers them
/// column-major, full mode row-major, which keeps the assembled systems banded.
class Grid {
 public:
  GeometryMode mode() const { return mode_; }
  double dx() const { return dx_; }
  double dy() const { return dy_; }
  int i_min() const { return i_min_; }
  int i_max() const { return i_max_; }
  int ny() const { return ny_; }
  /// Number of plasma columns between the faces, 2L/dx + 1.
  int nx_plasma() const { return I2_ - I1_ + 1; }
  int I1() const { return I1_; }
  int I2() const { return I2_; }
  /// Row index of y = l (ny-1 in strip mode).
  int j_limiter() const { return jl_; }
  /// Face equations (and ghost nodes) exist for rows j < face_rows().
  int face_rows() const { return mode_ == GeometryMode::Strip ? ny_ : jl_; }

  double x(int i) const { return x_origin_ + i * dx_; }
  double y(int j) const { return j * dy_; }

  bool in_range(int i, int j) const { return i >= i_min_ && i <= i_max_ && j >= 0 && j < ny_; }

  /// Node id at (i, j), or -1 when the position holds no unknown.
  int node(int i, int j) const {
    if (!in_range(i, j)) return -1;
    return ids_[(i - i_min_) * ny_ + j];
  }

  /// Neighbour `offset` columns away, wrapping across the periodic seam.
  int x_neighbor(int i, int j, int offset) const {
    int ii = i + offset;
    if (mode_ == GeometryMode::Full && j >= jl_) {
      const int period = i_max_;  // number of distinct columns on the band
      if (ii < 0) ii += period;
      if (ii > i_max_) ii -= period;
    }
    return node(ii, j);
  }

  /// Lowest row holding plasma in column i.
  int column_y_begin(int i) const {
    if (mode_ == GeometryMode::Full && (i < I1_ || i > I2_)) return jl_;
    return 0;
  }

  bool is_plasma_column(int i) const {
    return mode_ == GeometryMode::Strip ? (i >= I1_ && i <= I2_) : (i >= 0 && i <= i_max_);
  }

  int node_count() const { return static_cast<int>(pos_.size()); }
  int plasma_count() const { return node_count() - ghost_count(); }
  int ghost_count() const { return static_cast<int>(ghosts_.size()); }
  bool is_ghost(int id) const { return ghost_flag_[id] != 0; }
  std::span<const int> ghost_nodes() const { return ghosts_; }

  /// Representative (i, j) of a node.
  std::pair<int, int> position(int id) const { return pos_[id]; }

  int ghost_west(int j) const { return j < face_rows() ? node(I1_ - 1, j) : -1; }
  int ghost_east(int j) const { return j < face_rows() ? node(I2_ + 1, j) : -1; }

  /// Trapezoidal quadrature weight of each node (zero on ghosts).
  std::span<const double> weights() const { return weights_; }

  int column_index(double xv) const { return static_cast<int>(std::lround((xv - x_origin_) / dx_)); }
  int row_index(double yv) const { return static_cast<int>(std::lround(yv / dy_)); }

  /// True when (x, y) lies strictly inside the plasma domain.
  bool contains(double xv, double yv) const {
    if (!(yv > 0.0 && yv < 1.0)) return false;
    if (std::abs(xv) < L_) return true;
    return mode_ == GeometryMode::Full && std::abs(xv) < 0.5 && yv > l_;
  }

 private:
  friend Grid build_grid(const PhysConfig&, const DiscConfig&);

  GeometryMode mode_ = GeometryMode::Strip;
  double dx_ = 0, dy_ = 0, x_origin_ = 0, L_ = 0, l_ = 1;
  int i_min_ = 0, i_max_ = 0, ny_ = 0, I1_ = 0, I2_ = 0, jl_ = 0;
  std::vector<int> ids_;
  std::vector<std::pair<int, int>> pos_;
  std::vector<char> ghost_flag_;
  std::vector<int> ghosts_;
  std::vector<double> weights_;
};

/// Maps (field, node) to a row/column of a linear system. AP systems carry
/// phi and q interleaved per node, the naive system phi only.
struct Layout {
  int fields = 2;

  int index(Field f, int node) const { return node * fields + static_cast<int>(f); }
  int size(const Grid& g) const { return g.node_count() * fields; }
};

inline Grid build_grid(const PhysConfig& phys, const DiscConfig& disc) {
  require_valid(phys, disc);
  Grid g;
  g.mode_ = disc.mode;
  g.dx_ = disc.dx;
  g.dy_ = disc.dy;
  g.L_ = phys.L;
  g.l_ = phys.l;
  g.ny_ = detail::count_steps(1.0, disc.dy) + 1;

  if (disc.mode == GeometryMode::Strip) {
    const int nx = detail::count_steps(2.0 * phys.L, disc.dx) + 1;
    g.x_origin_ = -phys.L;
    g.I1_ = 0;
    g.I2_ = nx - 1;
    g.i_min_ = -1;
    g.i_max_ = nx;
    g.jl_ = g.ny_ - 1;
  } else {
    g.x_origin_ = -0.5;
    g.I1_ = detail::count_steps(0.5 - phys.L, disc.dx);
    g.I2_ = g.I1_ + detail::count_steps(2.0 * phys.L, disc.dx);
    g.i_min_ = 0;
    g.i_max_ = detail::count_steps(1.0, disc.dx);
    g.jl_ = detail::count_steps(phys.l, disc.dy);
  }

  const int ncols = g.i_max_ - g.i_min_ + 1;
  g.ids_.assign(ncols * g.ny_, -1);

  enum class Kind { None, Plasma, Ghost, Alias };
  auto kind_at = [&](int i, int j) {
    if (g.mode_ == GeometryMode::Strip) {
      if (i < g.I1_ || i > g.I2_) return Kind::Ghost;
      return Kind::Plasma;
    }
    if (i >= g.I1_ && i <= g.I2_) return Kind::Plasma;
    if (j >= g.jl_) return i == g.i_max_ ? Kind::Alias : Kind::Plasma;
    if (i == g.I1_ - 1 || i == g.I2_ + 1) return Kind::Ghost;
    return Kind::None;
  };
  auto assign = [&](int i, int j) {
    const Kind k = kind_at(i, j);
    if (k != Kind::Plasma && k != Kind::Ghost) return;
    const int id = static_cast<int>(g.pos_.size());
    g.ids_[(i - g.i_min_) * g.ny_ + j] = id;
    g.pos_.emplace_back(i, j);
    g.ghost_flag_.push_back(k == Kind::Ghost ? 1 : 0);
    if (k == Kind::Ghost) g.ghosts_.push_back(id);
  };

  if (g.mode_ == GeometryMode::Strip) {
    for (int i = g.i_min_; i <= g.i_max_; ++i)
      for (int j = 0; j < g.ny_; ++j) assign(i, j);
  } else {
    for (int j = 0; j < g.ny_; ++j)
      for (int i = g.i_min_; i <= g.i_max_; ++i) assign(i, j);
    for (int j = g.jl_; j < g.ny_; ++j)
      g.ids_[(g.i_max_ - g.i_min_) * g.ny_ + j] = g.node(0, j);
  }

  // Dual-cell quadrants inside the domain; aliased seam columns fold onto
  // their representative.
  g.weights_.assign(g.pos_.size(), 0.0);
  const double quarter = 0.25 * g.dx_ * g.dy_;
  for (int i = g.i_min_; i <= g.i_max_; ++i) {
    for (int j = 0; j < g.ny_; ++j) {
      const int id = g.node(i, j);
      if (id < 0 || g.is_ghost(id)) continue;
      for (int sx : {-1, 1})
        for (int sy : {-1, 1})
          if (g.contains(g.x(i) + 0.25 * sx * g.dx_, g.y(j) + 0.25 * sy * g.dy_))
            g.weights_[id] += quarter;
    }
  }
  return g;
}

/// Classification of a plasma or ghost position. Throws OutOfDomain for
/// positions inside the limiter or outside the mesh.
inline NodeClassification classify_node(const Grid& g, int i, int j) {
  const int id = g.node(i, j);
  if (id < 0) {
    throw Error(ErrorKind::OutOfDomain,
                "no node at (i=" + std::to_string(i) + ", j=" + std::to_string(j) + ")");
  }
  NodeClassification c;
  if (g.is_ghost(id)) {
    c.primary = i < g.I1() ? NodeClass::FaceWest : NodeClass::FaceEast;
    c.ghost = true;
    return c;
  }
  const bool full = g.mode() == GeometryMode::Full;
  const bool band_column = full && (i < g.I1() || i > g.I2());
  const int face_top = full ? g.j_limiter() : g.ny() - 1;
  const bool seam = band_column && (i == g.i_min() || i == g.i_max());

  if (i == g.I1() && j <= face_top) {
    c.primary = NodeClass::FaceWest;
  } else if (i == g.I2() && j <= face_top) {
    c.primary = NodeClass::FaceEast;
  } else if (j == 0) {
    c.primary = NodeClass::SigmaParBottom;
  } else if (j == g.ny() - 1) {
    c.primary = NodeClass::SigmaParTop;
  } else if (band_column && j == g.j_limiter()) {
    c.primary = NodeClass::SigmaParLimiterTop;
  } else if (seam) {
    c.primary = NodeClass::PeriodicSeam;
  } else {
    c.primary = NodeClass::Interior;
  }

  if (i == g.I1()) c.add(NodeClass::AnchorLine);
  if (j == 0) c.add(NodeClass::SigmaParBottom);
  if (j == g.ny() - 1) c.add(NodeClass::SigmaParTop);
  if (full && j == g.j_limiter() && (band_column || i == g.I1() || i == g.I2()))
    c.add(NodeClass::SigmaParLimiterTop);
  if (seam) c.add(NodeClass::PeriodicSeam);
  return c;
}

/// Classification by coordinates; the point must sit on a mesh node.
inline NodeClassification classify_point(const Grid& g, double x, double y) {
  return classify_node(g, g.column_index(x), g.row_index(y));
}

}  // namespace apmm
