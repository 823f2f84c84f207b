#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "apmm/config.hpp"
#include "apmm/errors.hpp"
#include "apmm/geometry.hpp"
#include "apmm/sparse.hpp"
#include "apmm/stencils.hpp"

namespace apmm {

enum class Scheme { AP, Naive };

inline const char* to_string(Scheme s) { return s == Scheme::AP ? "ap" : "naive"; }

inline Layout layout_for(Scheme s) { return Layout{s == Scheme::AP ? 2 : 1}; }

enum class RowKind : std::uint8_t { Evolution, Coupling, Anchor, FaceFluxMatch, FaceSheath };

/// The constant system matrix of one scheme, with the equation each row holds.
struct SystemBlocks {
  SparseMatrix matrix;
  std::vector<RowKind> kinds;
  Scheme scheme = Scheme::AP;
  Layout layout;

  int count(RowKind k) const { return static_cast<int>(std::count(kinds.begin(), kinds.end(), k)); }
};

/// Right-hand side data sampled at t_{n+1}: the volume source S and optional
/// extra terms added to the west/east sheath conditions (written in q form,
/// i.e. dx q = (1 - e^{Lambda - phi}) + west).
struct SourceTerms {
  std::function<double(double t, double x, double y)> source;
  std::function<double(double t, double y)> west;
  std::function<double(double t, double y)> east;
};

inline SourceTerms zero_source() {
  return {[](double, double, double) { return 0.0; }, {}, {}};
}

namespace detail {

inline void face_rows_ap(const Grid& g, const PhysConfig& phys, SparseBuilder& b, std::vector<RowKind>& kinds) {
  const Layout lay{2};
  for (int j = 0; j < g.face_rows(); ++j) {
    for (int side = 0; side < 2; ++side) {
      const int ghost = side == 0 ? g.ghost_west(j) : g.ghost_east(j);
      const int i = side == 0 ? g.I1() : g.I2();
      const int face = g.node(i, j);

      StencilRow flux = dx_central_row(g, lay, Field::Phi, i, j);
      flux.add(dx_central_row(g, lay, Field::Q, i, j), -phys.eta);
      b.set_row(lay.index(Field::Phi, ghost), std::move(flux));
      kinds[lay.index(Field::Phi, ghost)] = RowKind::FaceFluxMatch;

      // Frozen-slope linearisation of the sheath term: -phi on the west
      // face, +phi on the east face.
      StencilRow sheath = dx_central_row(g, lay, Field::Q, i, j);
      sheath.add(lay.index(Field::Phi, face), side == 0 ? -1.0 : 1.0);
      b.set_row(lay.index(Field::Q, ghost), std::move(sheath));
      kinds[lay.index(Field::Q, ghost)] = RowKind::FaceSheath;
    }
  }
}

// Makes the phi part of an evolution row annihilate constants exactly in
// floating point, so that phi = Lambda is an exact discrete fixed point.
// Coefficients are rounded to a common power-of-two quantum 2^-47 below the
// largest one; sums of a few such values are then exact and the diagonal is
// set to minus the sum of the others.
inline void annihilate_constants(StencilRow& row, const Layout& lay, int diag) {
  double biggest = 0.0;
  for (auto [k, c] : row.entries)
    if (k % lay.fields == static_cast<int>(Field::Phi)) biggest = std::max(biggest, std::abs(c));
  if (biggest == 0.0) return;
  const double quantum = std::ldexp(1.0, std::ilogb(biggest) - 47);
  double off = 0.0;
  for (auto& [k, c] : row.entries) {
    if (k % lay.fields != static_cast<int>(Field::Phi) || k == diag) continue;
    c = std::nearbyint(c / quantum) * quantum;
    off += c;
  }
  for (auto& [k, c] : row.entries)
    if (k == diag) c = -off;
}

}  // namespace detail

/// Micro-macro system in (phi, q): evolution rows at every plasma node,
/// coupling rows dxx(phi) = eta dxx(q) except on x = -L where q = 0 anchors
/// the gauge, and flux-match plus sheath rows on each face.
inline SystemBlocks assemble_ap_matrix(const Grid& g, const PhysConfig& phys, const DiscConfig& disc) {
  SystemBlocks sys;
  sys.scheme = Scheme::AP;
  sys.layout = layout_for(Scheme::AP);
  const Layout lay = sys.layout;
  const int n = lay.size(g);
  SparseBuilder b(n);
  sys.kinds.assign(n, RowKind::Evolution);

  for (int id = 0; id < g.node_count(); ++id) {
    if (g.is_ghost(id)) continue;
    const auto [i, j] = g.position(id);

    StencilRow evo;
    evo.add(dyy_row(g, lay, Field::Phi, i, j), -1.0 / disc.dt);
    evo.add(dxx_row(g, lay, Field::Q, i, j), -1.0);
    evo.add(dyyyy_row(g, lay, Field::Phi, i, j), phys.nu);
    detail::annihilate_constants(evo, lay, lay.index(Field::Phi, id));
    b.set_row(lay.index(Field::Phi, id), std::move(evo));
    sys.kinds[lay.index(Field::Phi, id)] = RowKind::Evolution;

    const int qrow = lay.index(Field::Q, id);
    if (i == g.I1()) {
      StencilRow anchor;
      anchor.add(qrow, 1.0);
      b.set_row(qrow, std::move(anchor));
      sys.kinds[qrow] = RowKind::Anchor;
    } else {
      StencilRow coupling = dxx_row(g, lay, Field::Phi, i, j);
      coupling.add(dxx_row(g, lay, Field::Q, i, j), -phys.eta);
      b.set_row(qrow, std::move(coupling));
      sys.kinds[qrow] = RowKind::Coupling;
    }
  }
  detail::face_rows_ap(g, phys, b, sys.kinds);
  sys.matrix = b.build();
  return sys;
}

/// Single-field discretisation of the stiff model; divides by eta.
inline SystemBlocks assemble_naive_matrix(const Grid& g, const PhysConfig& phys, const DiscConfig& disc) {
  if (!(phys.eta > 0.0)) throw Error(ErrorKind::EtaZeroUndefined, "the naive scheme needs eta > 0");
  SystemBlocks sys;
  sys.scheme = Scheme::Naive;
  sys.layout = layout_for(Scheme::Naive);
  const Layout lay = sys.layout;
  SparseBuilder b(lay.size(g));
  sys.kinds.assign(lay.size(g), RowKind::Evolution);

  for (int id = 0; id < g.node_count(); ++id) {
    if (g.is_ghost(id)) continue;
    const auto [i, j] = g.position(id);
    StencilRow evo;
    evo.add(dyy_row(g, lay, Field::Phi, i, j), -1.0 / disc.dt);
    evo.add(dxx_row(g, lay, Field::Phi, i, j), -1.0 / phys.eta);
    evo.add(dyyyy_row(g, lay, Field::Phi, i, j), phys.nu);
    detail::annihilate_constants(evo, lay, id);
    b.set_row(id, std::move(evo));
  }
  for (int j = 0; j < g.face_rows(); ++j) {
    for (int side = 0; side < 2; ++side) {
      const int ghost = side == 0 ? g.ghost_west(j) : g.ghost_east(j);
      const int i = side == 0 ? g.I1() : g.I2();
      StencilRow sheath = dx_central_row(g, lay, Field::Phi, i, j);
      sheath.add(g.node(i, j), side == 0 ? -phys.eta : phys.eta);
      b.set_row(ghost, std::move(sheath));
      sys.kinds[ghost] = RowKind::FaceSheath;
    }
  }
  sys.matrix = b.build();
  return sys;
}

inline SystemBlocks assemble_matrix(Scheme s, const Grid& g, const PhysConfig& phys, const DiscConfig& disc) {
  return s == Scheme::AP ? assemble_ap_matrix(g, phys, disc) : assemble_naive_matrix(g, phys, disc);
}

/// Per-step right-hand side. The parts that do not depend on the data (the
/// y second difference of the previous field, node coordinates) are built
/// once; `assemble` then costs one sparse product plus source sampling.
class RhsAssembler {
 public:
  RhsAssembler(const Grid& g, const PhysConfig& phys, const DiscConfig& disc, Scheme scheme)
      : grid_(&g), phys_(phys), disc_(disc), scheme_(scheme), layout_(layout_for(scheme)) {
    if (scheme == Scheme::Naive && !(phys.eta > 0.0))
      throw Error(ErrorKind::EtaZeroUndefined, "the naive scheme needs eta > 0");
    // Ghost rows stay empty.
    dyy_.n = g.node_count();
    for (int id = 0; id < g.node_count(); ++id) {
      if (!g.is_ghost(id)) {
        const auto [i, j] = g.position(id);
        for (auto [c, v] : dyy_row(g, Layout{1}, Field::Phi, i, j).entries) {
          dyy_.col.push_back(c);
          dyy_.val.push_back(v);
        }
      }
      dyy_.row_ptr.push_back(static_cast<int>(dyy_.col.size()));
    }
    dyy_phi_.resize(g.node_count());
  }

  std::vector<double> assemble(std::span<const double> phi_n, const SourceTerms& src, double t_next) {
    const Grid& g = *grid_;
    if (static_cast<int>(phi_n.size()) != g.node_count())
      throw Error(ErrorKind::DimensionMismatch, "phi field size does not match the grid");
    std::vector<double> rhs(layout_.size(g), 0.0);
    dyy_.multiply(phi_n, dyy_phi_);

    for (int id = 0; id < g.node_count(); ++id) {
      if (g.is_ghost(id)) continue;
      const auto [i, j] = g.position(id);
      const double s = src.source ? src.source(t_next, g.x(i), g.y(j)) : 0.0;
      if (!std::isfinite(s))
        throw Error(ErrorKind::NonFiniteSource, "source is not finite at t=" + format_double(t_next) +
                                                    ", x=" + format_double(g.x(i)) + ", y=" + format_double(g.y(j)));
      rhs[layout_.index(Field::Phi, id)] = -dyy_phi_[id] / disc_.dt + s;
    }

    const double lam = phys_.lambda_ref;
    const double scale = scheme_ == Scheme::AP ? 1.0 : phys_.eta;
    const int sheath_field = scheme_ == Scheme::AP ? 1 : 0;
    for (int j = 0; j < g.face_rows(); ++j) {
      const double y = g.y(j);
      const double pw = phi_n[g.node(g.I1(), j)];
      const double pe = phi_n[g.node(g.I2(), j)];
      double west = 1.0 - std::exp(lam - pw) - pw;
      double east = -(1.0 - std::exp(lam - pe)) + pe;
      if (src.west) west += src.west(t_next, y);
      if (src.east) east += src.east(t_next, y);
      if (!std::isfinite(west) || !std::isfinite(east))
        throw Error(ErrorKind::NonFiniteSource, "sheath data is not finite at y=" + format_double(y));
      rhs[g.ghost_west(j) * layout_.fields + sheath_field] = scale * west;
      rhs[g.ghost_east(j) * layout_.fields + sheath_field] = scale * east;
    }
    return rhs;
  }

 private:
  const Grid* grid_;
  PhysConfig phys_;
  DiscConfig disc_;
  Scheme scheme_;
  Layout layout_;
  SparseMatrix dyy_;
  std::vector<double> dyy_phi_;
};

/// Evolution rows: -Dyy(phi_n)/dt + S(t_{n+1}); sheath rows carry the
/// explicit part of the linearised exponential; other rows are zero.
inline std::vector<double> assemble_ap_rhs(const Grid& g, const PhysConfig& phys, const DiscConfig& disc,
                                           std::span<const double> phi_n, const SourceTerms& src, double t_next) {
  return RhsAssembler(g, phys, disc, Scheme::AP).assemble(phi_n, src, t_next);
}

/// As assemble_ap_rhs, with sheath rows scaled by eta.
inline std::vector<double> assemble_naive_rhs(const Grid& g, const PhysConfig& phys, const DiscConfig& disc,
                                              std::span<const double> phi_n, const SourceTerms& src,
                                              double t_next) {
  return RhsAssembler(g, phys, disc, Scheme::Naive).assemble(phi_n, src, t_next);
}

}  // namespace apmm
