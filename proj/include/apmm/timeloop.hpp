#pragma once

#include <cmath>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "apmm/assembly.hpp"
#include "apmm/config.hpp"
#include "apmm/errors.hpp"
#include "apmm/geometry.hpp"
#include "apmm/linsolve.hpp"

namespace apmm {

/// Nodal fields (indexed by grid node id, ghosts included) at t = n * dt.
/// `q` is empty for the naive scheme.
struct State {
  double t = 0.0;
  int n = 0;
  std::vector<double> phi;
  std::vector<double> q;
  /// Set when the initial data varied in x; such data is accepted but the
  /// well-posedness theory assumes x-independent initial data.
  bool x_dependent_initial = false;
};

using InitialData = std::function<double(double x, double y)>;

/// phi^0 sampled from phi_ini on plasma nodes (ghosts copy their face
/// neighbour), q^0 = 0.
inline State init_state(const Grid& g, Scheme scheme, const InitialData& phi_ini) {
  State s;
  s.phi.assign(g.node_count(), 0.0);
  if (scheme == Scheme::AP) s.q.assign(g.node_count(), 0.0);
  for (int id = 0; id < g.node_count(); ++id) {
    auto [i, j] = g.position(id);
    if (g.is_ghost(id)) i = i < g.I1() ? g.I1() : g.I2();
    const double v = phi_ini(g.x(i), g.y(j));
    if (!std::isfinite(v))
      throw Error(ErrorKind::NonFiniteInitial, "phi_ini is not finite at x=" + format_double(g.x(i)) +
                                                   ", y=" + format_double(g.y(j)));
    s.phi[id] = v;
  }
  for (int id = 0; id < g.node_count() && !s.x_dependent_initial; ++id) {
    const auto [i, j] = g.position(id);
    const int ref = g.node(g.I1(), j);
    if (std::abs(s.phi[id] - s.phi[ref]) > 1e-12 * std::max(1.0, std::abs(s.phi[ref])))
      s.x_dependent_initial = true;
  }
  return s;
}

namespace detail {

// Solves A x^{n+1} = b in increment form, x^{n+1} = x^n + A^{-1}(b - A x^n),
// with the residual accumulated in extended precision. The LU rounding then
// scales with the increment rather than with the state.
inline State advance(const State& s, const SystemBlocks& system, const LUFactors& factors, const Grid& g,
                     std::vector<double> b, double t_next, std::vector<double>& x, std::vector<double>& work) {
  const Layout lay = system.layout;
  const bool ap = system.scheme == Scheme::AP;
  x.assign(lay.size(g), 0.0);
  for (int id = 0; id < g.node_count(); ++id) {
    x[lay.index(Field::Phi, id)] = s.phi[id];
    if (ap) x[lay.index(Field::Q, id)] = s.q.empty() ? 0.0 : s.q[id];
  }
  system.matrix.residual(x, b, b);
  lu_solve_inplace(factors, b, work);

  State out;
  out.t = t_next;
  out.n = s.n + 1;
  out.x_dependent_initial = s.x_dependent_initial;
  out.phi.resize(g.node_count());
  if (ap) out.q.resize(g.node_count());
  for (int id = 0; id < g.node_count(); ++id) {
    out.phi[id] = x[lay.index(Field::Phi, id)] + b[lay.index(Field::Phi, id)];
    if (ap) out.q[id] = x[lay.index(Field::Q, id)] + b[lay.index(Field::Q, id)];
  }
  for (double v : out.phi)
    if (!std::isfinite(v)) throw Error(ErrorKind::NonFiniteSource, "solution became non-finite");
  return out;
}

}  // namespace detail

/// Owns the constant matrix of one run and its factorization.
class Integrator {
 public:
  Integrator(const Grid& g, const PhysConfig& phys, const DiscConfig& disc, Scheme scheme)
      : grid_(&g),
        disc_(disc),
        system_(assemble_matrix(scheme, g, phys, disc)),
        factors_(lu_factorize(system_.matrix)),
        rhs_(g, phys, disc, scheme) {}

  const SystemBlocks& system() const { return system_; }
  const LUFactors& factors() const { return factors_; }
  Scheme scheme() const { return system_.scheme; }

  /// One semi-implicit Euler step; reuses the factorization.
  State step(const State& s, const SourceTerms& src) {
    const double t_next = (s.n + 1) * disc_.dt;
    return detail::advance(s, system_, factors_, *grid_, rhs_.assemble(s.phi, src, t_next), t_next, x_, work_);
  }

 private:
  const Grid* grid_;
  DiscConfig disc_;
  SystemBlocks system_;
  LUFactors factors_;
  RhsAssembler rhs_;
  std::vector<double> x_, work_;
};

/// Single step against prebuilt factors.
inline State step(const State& s, const LUFactors& factors, const SystemBlocks& system, const Grid& g,
                  const PhysConfig& phys, const DiscConfig& disc, const SourceTerms& src) {
  const double t_next = (s.n + 1) * disc.dt;
  std::vector<double> x, work;
  return detail::advance(s, system, factors, g, RhsAssembler(g, phys, disc, system.scheme).assemble(s.phi, src, t_next),
                         t_next, x, work);
}

using Observer = std::function<void(const State&)>;

struct RunResult {
  State final_state;
  int steps = 0;
  long factorizations = 0;
  /// T/dt was not an integer; ceil(T/dt) steps were taken.
  bool non_integral_step_count = false;
};

/// Number of steps to reach T: T/dt when integral up to rounding, else its ceiling.
inline int step_count(double T, double dt, bool* non_integral = nullptr) {
  const double r = T / dt;
  const bool integral = std::abs(r - std::round(r)) <= 1e-9 * std::max(1.0, r);
  if (non_integral) *non_integral = !integral;
  return integral ? static_cast<int>(std::lround(r)) : static_cast<int>(std::ceil(r));
}

/// Factorizes once, then steps to T calling every observer after each step.
inline RunResult run(const Grid& g, const PhysConfig& phys, const DiscConfig& disc, Scheme scheme,
                     const SourceTerms& src, const InitialData& phi_ini, const std::vector<Observer>& observers = {}) {
  RunResult result;
  result.steps = step_count(phys.T, disc.dt, &result.non_integral_step_count);
  State s = init_state(g, scheme, phi_ini);
  if (result.steps == 0) {
    result.final_state = std::move(s);
    return result;
  }
  const long before = lu_factorization_count().load();
  Integrator integ(g, phys, disc, scheme);
  for (int k = 0; k < result.steps; ++k) {
    s = integ.step(s, src);
    for (const auto& obs : observers) obs(s);
  }
  result.factorizations = lu_factorization_count().load() - before;
  result.final_state = std::move(s);
  return result;
}

}  // namespace apmm
