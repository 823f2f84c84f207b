#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "apmm/assembly.hpp"
#include "apmm/config.hpp"
#include "apmm/errors.hpp"
#include "apmm/geometry.hpp"
#include "apmm/linsolve.hpp"
#include "apmm/timeloop.hpp"

namespace apmm {

// Manufactured solutions are templated on the scalar so tests can evaluate
// them in extended precision.

enum class MmsVariant { Corrected, Literal, SmoothFallback };

inline const char* to_string(MmsVariant v) {
  switch (v) {
    case MmsVariant::Corrected: return "corrected";
    case MmsVariant::Literal: return "literal";
    case MmsVariant::SmoothFallback: return "smooth";
  }
  return "?";
}

namespace detail {

template <class Real>
Real pi_v() {
  using std::acos;
  return acos(Real(-1));
}

// w(t, y) and its derivatives for the log term B = -ln w of the two Eq.-style
// solutions. Corrected: w = 1 - c cos(pi y). Literal: w = 1 - c sec(pi y).
// c = 1.25 t^2 / pi.
template <class Real>
struct LogArg {
  Real w, w1, w2, w3, w4;  // y derivatives
  Real wt, w1t, w2t;       // mixed t derivatives
};

template <class Real>
LogArg<Real> log_arg(MmsVariant v, Real t, Real y) {
  using std::cos;
  using std::sin;
  using std::tan;
  const Real pi = pi_v<Real>();
  const Real c = Real(1.25) * t * t / pi;
  const Real ct = Real(2.5) * t / pi;
  const Real a = pi * y;
  // g = cos or sec, with derivatives g1..g4
  Real g, g1, g2, g3, g4;
  if (v == MmsVariant::Literal) {
    const Real s = 1 / cos(a), tn = tan(a);
    g = s;
    g1 = pi * s * tn;
    g2 = pi * pi * (2 * s * s * s - s);
    g3 = pi * pi * pi * (6 * s * s - 1) * s * tn;
    g4 = pi * pi * pi * pi * (24 * s * s * s * s * s - 20 * s * s * s + s);
  } else {
    g = cos(a);
    g1 = -pi * sin(a);
    g2 = -pi * pi * cos(a);
    g3 = pi * pi * pi * sin(a);
    g4 = pi * pi * pi * pi * cos(a);
  }
  return {1 - c * g, -c * g1, -c * g2, -c * g3, -c * g4, -ct * g, -ct * g1, -ct * g2};
}

template <class Real>
void require_log_domain(const Real& w) {
  if (!(w > 0)) throw Error(ErrorKind::LogDomain, "log argument of the manufactured solution is not positive");
}

}  // namespace detail

/// Manufactured potential. Corrected and literal variants read
/// eta (t/pi)^2 cos(pi y) cos(1.25 pi x) - ln(w) + Lambda, with
/// w = 1 - 1.25 t^2 cos(pi y)/pi (corrected) or 1 - 1.25 t^2/(pi cos(pi y))
/// (literal). SmoothFallback is eta t^2 cos(pi y) cos(1.25 pi x) + t^2 cos(2 pi y) + Lambda.
template <class Real>
Real mms_phi(MmsVariant v, Real t, Real x, Real y, Real eta, Real lambda_ref) {
  using std::cos;
  using std::log;
  const Real pi = detail::pi_v<Real>();
  const Real u = cos(pi * y), cx = cos(Real(1.25) * pi * x);
  if (v == MmsVariant::SmoothFallback) return eta * t * t * u * cx + t * t * cos(2 * pi * y) + lambda_ref;
  const auto a = detail::log_arg(v, t, y);
  detail::require_log_domain(a.w);
  return eta * (t / pi) * (t / pi) * u * cx - log(a.w) + lambda_ref;
}

/// Micro part q with phi = p + eta q and q = 0 on x = -L.
template <class Real>
Real mms_q(MmsVariant v, Real t, Real x, Real y) {
  using std::cos;
  const Real pi = detail::pi_v<Real>();
  const Real amp = v == MmsVariant::SmoothFallback ? t * t : (t / pi) * (t / pi);
  return amp * cos(pi * y) * cos(Real(1.25) * pi * x);
}

template <class Real>
Real mms_dq_dx(MmsVariant v, Real t, Real x, Real y) {
  using std::cos;
  using std::sin;
  const Real pi = detail::pi_v<Real>();
  const Real amp = v == MmsVariant::SmoothFallback ? t * t : (t / pi) * (t / pi);
  return -amp * cos(pi * y) * Real(1.25) * pi * sin(Real(1.25) * pi * x);
}

template <class Real>
Real mms_dphi_dx(MmsVariant v, Real t, Real x, Real y, Real eta) {
  return eta * mms_dq_dx(v, t, x, y);
}

/// S = -dt dyy phi - (1/eta) dxx phi + nu dyyyy phi for the chosen variant,
/// in closed form. The 1/eta term is eta-free since the x-dependent part of
/// phi carries a factor eta.
template <class Real>
Real mms_source(MmsVariant v, Real t, Real x, Real y, Real eta, Real nu) {
  using std::cos;
  const Real pi = detail::pi_v<Real>();
  const Real u = cos(pi * y), cx = cos(Real(1.25) * pi * x);
  const Real k2 = Real(1.5625) * pi * pi;  // (1.25 pi)^2

  if (v == MmsVariant::SmoothFallback) {
    const Real pi2 = pi * pi, c2 = cos(2 * pi * y);
    return 2 * pi2 * eta * t * u * cx + k2 * t * t * u * cx + nu * eta * pi2 * pi2 * t * t * u * cx +
           8 * pi2 * t * c2 + 16 * nu * pi2 * pi2 * t * t * c2;
  }

  const auto a = detail::log_arg(v, t, y);
  detail::require_log_domain(a.w);
  const Real w = a.w, w1 = a.w1, w2 = a.w2, w3 = a.w3, w4 = a.w4;
  const Real dt_byy = -a.w2t / w + w2 * a.wt / (w * w) + 2 * w1 * a.w1t / (w * w) - 2 * w1 * w1 * a.wt / (w * w * w);
  const Real byyyy = -w4 / w + (4 * w1 * w3 + 3 * w2 * w2) / (w * w) - 12 * w1 * w1 * w2 / (w * w * w) +
                     6 * w1 * w1 * w1 * w1 / (w * w * w * w);
  const Real micro = 2 * eta * t * u * cx + Real(1.5625) * t * t * u * cx + nu * eta * pi * pi * t * t * u * cx;
  return micro - dt_byy + nu * byyyy;
}

/// Extra sheath data making the smooth fallback exact, in the q form
/// dx q = (1 - e^{Lambda - phi}) + west at x = -L (mirrored east). Zero for
/// the other variants.
template <class Real>
Real mms_sheath_data_west(MmsVariant v, Real t, Real y) {
  using std::cos;
  using std::exp;
  if (v != MmsVariant::SmoothFallback) return Real(0);
  const Real pi = detail::pi_v<Real>();
  return Real(1.25) * pi * t * t * cos(pi * y) - (1 - exp(-t * t * cos(2 * pi * y)));
}

template <class Real>
Real mms_sheath_data_east(MmsVariant v, Real t, Real y) {
  return -mms_sheath_data_west(v, t, y);
}

/// q-form sheath residual dx q - (1 - e^{Lambda - phi}) - data at x = -L
/// (side = -1), or dx q + (1 - e^{Lambda - phi}) - data at x = +L (side = +1).
/// Multiplying by eta gives the residual of dx phi = eta (1 - e^{Lambda - phi}).
template <class Real>
Real mms_sheath_residual(MmsVariant v, int side, Real t, Real y, Real L, Real eta, Real lambda_ref) {
  using std::exp;
  const Real x = side < 0 ? -L : L;
  const Real phi = mms_phi(v, t, x, y, eta, lambda_ref);
  const Real flux = 1 - exp(lambda_ref - phi);
  const Real dq = mms_dq_dx(v, t, x, y);
  if (side < 0) return dq - flux - mms_sheath_data_west(v, t, y);
  return dq + flux - mms_sheath_data_east(v, t, y);
}

/// 40 t cos(2 pi y) sin(pi x / (2 L)).
inline double eq4_source(double t, double x, double y, double L) {
  constexpr double pi = std::numbers::pi;
  return 40.0 * t * std::cos(2.0 * pi * y) * std::sin(pi * x / (2.0 * L));
}

enum class SourceKind { Eq3Mms, Eq3Literal, Eq4, SmoothMms, Zero };

inline const char* to_string(SourceKind k) {
  switch (k) {
    case SourceKind::Eq3Mms: return "eq3_mms";
    case SourceKind::Eq3Literal: return "eq3_literal";
    case SourceKind::Eq4: return "eq4";
    case SourceKind::SmoothMms: return "smooth_mms";
    case SourceKind::Zero: return "zero";
  }
  return "?";
}

/// Source, initial data and, when known, the exact solution of one test case.
struct Problem {
  SourceKind kind = SourceKind::Zero;
  SourceTerms terms;
  InitialData phi_ini;
  std::function<double(double t, double x, double y)> exact;
};

inline Problem make_problem(SourceKind kind, const PhysConfig& phys) {
  Problem pb;
  pb.kind = kind;
  const double eta = phys.eta, nu = phys.nu, lam = phys.lambda_ref, L = phys.L;
  pb.phi_ini = [lam](double, double) { return lam; };

  auto mms = [&](MmsVariant v) {
    pb.terms.source = [v, eta, nu](double t, double x, double y) { return mms_source(v, t, x, y, eta, nu); };
    pb.exact = [v, eta, lam](double t, double x, double y) { return mms_phi(v, t, x, y, eta, lam); };
    if (v == MmsVariant::SmoothFallback) {
      pb.terms.west = [v](double t, double y) { return mms_sheath_data_west(v, t, y); };
      pb.terms.east = [v](double t, double y) { return mms_sheath_data_east(v, t, y); };
    }
  };

  switch (kind) {
    case SourceKind::Eq3Mms: mms(MmsVariant::Corrected); break;
    case SourceKind::Eq3Literal: mms(MmsVariant::Literal); break;
    case SourceKind::SmoothMms: mms(MmsVariant::SmoothFallback); break;
    case SourceKind::Eq4:
      pb.terms.source = [L](double t, double x, double y) { return eq4_source(t, x, y, L); };
      break;
    case SourceKind::Zero:
      pb.terms = zero_source();
      pb.exact = [lam](double, double, double) { return lam; };
      break;
  }
  return pb;
}

/// sqrt(sum w_ij f_ij^2) with dual-cell weights (dx dy inside, halved on
/// edges, quartered at corners). Ghost entries are ignored.
inline double l2_norm(const Grid& g, std::span<const double> field) {
  if (static_cast<int>(field.size()) != g.node_count())
    throw Error(ErrorKind::DimensionMismatch, "field size does not match the grid");
  const auto w = g.weights();
  double s = 0.0;
  for (int id = 0; id < g.node_count(); ++id) s += w[id] * field[id] * field[id];
  return std::sqrt(s);
}

/// Field sampled on every node (ghosts take their x position).
inline std::vector<double> sample(const Grid& g, const std::function<double(double, double)>& f) {
  std::vector<double> v(g.node_count());
  for (int id = 0; id < g.node_count(); ++id) {
    const auto [i, j] = g.position(id);
    v[id] = f(g.x(i), g.y(j));
  }
  return v;
}

struct TimeNorms {
  double l1 = 0.0;
  double l2 = 0.0;
};

/// Rectangle rule over post-step values v_1..v_N: (sum v dt, sqrt(sum v^2 dt)).
inline TimeNorms time_norms(std::span<const double> values, double dt) {
  TimeNorms n;
  for (double v : values) {
    n.l1 += std::abs(v) * dt;
    n.l2 += v * v * dt;
  }
  n.l2 = std::sqrt(n.l2);
  return n;
}

/// Least-squares slope of log(y) against log(x).
inline double fit_slope(std::span<const double> x, std::span<const double> y) {
  const std::size_t n = x.size();
  if (n < 2 || y.size() != n) throw Error(ErrorKind::DimensionMismatch, "slope fit needs two or more matching points");
  double mx = 0.0, my = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    mx += std::log(x[k]);
    my += std::log(y[k]);
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const double dx = std::log(x[k]) - mx;
    sxy += dx * (std::log(y[k]) - my);
    sxx += dx * dx;
  }
  return sxy / sxx;
}

/// Largest spread over x of p = phi - eta q along any grid row.
inline double micro_macro_spread(const Grid& g, const State& s, double eta) {
  if (s.q.empty()) return 0.0;
  double worst = 0.0;
  for (int j = 0; j < g.ny(); ++j) {
    double lo = INFINITY, hi = -INFINITY;
    for (int i = g.i_min(); i <= g.i_max(); ++i) {
      const int id = g.node(i, j);
      if (id < 0 || g.is_ghost(id)) continue;
      const double p = s.phi[id] - eta * s.q[id];
      lo = std::min(lo, p);
      hi = std::max(hi, p);
    }
    if (hi >= lo) worst = std::max(worst, hi - lo);
  }
  return worst;
}

struct ConvergenceRow {
  double h = 0.0;
  double dt = 0.0;
  double err_l2 = 0.0;
};

struct ConvergenceResult {
  std::vector<ConvergenceRow> rows;  // h descending
  double order = 0.0;
};

/// L2 error at T against the exact solution for each mesh step (dx = dy = h).
inline ConvergenceResult run_mms_convergence(const PhysConfig& phys, std::vector<double> hs, double dt,
                                             SourceKind kind = SourceKind::Eq3Mms, Scheme scheme = Scheme::AP,
                                             GeometryMode mode = GeometryMode::Strip) {
  std::sort(hs.begin(), hs.end(), std::greater<>());
  const Problem pb = make_problem(kind, phys);
  if (!pb.exact) throw Error(ErrorKind::InvalidParameter, std::string("source ") + to_string(kind) + " has no exact solution");
  ConvergenceResult out;
  for (double h : hs) {
    const DiscConfig disc{h, h, dt, mode};
    const Grid g = build_grid(phys, disc);
    const RunResult r = run(g, phys, disc, scheme, pb.terms, pb.phi_ini);
    const double t = r.final_state.t;
    auto err = sample(g, [&](double x, double y) { return pb.exact(t, x, y); });
    for (int id = 0; id < g.node_count(); ++id) err[id] -= r.final_state.phi[id];
    out.rows.push_back({h, dt, l2_norm(g, err)});
  }
  if (out.rows.size() >= 2) {
    std::vector<double> x, y;
    for (const auto& row : out.rows) {
      x.push_back(row.h);
      y.push_back(row.err_l2);
    }
    out.order = fit_slope(x, y);
  }
  return out;
}

struct EtaRow {
  double eta = 0.0;
  double err_l1_time = 0.0;
  double err_l2_time = 0.0;
};

struct EtaSweepResult {
  std::vector<EtaRow> rows;  // eta descending
  double slope_l1 = 0.0;
  double slope_l2 = 0.0;
};

/// Distance of the AP solution to the eta = 0 limit phi_0 = 0 for the
/// odd-in-x source, in L1(0,T;L2) and L2(0,T;L2).
inline EtaSweepResult run_eta_sweep(const PhysConfig& base, const DiscConfig& disc, std::vector<double> etas,
                                    SourceKind kind = SourceKind::Eq4) {
  std::sort(etas.begin(), etas.end(), std::greater<>());
  const Grid g = build_grid(base, disc);
  EtaSweepResult out;
  for (double eta : etas) {
    PhysConfig phys = base;
    phys.eta = eta;
    const Problem pb = make_problem(kind, phys);
    std::vector<double> per_step;
    Observer obs = [&](const State& s) { per_step.push_back(l2_norm(g, s.phi)); };
    run(g, phys, disc, Scheme::AP, pb.terms, pb.phi_ini, {obs});
    const TimeNorms tn = time_norms(per_step, disc.dt);
    out.rows.push_back({eta, tn.l1, tn.l2});
  }
  std::vector<double> x, y1, y2;
  for (const auto& row : out.rows) {
    if (!(row.eta > 0.0)) continue;
    x.push_back(row.eta);
    y1.push_back(row.err_l1_time);
    y2.push_back(row.err_l2_time);
  }
  if (x.size() >= 2) {
    out.slope_l1 = fit_slope(x, y1);
    out.slope_l2 = fit_slope(x, y2);
  }
  return out;
}

struct CondRow {
  double eta = 0.0;
  double kappa_ap = 0.0;
  std::optional<double> kappa_naive;  // absent at eta = 0 or when its LU breaks down
  bool converged = true;
  std::string note;
};

/// 2-norm condition numbers of the AP and naive matrices for each eta.
inline std::vector<CondRow> run_condition_study(const PhysConfig& base, const DiscConfig& disc,
                                                std::vector<double> etas) {
  std::sort(etas.begin(), etas.end(), std::greater<>());
  const Grid g = build_grid(base, disc);
  std::vector<CondRow> rows;
  for (double eta : etas) {
    PhysConfig phys = base;
    phys.eta = eta;
    CondRow row;
    row.eta = eta;
    const SystemBlocks ap = assemble_ap_matrix(g, phys, disc);
    const CondEstimate kap = estimate_cond2(ap.matrix, lu_factorize(ap.matrix));
    row.kappa_ap = kap.value;
    row.converged = kap.converged;
    if (eta > 0.0) {
      const SystemBlocks nv = assemble_naive_matrix(g, phys, disc);
      try {
        const CondEstimate kn = estimate_cond2(nv.matrix, lu_factorize(nv.matrix));
        row.kappa_naive = kn.value;
        row.converged = row.converged && kn.converged;
      } catch (const Error& e) {
        if (e.kind() != ErrorKind::SingularPivot) throw;
        row.note = e.what();
      }
    } else {
      row.note = to_string(ErrorKind::EtaZeroUndefined);
    }
    rows.push_back(row);
  }
  return rows;
}

struct CompatibilityReport {
  double lhs = 0.0;  // integral of S(0, .)
  double rhs = 0.0;  // nu * integral of dyyyy phi_ini
  bool ok = true;
  std::string message;
};

namespace detail {

template <class F>
double simpson(F&& f, double a, double b, int n = 400) {
  const double h = (b - a) / n;
  double s = f(a) + f(b);
  for (int k = 1; k < n; ++k) s += (k % 2 ? 4.0 : 2.0) * f(a + k * h);
  return s * h / 3.0;
}

}  // namespace detail

/// Checks the initial compatibility condition
///   int_Omega S(0,x,y) = nu int_Omega dyyyy phi_ini.
/// The y integral of dyyyy is taken as dyyy at the column ends, by central
/// differences. Advisory: reports rather than throws.
inline CompatibilityReport validate_compatibility(const PhysConfig& phys, const InitialData& phi_ini,
                                                  const std::function<double(double, double, double)>& source) {
  CompatibilityReport rep;
  const double h = 2e-3;
  auto d3 = [&](double x, double y) {
    return (phi_ini(x, y + 2 * h) - 2 * phi_ini(x, y + h) + 2 * phi_ini(x, y - h) - phi_ini(x, y - 2 * h)) /
           (2 * h * h * h);
  };
  auto src_col = [&](double x, double y0, double y1) {
    return detail::simpson([&](double y) { return source(0.0, x, y); }, y0, y1);
  };
  rep.lhs = detail::simpson([&](double x) { return src_col(x, 0.0, 1.0); }, -phys.L, phys.L);
  rep.rhs = detail::simpson([&](double x) { return d3(x, 1.0) - d3(x, 0.0); }, -phys.L, phys.L);
  if (phys.l < 1.0) {
    for (auto [a, b] : {std::pair{-0.5, -phys.L}, std::pair{phys.L, 0.5}}) {
      rep.lhs += detail::simpson([&](double x) { return src_col(x, phys.l, 1.0); }, a, b);
      rep.rhs += detail::simpson([&](double x) { return d3(x, 1.0) - d3(x, phys.l); }, a, b);
    }
  }
  rep.rhs *= phys.nu;
  const double mismatch = std::abs(rep.lhs - rep.rhs);
  rep.ok = mismatch <= 1e-6 * std::max(1.0, std::abs(rep.lhs));
  rep.message = rep.ok ? "compatible" : "initial compatibility condition violated: int S(0) = " + format_double(rep.lhs) +
                                           ", nu int dyyyy phi_ini = " + format_double(rep.rhs);
  return rep;
}

}  // namespace apmm
