#pragma once

#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include "apmm/errors.hpp"

namespace apmm {

/// Physical parameters of the dimensionless potential model.
struct PhysConfig {
  double eta = 1e-3;        ///< parallel resistivity, >= 0
  double nu = 1.0;          ///< perpendicular ionic viscosity, > 0
  double lambda_ref = 0.0;  ///< reference potential inside the limiter
  double L = 0.4;           ///< limiter half gap, in (0, 0.5)
  double l = 1.0;           ///< limiter height, in (0, 1]
  double T = 1.0;           ///< final time
};

/// `Strip` solves on [-L, L] x [0, 1] (requires l = 1). `Full` adds the
/// periodic band l < y < 1 over the limiter.
enum class GeometryMode { Strip, Full };

inline const char* to_string(GeometryMode m) { return m == GeometryMode::Strip ? "strip" : "full"; }

struct DiscConfig {
  double dx = 0.0125;
  double dy = 0.0125;
  double dt = 1e-3;
  GeometryMode mode = GeometryMode::Strip;
};

struct ConfigIssue {
  ErrorKind kind;
  std::string message;
};

namespace detail {

// True when `length / step` is an integer up to rounding.
inline bool is_multiple(double length, double step) {
  const double r = length / step;
  return std::abs(r - std::round(r)) <= 1e-9 * std::max(1.0, std::abs(r));
}

inline int count_steps(double length, double step) {
  return static_cast<int>(std::lround(length / step));
}

}  // namespace detail

/// Every violated invariant of the two configs; empty means valid.
inline std::vector<ConfigIssue> validate_config(const PhysConfig& phys, const DiscConfig& disc) {
  std::vector<ConfigIssue> issues;
  auto add = [&](ErrorKind k, std::string msg) { issues.push_back({k, std::move(msg)}); };

  if (!(phys.eta >= 0.0) || !std::isfinite(phys.eta)) add(ErrorKind::InvalidParameter, "eta must be >= 0");
  if (!(phys.nu > 0.0) || !std::isfinite(phys.nu)) add(ErrorKind::InvalidParameter, "nu must be > 0");
  if (!std::isfinite(phys.lambda_ref)) add(ErrorKind::InvalidParameter, "lambda must be finite");
  if (!(phys.L > 0.0 && phys.L < 0.5)) add(ErrorKind::InvalidParameter, "L must lie in (0, 0.5)");
  if (!(phys.l > 0.0 && phys.l <= 1.0)) add(ErrorKind::InvalidParameter, "l must lie in (0, 1]");
  if (!(phys.T >= 0.0) || !std::isfinite(phys.T)) add(ErrorKind::InvalidParameter, "T must be >= 0");

  bool steps_ok = true;
  for (auto [name, v] : {std::pair{"dx", disc.dx}, std::pair{"dy", disc.dy}, std::pair{"dt", disc.dt}}) {
    if (!(v > 0.0) || !std::isfinite(v)) {
      add(ErrorKind::NonPositiveStep, std::string(name) + " must be > 0");
      steps_ok = false;
    }
  }
  if (!issues.empty() && !steps_ok) return issues;
  if (!(phys.L > 0.0 && phys.L < 0.5) || !(phys.l > 0.0 && phys.l <= 1.0)) return issues;

  if (disc.mode == GeometryMode::Strip) {
    if (phys.l != 1.0) add(ErrorKind::StripModeRequiresLEqualOne, "strip mode needs l = 1");
    if (!detail::is_multiple(2.0 * phys.L, disc.dx))
      add(ErrorKind::NonAlignedMesh, "2L/dx is not an integer");
    if (!detail::is_multiple(1.0, disc.dy)) add(ErrorKind::NonAlignedMesh, "1/dy is not an integer");
  } else {
    if (phys.l >= 1.0) add(ErrorKind::InvalidParameter, "full mode needs l < 1 (use strip mode for l = 1)");
    if (!detail::is_multiple(0.5 - phys.L, disc.dx))
      add(ErrorKind::NonAlignedMesh, "(0.5 - L)/dx is not an integer");
    if (!detail::is_multiple(phys.L, disc.dx)) add(ErrorKind::NonAlignedMesh, "L/dx is not an integer");
    if (!detail::is_multiple(phys.l, disc.dy)) add(ErrorKind::NonAlignedMesh, "l/dy is not an integer");
    if (!detail::is_multiple(1.0 - phys.l, disc.dy))
      add(ErrorKind::NonAlignedMesh, "(1 - l)/dy is not an integer");
  }
  return issues;
}

/// Throws the first violation (with all messages attached) if the configs are invalid.
inline void require_valid(const PhysConfig& phys, const DiscConfig& disc) {
  const auto issues = validate_config(phys, disc);
  if (issues.empty()) return;
  std::ostringstream os;
  for (std::size_t k = 0; k < issues.size(); ++k) {
    if (k) os << "; ";
    os << issues[k].message;
  }
  throw Error(issues.front().kind, os.str());
}

}  // namespace apmm
