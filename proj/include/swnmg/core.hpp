#pragma once

// Common types and constants shared by every swnmg module.

#include <Eigen/Dense>

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace swnmg {

/// Default gravitational acceleration (m/s^2).
inline constexpr double kGravity = 9.81;

/// Depth below which a state is treated as dry.
inline constexpr double kDryDepth = 1e-6;

/// Number of conserved variables for a spatial dimension.
template <int Dim>
inline constexpr int kVars = Dim + 1;

template <int Dim>
using Point = Eigen::Matrix<double, Dim, 1>;

/// Conserved state (h, hu[, hv]).
template <int Dim>
using State = Eigen::Matrix<double, Dim + 1, 1>;

/// Dense m x m block of a block-sparse matrix or a flux Jacobian.
template <int Dim>
using Block = Eigen::Matrix<double, Dim + 1, Dim + 1>;

/// Block vector: one m-vector per cell.
template <int Dim>
using BlockVector = std::vector<State<Dim>>;

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid arguments or inconsistent configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// A numerical flux was asked to evaluate a state it does not support.
class FluxError : public Error {
 public:
  using Error::Error;
};

/// Boundary data admit no ghost state.
class BoundaryError : public Error {
 public:
  using Error::Error;
};

/// A diagonal block or dense matrix could not be factorized.
class SingularMatrixError : public Error {
 public:
  using Error::Error;
};

enum class FluxKind { kHll, kHllc, kLlf, kRoe };

inline std::string to_string(FluxKind kind) {
  switch (kind) {
    case FluxKind::kHll: return "hll";
    case FluxKind::kHllc: return "hllc";
    case FluxKind::kLlf: return "llf";
    case FluxKind::kRoe: return "roe";
  }
  return "?";
}

inline FluxKind parse_flux_kind(const std::string& name) {
  if (name == "hll") return FluxKind::kHll;
  if (name == "hllc") return FluxKind::kHllc;
  if (name == "llf") return FluxKind::kLlf;
  if (name == "roe") return FluxKind::kRoe;
  throw ConfigError("unknown flux '" + name + "'");
}

template <int Dim>
inline double depth(const State<Dim>& u) {
  return u[0];
}

/// Velocity recovered from a state; zero when the state is dry.
template <int Dim>
inline Point<Dim> velocity(const State<Dim>& u, double h_eps = kDryDepth) {
  if (u[0] > h_eps) return u.template tail<Dim>() / u[0];
  return Point<Dim>::Zero();
}

template <int Dim>
inline State<Dim> make_state(double h, const Point<Dim>& vel) {
  State<Dim> u;
  u[0] = h;
  u.template tail<Dim>() = h * vel;
  return u;
}

/// Resets a state to zero when its depth is below the dry threshold.
template <int Dim>
inline bool clamp_dry(State<Dim>& u, double h_eps = kDryDepth) {
  if (u[0] < h_eps) {
    u.setZero();
    return true;
  }
  return false;
}

template <int Dim>
inline bool all_finite(const BlockVector<Dim>& v) {
  for (const auto& b : v) {
    if (!b.allFinite()) return false;
  }
  return true;
}

}  // namespace swnmg
