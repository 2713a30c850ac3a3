#pragma once

// Physical and numerical fluxes of the shallow water equations, hydrostatic
// reconstruction with dry-area clamping, interface source terms and ghost
// states for open and wall boundaries.

#include "swnmg/core.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <optional>
#include <string>

namespace swnmg {

struct PhysicsParams {
  double g = kGravity;
  double h_eps = kDryDepth;
  /// Wet/dry augmentation of the LLF speed bound.
  double eps_r = 0.03;
  /// Apply the augmentation at every edge rather than only at edges with a
  /// dry side. Meant for problems whose solution has wet/dry fronts.
  bool augment_everywhere = false;
  /// Harten entropy-fix width of the Roe flux.
  double eps_f = 0.4;
};

/// F(U) . n
template <int Dim>
State<Dim> physical_flux_normal(const State<Dim>& u, const Point<Dim>& n, double g,
                                double h_eps = kDryDepth) {
  const double h = u[0];
  const double un = velocity<Dim>(u, h_eps).dot(n);
  const double p = 0.5 * g * h * h;
  State<Dim> f;
  f[0] = h * un;
  f.template tail<Dim>() = u.template tail<Dim>() * un + p * n;
  return f;
}

/// d(F(U) . n)/dU for a wet state.
template <int Dim>
Block<Dim> physical_flux_jacobian(const State<Dim>& u, const Point<Dim>& n, double g) {
  const double h = u[0];
  const Point<Dim> m = u.template tail<Dim>();
  const double mn = m.dot(n);
  Block<Dim> a = Block<Dim>::Zero();
  a(0, 0) = 0.0;
  a.template block<1, Dim>(0, 1) = n.transpose();
  a.template block<Dim, 1>(1, 0) = -m * mn / (h * h) + g * h * n;
  a.template block<Dim, Dim>(1, 1) =
      (mn * Eigen::Matrix<double, Dim, Dim>::Identity() + m * n.transpose()) / h;
  return a;
}

/// Jacobian of the LLF flux with the speed bound s held fixed, with respect
/// to the left state or (wrt_right) the right state.
template <int Dim>
Block<Dim> llf_frozen_jacobian(const State<Dim>& l, const State<Dim>& r, const Point<Dim>& n, double s,
                               bool wrt_right, double g) {
  const State<Dim>& u = wrt_right ? r : l;
  const double sign = wrt_right ? -1.0 : 1.0;
  return 0.5 * (physical_flux_jacobian<Dim>(u, n, g) + sign * s * Block<Dim>::Identity());
}

template <int Dim>
struct ReconstructedPair {
  State<Dim> left;
  State<Dim> right;
};

/// Hydrostatic reconstruction of the interface states seen from cell i
/// (left) and cell j (right). Velocities are carried over unchanged.
template <int Dim>
ReconstructedPair<Dim> hydrostatic_reconstruct(const State<Dim>& ui, const State<Dim>& uj,
                                               double zi, double zj,
                                               double h_eps = kDryDepth) {
  // h_i + z_i - max(z_i, z_j), written so that the clamp is an exact identity
  // on the higher side.
  const double hl = std::max(0.0, ui[0] - std::max(0.0, zj - zi));
  const double hr = std::max(0.0, uj[0] - std::max(0.0, zi - zj));
  return {make_state<Dim>(hl, velocity<Dim>(ui, h_eps)),
          make_state<Dim>(hr, velocity<Dim>(uj, h_eps))};
}

/// (0, g/2 h^2 n)
template <int Dim>
State<Dim> interface_source(double h_minus, const Point<Dim>& n, double g) {
  State<Dim> s;
  s[0] = 0.0;
  s.template tail<Dim>() = 0.5 * g * h_minus * h_minus * n;
  return s;
}

/// HLL wave-speed estimates with the two-rarefaction star state and the
/// dry-front speeds.
struct HllSpeeds {
  double s_left = 0.0;
  double s_right = 0.0;
  bool both_dry = false;
};

template <int Dim>
HllSpeeds hll_speeds(const State<Dim>& l, const State<Dim>& r, const Point<Dim>& n,
                     const PhysicsParams& p) {
  HllSpeeds s;
  const double hl = l[0], hr = r[0];
  const bool dry_l = hl < p.h_eps, dry_r = hr < p.h_eps;
  if (dry_l && dry_r) {
    s.both_dry = true;
    return s;
  }
  const double ul = velocity<Dim>(l, p.h_eps).dot(n);
  const double ur = velocity<Dim>(r, p.h_eps).dot(n);
  const double cl = std::sqrt(p.g * std::max(hl, 0.0));
  const double cr = std::sqrt(p.g * std::max(hr, 0.0));
  const double u_star = 0.5 * (ul + ur) + cl - cr;
  const double w = cl + cr + 0.5 * (ul - ur);
  const double h_star = w * w / (4.0 * p.g);
  const double c_star = std::sqrt(p.g * h_star);
  s.s_left = dry_l ? ur - 2.0 * cr : std::min(ul - cl, u_star - c_star);
  s.s_right = dry_r ? ul + 2.0 * cl : std::max(ur + cr, u_star + c_star);
  if (!std::isfinite(s.s_left) || !std::isfinite(s.s_right))
    throw FluxError("non-finite HLL wave speed estimate");
  return s;
}

template <int Dim>
State<Dim> flux_hll(const State<Dim>& l, const State<Dim>& r, const Point<Dim>& n,
                    const PhysicsParams& p) {
  const HllSpeeds s = hll_speeds<Dim>(l, r, n, p);
  if (s.both_dry) return State<Dim>::Zero();
  if (s.s_left >= 0.0) return physical_flux_normal<Dim>(l, n, p.g, p.h_eps);
  if (s.s_right <= 0.0) return physical_flux_normal<Dim>(r, n, p.g, p.h_eps);
  const State<Dim> fl = physical_flux_normal<Dim>(l, n, p.g, p.h_eps);
  const State<Dim> fr = physical_flux_normal<Dim>(r, n, p.g, p.h_eps);
  return (s.s_right * fl - s.s_left * fr + s.s_left * s.s_right * (r - l)) /
         (s.s_right - s.s_left);
}

/// Rotation into the edge frame: (h, hu.n, hu.tau) with tau = (-n_y, n_x).
inline Block<2> rotation(const Point<2>& n) {
  Block<2> t;
  t << 1.0, 0.0, 0.0,
       0.0, n[0], n[1],
       0.0, -n[1], n[0];
  return t;
}

/// HLLC flux: HLL in the rotated frame with the tangential momentum flux
/// upwinded across the contact wave.
inline State<2> flux_hllc(const State<2>& l, const State<2>& r, const Point<2>& n,
                          const PhysicsParams& p) {
  const Block<2> t = rotation(n);
  const State<2> lr = t * l;
  const State<2> rr = t * r;
  const Point<2> ex(1.0, 0.0);
  const HllSpeeds s = hll_speeds<2>(lr, rr, ex, p);
  if (s.both_dry) return State<2>::Zero();
  State<2> f = flux_hll<2>(lr, rr, ex, p);
  if (s.s_left < 0.0 && s.s_right > 0.0) {
    const double hl = lr[0], hr = rr[0];
    const double ul = velocity<2>(lr, p.h_eps)[0];
    const double ur = velocity<2>(rr, p.h_eps)[0];
    const double s_m =
        (s.s_left * hr * (ur - s.s_right) - s.s_right * hl * (ul - s.s_left)) /
        (hr * (ur - s.s_right) - hl * (ul - s.s_left));
    if (!std::isfinite(s_m)) throw FluxError("non-finite HLLC contact speed");
    const double ut = s_m >= 0.0 ? velocity<2>(lr, p.h_eps)[1] : velocity<2>(rr, p.h_eps)[1];
    f[2] = ut * f[0];
  }
  return t.transpose() * f;
}

/// Speed bound of the LLF flux, widened at wet/dry fronts.
template <int Dim>
double llf_max_speed(const State<Dim>& l, const State<Dim>& r, const Point<Dim>& n,
                     const PhysicsParams& p) {
  const double hl = std::max(l[0], 0.0), hr = std::max(r[0], 0.0);
  const double ul = velocity<Dim>(l, p.h_eps).dot(n);
  const double ur = velocity<Dim>(r, p.h_eps).dot(n);
  double s = std::max(std::abs(ul) + std::sqrt(p.g * hl), std::abs(ur) + std::sqrt(p.g * hr));
  if (p.augment_everywhere || hl < p.h_eps || hr < p.h_eps) s += p.eps_r * std::sqrt(p.g * std::max(hl, hr));
  return s;
}

/// LLF flux with a given speed bound.
template <int Dim>
State<Dim> flux_llf_with_speed(const State<Dim>& l, const State<Dim>& r, const Point<Dim>& n,
                               double s_max, const PhysicsParams& p) {
  return 0.5 * (physical_flux_normal<Dim>(l, n, p.g, p.h_eps) +
                physical_flux_normal<Dim>(r, n, p.g, p.h_eps) - s_max * (r - l));
}

template <int Dim>
State<Dim> flux_llf(const State<Dim>& l, const State<Dim>& r, const Point<Dim>& n,
                    const PhysicsParams& p) {
  if (l[0] < p.h_eps && r[0] < p.h_eps) return State<Dim>::Zero();
  return flux_llf_with_speed<Dim>(l, r, n, llf_max_speed<Dim>(l, r, n, p), p);
}

/// Harten's entropy fix of |x|.
inline double harten_q(double x, double eps_f) {
  if (std::abs(x) < 2.0 * eps_f) return x * x / (4.0 * eps_f) + eps_f;
  return std::abs(x);
}

/// Eigen-decomposition of the Roe matrix and the wave strengths of the jump.
template <int Dim>
struct RoeWaves {
  std::array<double, Dim + 1> eigenvalues{};
  std::array<State<Dim>, Dim + 1> eigenvectors{};
  std::array<double, Dim + 1> strengths{};
};

template <int Dim>
RoeWaves<Dim> roe_waves(const State<Dim>& l, const State<Dim>& r, const Point<Dim>& n,
                        const PhysicsParams& p) {
  if (l[0] < p.h_eps || r[0] < p.h_eps)
    throw FluxError("Roe flux does not support dry states");
  const double sl = std::sqrt(l[0]), sr = std::sqrt(r[0]);
  const Point<Dim> u_hat =
      (sl * velocity<Dim>(l, p.h_eps) + sr * velocity<Dim>(r, p.h_eps)) / (sl + sr);
  const double c_hat = std::sqrt(p.g * 0.5 * (l[0] + r[0]));
  const double un = u_hat.dot(n);

  const State<Dim> du = r - l;
  const double dmn = du.template tail<Dim>().dot(n);
  const double a = (dmn - un * du[0]) / c_hat;

  RoeWaves<Dim> w;
  w.eigenvalues.front() = un - c_hat;
  w.eigenvalues.back() = un + c_hat;
  w.eigenvectors.front() = make_state<Dim>(1.0, u_hat - c_hat * n);
  w.eigenvectors.back() = make_state<Dim>(1.0, u_hat + c_hat * n);
  w.strengths.front() = 0.5 * (du[0] - a);
  w.strengths.back() = 0.5 * (du[0] + a);
  if constexpr (Dim == 2) {
    const Point<2> tau(-n[1], n[0]);
    w.eigenvalues[1] = un;
    w.eigenvectors[1] << 0.0, tau[0], tau[1];
    w.strengths[1] = du.template tail<2>().dot(tau) - u_hat.dot(tau) * du[0];
  }
  return w;
}

template <int Dim>
State<Dim> flux_roe(const State<Dim>& l, const State<Dim>& r, const Point<Dim>& n,
                    const PhysicsParams& p) {
  const RoeWaves<Dim> w = roe_waves<Dim>(l, r, n, p);
  State<Dim> diss = State<Dim>::Zero();
  for (int k = 0; k <= Dim; ++k)
    diss += harten_q(w.eigenvalues[k], p.eps_f) * w.strengths[k] * w.eigenvectors[k];
  return 0.5 * (physical_flux_normal<Dim>(l, n, p.g, p.h_eps) +
                physical_flux_normal<Dim>(r, n, p.g, p.h_eps) - diss);
}

template <int Dim>
State<Dim> numerical_flux(FluxKind kind, const State<Dim>& l, const State<Dim>& r,
                          const Point<Dim>& n, const PhysicsParams& p) {
  switch (kind) {
    case FluxKind::kHll: return flux_hll<Dim>(l, r, n, p);
    case FluxKind::kLlf: return flux_llf<Dim>(l, r, n, p);
    case FluxKind::kRoe: return flux_roe<Dim>(l, r, n, p);
    case FluxKind::kHllc:
      if constexpr (Dim == 2) {
        return flux_hllc(l, r, n, p);
      } else {
        throw ConfigError("the HLLC flux is only defined in 2D");
      }
  }
  throw ConfigError("unknown flux kind");
}

/// Well-balanced interface flux of cell i across an edge with outward normal
/// n: numerical flux of the reconstructed pair minus the interface source.
template <int Dim>
State<Dim> total_interface_flux(const State<Dim>& ui, const State<Dim>& uj, double zi,
                                double zj, const Point<Dim>& n, FluxKind kind,
                                const PhysicsParams& p) {
  const ReconstructedPair<Dim> rec = hydrostatic_reconstruct<Dim>(ui, uj, zi, zj, p.h_eps);
  return numerical_flux<Dim>(kind, rec.left, rec.right, n, p) -
         interface_source<Dim>(rec.left[0], n, p.g);
}

// ---------------------------------------------------------------------------
// Boundary conditions

enum class BoundaryKind {
  kSubcriticalInflow,
  kSubcriticalOutflow,
  kSupercriticalInflow,
  kSupercriticalOutflow,
  kSlipWall,
  kReflectiveWall,
  kAutoOpen,
};

inline std::string to_string(BoundaryKind k) {
  switch (k) {
    case BoundaryKind::kSubcriticalInflow: return "subcritical_inflow";
    case BoundaryKind::kSubcriticalOutflow: return "subcritical_outflow";
    case BoundaryKind::kSupercriticalInflow: return "supercritical_inflow";
    case BoundaryKind::kSupercriticalOutflow: return "supercritical_outflow";
    case BoundaryKind::kSlipWall: return "slip_wall";
    case BoundaryKind::kReflectiveWall: return "reflective_wall";
    case BoundaryKind::kAutoOpen: return "auto_open";
  }
  return "?";
}

inline BoundaryKind parse_boundary_kind(const std::string& s) {
  for (auto k : {BoundaryKind::kSubcriticalInflow, BoundaryKind::kSubcriticalOutflow,
                 BoundaryKind::kSupercriticalInflow, BoundaryKind::kSupercriticalOutflow,
                 BoundaryKind::kSlipWall, BoundaryKind::kReflectiveWall,
                 BoundaryKind::kAutoOpen}) {
    if (to_string(k) == s) return k;
  }
  throw ConfigError("unknown boundary kind '" + s + "'");
}

/// Boundary condition of one patch. Prescribed discharge is the momentum
/// vector (hu, hv) in the global frame; 1D uses only its first component.
struct BoundarySpec {
  BoundaryKind kind = BoundaryKind::kSupercriticalOutflow;
  std::optional<double> depth;
  std::optional<std::array<double, 2>> discharge;

  /// Checks that the prescribed data match what the kind requires.
  void validate() const {
    const bool need_h = kind == BoundaryKind::kSubcriticalOutflow ||
                        kind == BoundaryKind::kSupercriticalInflow;
    const bool need_q = kind == BoundaryKind::kSubcriticalInflow ||
                        kind == BoundaryKind::kSupercriticalInflow;
    if (need_h && !depth) throw ConfigError(to_string(kind) + " boundary needs a depth");
    if (need_q && !discharge) throw ConfigError(to_string(kind) + " boundary needs a discharge");
    if (kind == BoundaryKind::kAutoOpen && !depth && !discharge)
      throw ConfigError("auto_open boundary needs a depth or a discharge");
    if (depth && !(*depth > 0.0)) throw ConfigError("prescribed boundary depth must be positive");
  }

  bool operator==(const BoundarySpec&) const = default;
};

namespace detail {

template <int Dim>
Point<Dim> discharge_vector(const BoundarySpec& spec) {
  Point<Dim> q;
  for (int d = 0; d < Dim; ++d) q[d] = (*spec.discharge)[d];
  return q;
}

/// Depth h with q_n / h + 2 sqrt(g h) = invariant, bracketed on (lo, hi).
inline double solve_inflow_depth(double qn, double invariant, double lo, double hi, double g) {
  auto f = [&](double h) { return qn / h + 2.0 * std::sqrt(g * h) - invariant; };
  double flo = f(lo), fhi = f(hi);
  if (!(flo * fhi <= 0.0))
    throw BoundaryError("subcritical inflow: no ghost depth matches the prescribed discharge");
  double h = 0.5 * (lo + hi);
  for (int it = 0; it < 200; ++it) {
    const double fh = f(h);
    if (fh == 0.0) return h;
    if ((fh < 0.0) == (flo < 0.0)) {
      lo = h;
      flo = fh;
    } else {
      hi = h;
    }
    const double df = -qn / (h * h) + std::sqrt(g / h);
    double next = h - fh / df;
    if (!(next > lo && next < hi) || !std::isfinite(next)) next = 0.5 * (lo + hi);
    if (std::abs(next - h) <= 1e-15 * h) return next;
    h = next;
  }
  return h;
}

}  // namespace detail

/// Ghost state across a boundary edge with outward unit normal n.
template <int Dim>
State<Dim> ghost_state(const State<Dim>& interior, const BoundarySpec& spec,
                       const Point<Dim>& n, const PhysicsParams& p) {
  const double h = std::max(interior[0], 0.0);
  const Point<Dim> vel = velocity<Dim>(interior, p.h_eps);
  const double un = vel.dot(n);
  const Point<Dim> vel_t = vel - un * n;

  auto subcritical_inflow = [&]() {
    const Point<Dim> q = detail::discharge_vector<Dim>(spec);
    const double invariant = un + 2.0 * std::sqrt(p.g * h);
    const double hg =
        detail::solve_inflow_depth(q.dot(n), invariant, p.h_eps, 10.0 * h + 10.0, p.g);
    State<Dim> u;
    u[0] = hg;
    u.template tail<Dim>() = q;
    return u;
  };
  auto subcritical_outflow = [&]() {
    const double hg = *spec.depth;
    const double ung = un + 2.0 * std::sqrt(p.g * h) - 2.0 * std::sqrt(p.g * hg);
    return make_state<Dim>(hg, Point<Dim>(ung * n + vel_t));
  };
  auto supercritical_inflow = [&]() {
    State<Dim> u;
    u[0] = *spec.depth;
    u.template tail<Dim>() = detail::discharge_vector<Dim>(spec);
    return u;
  };

  switch (spec.kind) {
    case BoundaryKind::kSubcriticalInflow: return subcritical_inflow();
    case BoundaryKind::kSubcriticalOutflow: return subcritical_outflow();
    case BoundaryKind::kSupercriticalInflow: return supercritical_inflow();
    case BoundaryKind::kSupercriticalOutflow: return interior;
    case BoundaryKind::kSlipWall: return make_state<Dim>(interior[0], vel_t);
    case BoundaryKind::kReflectiveWall:
      return make_state<Dim>(interior[0], Point<Dim>(vel_t - un * n));
    case BoundaryKind::kAutoOpen: {
      const double froude = h > p.h_eps ? vel.norm() / std::sqrt(p.g * h) : 0.0;
      const bool has_h = spec.depth.has_value();
      const bool has_q = spec.discharge.has_value();
      if (froude < 1.0) {
        if (has_q && (un < 0.0 || !has_h)) return subcritical_inflow();
        return subcritical_outflow();
      }
      if (un < 0.0) {
        if (has_h && has_q) return supercritical_inflow();
        if (has_q) return subcritical_inflow();
        return subcritical_outflow();
      }
      return interior;
    }
  }
  throw ConfigError("unknown boundary kind");
}

}  // namespace swnmg
