#pragma once

// Spectral analysis of the block SGS smoother, rate-law fitting, exact
// steady-state oracles and error norms.

#include "swnmg/assembly.hpp"
#include "swnmg/core.hpp"
#include "swnmg/mesh.hpp"
#include "swnmg/multigrid.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <limits>
#include <numbers>
#include <ostream>
#include <utility>
#include <vector>

namespace swnmg {

/// Dense error propagation matrix of one symmetric block Gauss-Seidel sweep
/// on A, built column by column from sweeps with zero right-hand side.
template <int Dim>
Eigen::MatrixXd build_iteration_matrix(const BlockSparseMatrix<Dim>& a, int max_dim = 4096) {
  constexpr int m = Dim + 1;
  const int n = a.rows();
  const int dim = n * m;
  if (dim > max_dim) throw ConfigError("iteration matrix dimension exceeds the cap");
  LinearLevel<Dim> lv;
  lv.matrix = a;
  lv.rhs.assign(n, State<Dim>::Zero());
  lv.factorize();
  Eigen::MatrixXd t(dim, dim);
  for (int k = 0; k < dim; ++k) {
    lv.correction.assign(n, State<Dim>::Zero());
    lv.correction[k / m][k % m] = 1.0;
    block_sgs_sweep(lv);
    for (int i = 0; i < n; ++i) t.block<m, 1>(i * m, k) = lv.correction[i];
  }
  return t;
}

struct SpectralReport {
  std::vector<std::complex<double>> eigenvalues;
  double rho = 0.0;
  double r_inf = 0.0;
};

inline SpectralReport spectrum(const Eigen::MatrixXd& t) {
  if (!t.allFinite()) throw Error("iteration matrix has non-finite entries");
  SpectralReport rep;
  if (t.rows() == 0) return rep;
  Eigen::EigenSolver<Eigen::MatrixXd> es;
  es.setMaxIterations(30 * static_cast<int>(t.rows()));
  es.compute(t, false);
  if (es.info() != Eigen::Success) throw Error("eigenvalue iteration did not converge");
  const auto& ev = es.eigenvalues();
  rep.eigenvalues.assign(ev.data(), ev.data() + ev.size());
  for (const auto& l : rep.eigenvalues) rep.rho = std::max(rep.rho, std::abs(l));
  rep.r_inf = rep.rho > 0.0 ? -std::log(rep.rho) : std::numeric_limits<double>::infinity();
  return rep;
}

/// Eigenvalue with the largest modulus.
inline std::complex<double> dominant_eigenvalue(const SpectralReport& rep) {
  std::complex<double> best = 0.0;
  for (const auto& l : rep.eigenvalues)
    if (std::abs(l) > std::abs(best)) best = l;
  return best;
}

/// Spectral radius estimate by normalized power iteration.
inline double power_iteration_rho(const Eigen::MatrixXd& t, int max_iter = 100000, double tol = 1e-13) {
  Eigen::VectorXd x = Eigen::VectorXd::Ones(t.rows());
  for (Eigen::Index i = 0; i < x.size(); ++i) x[i] += 1e-3 * std::sin(1.0 + 3.0 * static_cast<double>(i));
  x.normalize();
  double est = 0.0;
  for (int k = 0; k < max_iter; ++k) {
    Eigen::VectorXd y = t * x;
    const double nrm = y.norm();
    if (nrm == 0.0) return 0.0;
    x = y / nrm;
    if (k > 10 && std::abs(nrm - est) < tol * std::max(1.0, nrm)) return nrm;
    est = nrm;
  }
  return est;
}

/// ||T v - lambda v|| / ||v|| for v from a few steps of shifted inverse iteration.
inline double eigen_residual(const Eigen::MatrixXd& t, std::complex<double> lambda, int steps = 3) {
  using CMat = Eigen::MatrixXcd;
  using CVec = Eigen::VectorXcd;
  const Eigen::Index n = t.rows();
  const CMat tc = t.cast<std::complex<double>>();
  const std::complex<double> mu = lambda + std::complex<double>(1e-10 * (1.0 + std::abs(lambda)), 0.0);
  Eigen::PartialPivLU<CMat> lu(tc - mu * CMat::Identity(n, n));
  CVec v = CVec::Ones(n);
  for (int k = 0; k < steps; ++k) {
    v = lu.solve(v);
    v /= v.norm();
  }
  return (tc * v - lambda * v).norm() / v.norm();
}

/// One-sweep error propagation check: returns max |T e - S(e)| over a
/// pseudo-random vector e, where S is an actual zero-rhs sweep.
template <int Dim>
double sweep_matrix_mismatch(const BlockSparseMatrix<Dim>& a, const Eigen::MatrixXd& t, unsigned seed = 7) {
  constexpr int m = Dim + 1;
  LinearLevel<Dim> lv;
  lv.matrix = a;
  lv.rhs.assign(a.rows(), State<Dim>::Zero());
  lv.factorize();
  Eigen::VectorXd e(t.cols());
  unsigned s = seed;
  for (Eigen::Index i = 0; i < e.size(); ++i) {
    s = s * 1664525u + 1013904223u;
    e[i] = static_cast<double>(s >> 8) / static_cast<double>(1u << 24) - 0.5;
  }
  lv.correction.resize(a.rows());
  for (int i = 0; i < a.rows(); ++i) lv.correction[i] = e.segment<m>(i * m);
  block_sgs_sweep(lv);
  const Eigen::VectorXd te = t * e;
  double worst = 0.0;
  for (int i = 0; i < a.rows(); ++i) worst = std::max(worst, (lv.correction[i] - te.segment<m>(i * m)).cwiseAbs().maxCoeff());
  return worst;
}

/// Spectrum of the smoother around a (converged) state.
template <int Dim>
SpectralReport steady_state_spectrum(const Discretization<Dim>& disc, const BlockVector<Dim>& sol, double alpha,
                                     double eps_fd, int max_dim = 4096) {
  const auto sys = disc.assemble_regularized_system(sol, alpha, eps_fd);
  return spectrum(build_iteration_matrix(sys.matrix, max_dim));
}

struct RateFit {
  std::vector<std::pair<double, double>> samples;
  double c = 0.0;
  double residual = 0.0;
};

/// Least-squares slope of (1 - rho) against dx through the origin.
inline RateFit fit_rate_law(std::vector<std::pair<double, double>> samples) {
  if (samples.size() < 3) throw ConfigError("rate fit needs at least 3 samples");
  std::vector<double> dx;
  for (const auto& [d, r] : samples) {
    if (!(d > 0.0) || !std::isfinite(r)) throw ConfigError("rate fit samples must have dx > 0 and finite rho");
    dx.push_back(d);
  }
  std::sort(dx.begin(), dx.end());
  if (std::adjacent_find(dx.begin(), dx.end()) != dx.end()) throw ConfigError("rate fit samples need distinct dx");
  double sxy = 0.0, sxx = 0.0;
  for (const auto& [d, r] : samples) {
    sxy += d * (1.0 - r);
    sxx += d * d;
  }
  RateFit fit;
  fit.c = sxy / sxx;
  double ss = 0.0;
  for (const auto& [d, r] : samples) ss += std::pow(1.0 - r - fit.c * d, 2);
  fit.residual = std::sqrt(ss);
  fit.samples = std::move(samples);
  return fit;
}

// ---------------------------------------------------------------------------
// Exact 1D steady states.

/// Velocity root of u^3 + (2gz - 2g - 1) u + 2g = 0 on the subcritical
/// branch 0 < u < g^(1/3) (unit discharge, unit far-field depth).
inline double example1_cubic_velocity(double z, double g = kGravity) {
  auto p = [&](double u) { return u * u * u + (2.0 * g * z - 2.0 * g - 1.0) * u + 2.0 * g; };
  double lo = 0.0, hi = std::cbrt(g);
  if (!(p(lo) > 0.0 && p(hi) < 0.0)) throw Error("no subcritical root of the cubic");
  double u = 0.5 * (lo + hi);
  for (int k = 0; k < 200; ++k) {
    const double f = p(u);
    if (f > 0.0) lo = u; else hi = u;
    const double df = 3.0 * u * u + (2.0 * g * z - 2.0 * g - 1.0);
    double next = df != 0.0 ? u - f / df : 0.5 * (lo + hi);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::abs(next - u) < 1e-15 * std::max(1.0, std::abs(u))) return next;
    u = next;
  }
  return u;
}

/// Depth solving q^2/(2h^2) + g(h + z) = energy on the subcritical
/// (h > h_c) or supercritical (h < h_c) branch.
inline double bernoulli_depth(double q, double z, double energy, bool subcritical, double g = kGravity) {
  const double hc = std::cbrt(q * q / g);
  auto f = [&](double h) { return q * q / (2.0 * h * h) + g * (h + z) - energy; };
  if (f(hc) > 1e-13 * std::max(1.0, std::abs(energy))) throw Error("no Bernoulli root: energy below critical");
  if (f(hc) >= 0.0) return hc;
  double lo, hi;
  if (subcritical) {
    lo = hc;
    hi = hc;
    while (f(hi) < 0.0) hi *= 2.0;
  } else {
    hi = hc;
    lo = hc;
    while (f(lo) < 0.0) lo *= 0.5;
  }
  // f changes sign on [lo, hi]; plain bisection to full precision.
  const bool f_lo_neg = f(lo) < 0.0;
  for (int k = 0; k < 200 && hi - lo > 1e-16 * hi; ++k) {
    const double mid = 0.5 * (lo + hi);
    if ((f(mid) < 0.0) == f_lo_neg) lo = mid; else hi = mid;
  }
  return 0.5 * (lo + hi);
}

/// Smooth subcritical steady state with discharge q and far-field depth
/// h_inf over bed elevation z (flat far field). Returns (h, u).
inline std::pair<double, double> exact_subcritical_1d(double z, double q = 1.0, double h_inf = 1.0,
                                                      double g = kGravity) {
  const double energy = q * q / (2.0 * h_inf * h_inf) + g * h_inf;
  const double h = bernoulli_depth(q, z, energy, true, g);
  return {h, q / h};
}

/// Transcritical flow over a single bump: critical at the crest, subcritical
/// upstream, supercritical downstream, optionally followed by a stationary
/// hydraulic jump onto the subcritical branch that meets h_down at x_out.
class TranscriticalOracle {
 public:
  TranscriticalOracle(std::function<double(double)> bed, double x_crest, double x_out, double q, double h_down,
                      bool with_shock, double g = kGravity)
      : bed_(std::move(bed)), x_crest_(x_crest), x_out_(x_out), q_(q), h_down_(h_down), g_(g) {
    h_crit_ = std::cbrt(q * q / g);
    e_crest_ = 1.5 * g * h_crit_ + g * bed_(x_crest);
    e_down_ = q * q / (2.0 * h_down * h_down) + g * (h_down + bed_(x_out));
    if (with_shock) locate_shock();
  }

  double critical_depth() const { return h_crit_; }
  double shock_position() const { return x_shock_; }
  bool has_shock() const { return std::isfinite(x_shock_); }
  double discharge() const { return q_; }

  /// Momentum function q^2/h + g h^2/2, conserved across a stationary jump.
  double momentum_function(double h) const { return q_ * q_ / h + 0.5 * g_ * h * h; }

  double depth(double x) const {
    if (x <= x_crest_) return bernoulli_depth(q_, bed_(x), e_crest_, true, g_);
    if (has_shock() && x > x_shock_) return bernoulli_depth(q_, bed_(x), e_down_, true, g_);
    return bernoulli_depth(q_, bed_(x), e_crest_, false, g_);
  }

  /// Depths immediately upstream and downstream of the jump.
  std::pair<double, double> jump_depths() const {
    return {bernoulli_depth(q_, bed_(x_shock_), e_crest_, false, g_),
            bernoulli_depth(q_, bed_(x_shock_), e_down_, true, g_)};
  }

 private:
  /// Momentum mismatch between the supercritical and downstream branches;
  /// NaN where the downstream branch does not exist.
  double mismatch(double x) const {
    const double z = bed_(x);
    double h1 = 0.0, h2 = 0.0;
    try {
      h1 = bernoulli_depth(q_, z, e_crest_, false, g_);
      h2 = bernoulli_depth(q_, z, e_down_, true, g_);
    } catch (const Error&) {
      return std::numeric_limits<double>::quiet_NaN();
    }
    return momentum_function(h1) - momentum_function(h2);
  }

  void locate_shock() {
    constexpr int kScan = 20000;
    double a = x_crest_, fa = mismatch(a);
    for (int k = 1; k <= kScan; ++k) {
      const double b = x_crest_ + (x_out_ - x_crest_) * k / kScan;
      const double fb = mismatch(b);
      if (!std::isnan(fa) && !std::isnan(fb) && (fa < 0.0) != (fb < 0.0)) {
        double lo = a, hi = b;
        for (int it = 0; it < 200; ++it) {
          const double mid = 0.5 * (lo + hi);
          if ((mismatch(mid) < 0.0) == (fa < 0.0)) lo = mid; else hi = mid;
        }
        x_shock_ = 0.5 * (lo + hi);
        return;
      }
      a = b;
      fa = fb;
    }
    throw Error("no admissible shock position in the domain");
  }

  std::function<double(double)> bed_;
  double x_crest_, x_out_, q_, h_down_, g_;
  double h_crit_ = 0.0, e_crest_ = 0.0, e_down_ = 0.0;
  double x_shock_ = std::numeric_limits<double>::quiet_NaN();
};

/// Lake at rest with surface level c: h = max(c - z, 0), zero velocity.
template <int Dim>
BlockVector<Dim> lake_at_rest_exact(const MeshLevel<Dim>& mesh, double c) {
  BlockVector<Dim> u(mesh.num_cells(), State<Dim>::Zero());
  for (const auto& cell : mesh.cells) u[cell.index][0] = std::max(c - cell.bed, 0.0);
  return u;
}

template <int Dim>
struct ErrorNorms {
  State<Dim> l1 = State<Dim>::Zero();
  State<Dim> l2 = State<Dim>::Zero();
  State<Dim> linf = State<Dim>::Zero();
};

/// Area-weighted L1, L2 and max norms of numeric - exact, per component.
template <int Dim>
ErrorNorms<Dim> error_norms(const BlockVector<Dim>& numeric, const BlockVector<Dim>& exact,
                            const MeshLevel<Dim>& mesh) {
  if (numeric.size() != exact.size() || static_cast<int>(numeric.size()) != mesh.num_cells())
    throw ConfigError("error_norms: dimension mismatch");
  ErrorNorms<Dim> e;
  for (const auto& c : mesh.cells) {
    const State<Dim> d = (numeric[c.index] - exact[c.index]).cwiseAbs();
    e.l1 += c.area * d;
    e.l2 += c.area * d.cwiseProduct(d);
    e.linf = e.linf.cwiseMax(d);
  }
  e.l2 = e.l2.cwiseSqrt();
  return e;
}

/// Steady oblique hydraulic jump of a supercritical stream turned by a wall
/// deflection theta (radians).
struct ObliqueJump {
  /// Jump angle to the upstream flow direction.
  double beta = 0.0;
  /// Downstream over upstream depth.
  double depth_ratio = 1.0;
  double froude_after = 0.0;
};

inline ObliqueJump oblique_jump(double froude, double theta) {
  if (!(froude > 1.0)) throw ConfigError("oblique jump needs a supercritical stream");
  if (!(theta > 0.0)) throw ConfigError("oblique jump needs a positive deflection");
  // Deflection produced by a jump at angle b; rises from 0 at the Mach angle.
  auto deflection = [&](double b) {
    const double root = std::sqrt(1.0 + 8.0 * froude * froude * std::sin(b) * std::sin(b));
    const double t = std::tan(b);
    return std::atan(t * (root - 3.0) / (2.0 * t * t + root - 1.0));
  };
  // Weak branch: bracket between the Mach angle and the maximum deflection.
  const double mach = std::asin(1.0 / froude);
  double lo = mach, hi = mach;
  for (int k = 1; k <= 2000; ++k) {
    const double b = mach + (0.5 * std::numbers::pi - mach) * k / 2000.0;
    if (deflection(b) >= theta) {
      hi = b;
      break;
    }
    lo = b;
  }
  if (hi == mach) throw ConfigError("deflection exceeds the attached-jump limit");
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    (deflection(mid) < theta ? lo : hi) = mid;
  }
  ObliqueJump j;
  j.beta = 0.5 * (lo + hi);
  const double fn = froude * std::sin(j.beta);
  j.depth_ratio = 0.5 * (std::sqrt(1.0 + 8.0 * fn * fn) - 1.0);
  j.froude_after = fn / std::pow(j.depth_ratio, 1.5) / std::sin(j.beta - theta);
  return j;
}

/// Area-weighted mean depth over cells whose centroid lies within `radius`
/// of `center`.
template <int Dim>
double mean_depth_near(const MeshLevel<Dim>& mesh, const BlockVector<Dim>& sol, const Point<Dim>& center,
                       double radius) {
  double a = 0.0, s = 0.0;
  for (const auto& c : mesh.cells) {
    if ((c.centroid - center).norm() > radius) continue;
    a += c.area;
    s += c.area * sol[c.index][0];
  }
  if (a == 0.0) throw ConfigError("no cell centroid within the sampling radius");
  return s / a;
}

/// Two-column (Re, Im) text.
inline void write_eigenvalues(std::ostream& os, const SpectralReport& rep) {
  os.precision(17);
  os << "# re im\n";
  for (const auto& l : rep.eigenvalues) os << l.real() << ' ' << l.imag() << '\n';
}

inline void write_rate_fit_csv(std::ostream& os, const RateFit& fit) {
  os.precision(17);
  os << "dx,rho\n";
  for (const auto& [d, r] : fit.samples) os << d << ',' << r << '\n';
  os << "# C " << fit.c << " residual " << fit.residual << '\n';
}

}  // namespace swnmg
