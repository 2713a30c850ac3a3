#pragma once

// Randomized property checks shared by the unit tests and the acceptance
// runner. Each returns the worst observed error so callers can compare it
// against their own tolerance and print it.

#include "swnmg/swnmg.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

namespace swnmg::props {

inline constexpr int kRandomStates = 2000;

template <int Dim>
State<Dim> random_wet_state(std::mt19937_64& rng, double h_lo = 0.05, double h_hi = 3.0) {
  std::uniform_real_distribution<double> hd(h_lo, h_hi), ud(-4.0, 4.0);
  Point<Dim> vel;
  for (int d = 0; d < Dim; ++d) vel[d] = ud(rng);
  return make_state<Dim>(hd(rng), vel);
}

template <int Dim>
Point<Dim> random_normal(std::mt19937_64& rng) {
  if constexpr (Dim == 1) {
    return Point<1>(std::bernoulli_distribution(0.5)(rng) ? 1.0 : -1.0);
  } else {
    const double a = std::uniform_real_distribution<double>(0.0, 2.0 * std::numbers::pi)(rng);
    return Point<2>(std::cos(a), std::sin(a));
  }
}

template <int Dim>
double rel_err(const State<Dim>& a, const State<Dim>& b) {
  return (a - b).cwiseAbs().maxCoeff() / (1.0 + b.cwiseAbs().maxCoeff());
}

struct FluxErrors {
  double consistency = 0.0;
  double conservation = 0.0;
  double rotation = 0.0;
  int samples = 0;
};

/// F(U, U) = F_n(U), F(l, r, n) = -F(r, l, -n) and, in 2D,
/// F(l, r, n) = T(n)^T F(T l, T r, e_x).
template <int Dim>
FluxErrors flux_properties(FluxKind kind, int n_samples = kRandomStates, unsigned seed = 12345) {
  std::mt19937_64 rng(seed);
  PhysicsParams p;
  FluxErrors e;
  for (int s = 0; s < n_samples; ++s) {
    const State<Dim> l = random_wet_state<Dim>(rng), r = random_wet_state<Dim>(rng);
    const Point<Dim> n = random_normal<Dim>(rng);
    e.consistency = std::max(e.consistency, rel_err<Dim>(numerical_flux<Dim>(kind, l, l, n, p),
                                                         physical_flux_normal<Dim>(l, n, p.g)));
    const State<Dim> f = numerical_flux<Dim>(kind, l, r, n, p);
    const State<Dim> b = numerical_flux<Dim>(kind, r, l, Point<Dim>(-n), p);
    e.conservation = std::max(e.conservation, rel_err<Dim>(State<Dim>(-b), f));
    if constexpr (Dim == 2) {
      const Block<2> t = rotation(n);
      const State<2> fr = t.transpose() * numerical_flux<2>(kind, t * l, t * r, Point<2>(1.0, 0.0), p);
      e.rotation = std::max(e.rotation, rel_err<2>(fr, f));
    }
    ++e.samples;
  }
  return e;
}

/// Forward-difference Jacobian of a state map.
template <int Dim, class F>
Block<Dim> fd_jacobian(F&& f, const State<Dim>& u, double eps = 1e-8) {
  const State<Dim> base = f(u);
  Block<Dim> j;
  for (int k = 0; k <= Dim; ++k) {
    State<Dim> v = u;
    v[k] += eps;
    j.col(k) = (f(v) - base) / eps;
  }
  return j;
}

/// Worst relative mismatch between the FD Jacobian of the LLF flux with a
/// frozen speed bound and the analytic 1/2 (dF/dU +- s I).
template <int Dim>
double llf_frozen_jacobian_error(int n_samples = kRandomStates, unsigned seed = 777) {
  std::mt19937_64 rng(seed);
  PhysicsParams p;
  double worst = 0.0;
  for (int s = 0; s < n_samples; ++s) {
    const State<Dim> l = random_wet_state<Dim>(rng, 0.2), r = random_wet_state<Dim>(rng, 0.2);
    const Point<Dim> n = random_normal<Dim>(rng);
    const double smax = llf_max_speed<Dim>(l, r, n, p);
    const Block<Dim> fd_l =
        fd_jacobian<Dim>([&](const State<Dim>& v) { return flux_llf_with_speed<Dim>(v, r, n, smax, p); }, l);
    const Block<Dim> fd_r =
        fd_jacobian<Dim>([&](const State<Dim>& v) { return flux_llf_with_speed<Dim>(l, v, n, smax, p); }, r);
    const Block<Dim> an_l = llf_frozen_jacobian<Dim>(l, r, n, smax, false, p.g);
    const Block<Dim> an_r = llf_frozen_jacobian<Dim>(l, r, n, smax, true, p.g);
    worst = std::max(worst, (fd_l - an_l).cwiseAbs().maxCoeff() / (1.0 + an_l.cwiseAbs().maxCoeff()));
    worst = std::max(worst, (fd_r - an_r).cwiseAbs().maxCoeff() / (1.0 + an_r.cwiseAbs().maxCoeff()));
  }
  return worst;
}

/// Random block-sparse matrix on a 1D chain or 2D grid pattern. With
/// `integers` the entries are small integers so that sums are exact.
template <int Dim>
BlockSparseMatrix<Dim> random_grid_matrix(int nx, int ny, std::mt19937_64& rng, bool integers,
                                          double diag_boost = 0.0) {
  const int n = nx * ny;
  std::vector<std::vector<int>> pat(n);
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i) {
      const int c = j * nx + i;
      if (i > 0) pat[c].push_back(c - 1);
      if (i + 1 < nx) pat[c].push_back(c + 1);
      if (j > 0) pat[c].push_back(c - nx);
      if (j + 1 < ny) pat[c].push_back(c + nx);
    }
  auto a = BlockSparseMatrix<Dim>::from_pattern(std::move(pat));
  std::uniform_int_distribution<int> id(-8, 8);
  std::uniform_real_distribution<double> rd(-1.0, 1.0);
  for (auto& b : a.blocks)
    for (int r = 0; r <= Dim; ++r)
      for (int c = 0; c <= Dim; ++c) b(r, c) = integers ? id(rng) : rd(rng);
  for (int i = 0; i < n; ++i) a.diagonal(i) += diag_boost * Block<Dim>::Identity();
  return a;
}

/// Pairing (1D, ny = 1) or 2x2 agglomeration map of an nx x ny grid.
inline std::vector<int> grid_parent_map(int nx, int ny) {
  std::vector<int> m(nx * ny);
  const int cnx = nx / 2;
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i) m[j * nx + i] = (ny == 1 ? 0 : (j / 2) * cnx) + i / 2;
  return m;
}

/// Max |coarsen(a A + b B) - (a coarsen(A) + b coarsen(B))| on integer data
/// (zero when the summation is exact).
template <int Dim>
double galerkin_linearity_error(unsigned seed = 99) {
  std::mt19937_64 rng(seed);
  const int nx = 8, ny = Dim == 1 ? 1 : 6;
  const auto pm = grid_parent_map(nx, ny);
  const int nc = *std::max_element(pm.begin(), pm.end()) + 1;
  const auto a = random_grid_matrix<Dim>(nx, ny, rng, true);
  auto b = a;
  for (auto& blk : b.blocks) blk = blk.unaryExpr([&](double) { return double(std::uniform_int_distribution<int>(-8, 8)(rng)); });
  const double ca = 2.0, cb = -3.0;
  auto comb = a;
  for (std::size_t k = 0; k < comb.blocks.size(); ++k) comb.blocks[k] = ca * a.blocks[k] + cb * b.blocks[k];
  const auto lhs = galerkin_coarsen(comb, pm, nc);
  const auto ga = galerkin_coarsen(a, pm, nc), gb = galerkin_coarsen(b, pm, nc);
  return (lhs.to_dense() - (ca * ga.to_dense() + cb * gb.to_dense())).cwiseAbs().maxCoeff();
}

/// Dense symmetric block Gauss-Seidel sweep on the expanded system A x = b.
inline void dense_block_sgs(const Eigen::MatrixXd& a, const Eigen::VectorXd& b, Eigen::VectorXd& x, int m) {
  const int n = static_cast<int>(a.rows()) / m;
  auto row = [&](int i) {
    Eigen::VectorXd r = b.segment(i * m, m);
    for (int j = 0; j < n; ++j)
      if (j != i) r -= a.block(i * m, j * m, m, m) * x.segment(j * m, m);
    x.segment(i * m, m) = a.block(i * m, i * m, m, m).partialPivLu().solve(r);
  };
  for (int i = 0; i < n; ++i) row(i);
  for (int i = n - 1; i >= 0; --i) row(i);
}

/// Two-level V-cycle through mg_cycle against the hand-unrolled
/// smooth / restrict / exact coarse solve / prolong / smooth sequence.
template <int Dim>
double two_level_cycle_mismatch(unsigned seed = 4242) {
  constexpr int m = Dim + 1;
  std::mt19937_64 rng(seed);
  const int nx = 8, ny = Dim == 1 ? 1 : 4;
  const int n = nx * ny;
  const auto pm = grid_parent_map(nx, ny);
  const int nc = *std::max_element(pm.begin(), pm.end()) + 1;
  const auto a = random_grid_matrix<Dim>(nx, ny, rng, false, 6.0);
  BlockVector<Dim> r(n);
  std::uniform_real_distribution<double> rd(-1.0, 1.0);
  for (auto& v : r)
    for (int k = 0; k < m; ++k) v[k] = rd(rng);

  CycleConfig cfg;
  MultigridSolver<Dim> mg({pm}, cfg);
  mg.setup(a, r);
  const BlockVector<Dim> got = mg.solve(1);

  const Eigen::MatrixXd ad = a.to_dense();
  Eigen::VectorXd b(n * m);
  for (int i = 0; i < n; ++i) b.segment<m>(i * m) = -r[i];
  Eigen::MatrixXd p = Eigen::MatrixXd::Zero(n * m, nc * m);
  for (int i = 0; i < n; ++i) p.block(i * m, pm[i] * m, m, m).setIdentity();
  Eigen::VectorXd x = Eigen::VectorXd::Zero(n * m);
  dense_block_sgs(ad, b, x, m);
  const Eigen::MatrixXd ac = p.transpose() * ad * p;
  const Eigen::VectorXd d = ac.partialPivLu().solve(p.transpose() * (b - ad * x));
  x += p * d;
  dense_block_sgs(ad, b, x, m);

  double worst = 0.0;
  for (int i = 0; i < n; ++i) worst = std::max(worst, (got[i] - x.segment<m>(i * m)).cwiseAbs().maxCoeff());
  return worst;
}

/// |T e - sweep(e)| for the dense iteration matrix of a random system.
template <int Dim>
double sweep_vs_matrix_error(unsigned seed = 31) {
  std::mt19937_64 rng(seed);
  const auto a = random_grid_matrix<Dim>(Dim == 1 ? 12 : 6, Dim == 1 ? 1 : 4, rng, false, 5.0);
  const Eigen::MatrixXd t = build_iteration_matrix(a);
  double worst = 0.0;
  for (unsigned s = 1; s <= 5; ++s) worst = std::max(worst, sweep_matrix_mismatch(a, t, seed + s));
  return worst;
}

}  // namespace swnmg::props
