#pragma once

// Outer nonlinear solvers: nonlinear block LU-SGS, the coarse-to-fine
// initialization cascade and the Newton multigrid iteration.

#include "swnmg/assembly.hpp"
#include "swnmg/core.hpp"
#include "swnmg/mesh.hpp"
#include "swnmg/multigrid.hpp"
#include "swnmg/physics.hpp"

#include <chrono>
#include <cmath>
#include <functional>
#include <limits>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

namespace swnmg {

class InitializationError : public Error {
 public:
  using Error::Error;
};

struct SolverConfig {
  FluxKind flux = FluxKind::kHll;
  CycleConfig cycle;
  int n_levels = 3;
  int n_mg = 2;
  double alpha = 3.0;
  double eps_fd = 1e-8;
  double tau = 1.0;
  double eps_p = 0.2;
  double eps_stop = 1e-12;
  double g = kGravity;
  double h_eps = kDryDepth;
  int max_newton_steps = 100;
  int max_init_sweeps = 100000;
  int max_baseline_steps = 100000;
  /// Abort once the residual exceeds this multiple of its post-initialization value.
  double divergence_factor = 1e4;
  /// One nonlinear LU-SGS pass before each Newton assembly.
  bool presmooth = true;
  /// Also accept residuals below floor_factor * machine epsilon * flux scale,
  /// the level at which the residual sum is pure rounding noise.
  bool roundoff_floor = true;
  double floor_factor = 1.0;
  /// Problem with wet/dry fronts: LLF speed augmentation on every edge.
  bool wet_dry = false;

  PhysicsParams physics() const {
    PhysicsParams p;
    p.g = g;
    p.h_eps = h_eps;
    p.augment_everywhere = wet_dry;
    return p;
  }

  void validate() const {
    cycle.validate();
    if (n_levels < 0) throw ConfigError("number of coarse levels must be >= 0");
    if (n_mg < 1) throw ConfigError("need at least one multigrid cycle per Newton step");
    if (alpha < 0.0) throw ConfigError("alpha must be non-negative");
    if (!(eps_fd > 0.0) || !(eps_p > 0.0) || !(eps_stop >= 0.0) || !(h_eps > 0.0) || !(g > 0.0))
      throw ConfigError("tolerances, gravity and the dry threshold must be positive");
    if (!(tau > 0.0 && tau <= 1.0)) throw ConfigError("tau must lie in (0, 1]");
    if (max_newton_steps < 0 || max_init_sweeps < 0 || max_baseline_steps < 0)
      throw ConfigError("iteration caps must be non-negative");
  }
};

enum class RunStatus { kConverged, kMaxSteps, kDiverged };

inline std::string to_string(RunStatus s) {
  switch (s) {
    case RunStatus::kConverged: return "converged";
    case RunStatus::kMaxSteps: return "max_steps";
    case RunStatus::kDiverged: return "diverged";
  }
  return "?";
}

struct ConvergenceHistory {
  struct Record {
    int step = 0;
    double residual = 0.0;
    double seconds = 0.0;
  };
  std::vector<Record> records;
  RunStatus status = RunStatus::kMaxSteps;
  std::string message;
  double initial_residual = 0.0;
  /// Nonlinear sweeps spent in the initialization cascade, per level.
  std::vector<int> init_sweeps;
  /// Stopping tolerance in force at the last step.
  double tolerance = 0.0;

  int steps() const { return records.empty() ? 0 : records.back().step; }
  double final_residual() const { return records.empty() ? initial_residual : records.back().residual; }
  bool converged() const { return status == RunStatus::kConverged; }
};

template <int Dim>
struct RunResult {
  BlockVector<Dim> solution;
  ConvergenceHistory history;
};

/// Initial data as a function of the centroid and the bed elevation there.
template <int Dim>
using InitialData = std::function<State<Dim>(const Point<Dim>&, double)>;

struct SweepStats {
  int skipped_cells = 0;
};

/// One forward and one backward nonlinear block Gauss-Seidel pass:
/// U_i <- U_i - (alpha ||R_i||_1 I + dR_i/dU_i)^{-1} R_i with the freshest
/// neighbour values, followed by the dry clamp. Cells whose local matrix is
/// singular keep their value.
///
/// A dry cell's own flux derivative vanishes, which would leave only the
/// residual-scaled term and an O(1/alpha) update for any inflow however
/// small. Dry cells therefore also get the neighbours' wave speeds
/// sum_e |e| (|u_j| + sqrt(g h_j)) on the diagonal.
template <int Dim>
SweepStats blusgs_nonlinear_step(const Discretization<Dim>& disc, BlockVector<Dim>& sol, double alpha,
                                 double eps_fd) {
  SweepStats stats;
  const auto& mesh = disc.mesh();
  const int n = mesh.num_cells();
  const double h_eps = disc.physics().h_eps;
  const double g = disc.physics().g;
  auto update = [&](int i) {
    auto [r, d] = disc.cell_residual_and_diagonal(i, sol, eps_fd);
    const double rn = r.template lpNorm<1>();
    if (rn == 0.0) return;
    double shift = alpha * rn;
    if (sol[i][0] <= h_eps) {
      for (int ei : mesh.cells[i].edges) {
        const auto& e = mesh.edges[ei];
        const int j = e.other(i);
        if (j < 0) continue;
        const State<Dim>& uj = sol[j];
        shift += e.length * (velocity<Dim>(uj, h_eps).norm() + std::sqrt(g * std::max(uj[0], 0.0)));
      }
    }
    d += shift * Block<Dim>::Identity();
    const State<Dim> du = d.partialPivLu().solve(-r);
    if (!du.allFinite()) {
      ++stats.skipped_cells;
      return;
    }
    sol[i] += du;
    clamp_dry<Dim>(sol[i], h_eps);
  };
  for (int i = 0; i < n; ++i) update(i);
  for (int i = n - 1; i >= 0; --i) update(i);
  return stats;
}

/// Area-weighted averages of finest-level data onto a coarser level.
template <int Dim>
BlockVector<Dim> average_to_level(const MeshHierarchy<Dim>& h, const BlockVector<Dim>& fine, int level) {
  BlockVector<Dim> cur = fine;
  for (int l = 1; l <= level; ++l) {
    const auto& fm = h.levels[l - 1];
    const auto& cm = h.levels[l];
    BlockVector<Dim> next(cm.num_cells(), State<Dim>::Zero());
    for (int i = 0; i < fm.num_cells(); ++i) next[cm.fine_to_coarse[i]] += fm.cells[i].area * cur[i];
    for (int c = 0; c < cm.num_cells(); ++c) next[c] /= cm.cells[c].area;
    cur = std::move(next);
  }
  return cur;
}

/// Injection of a level-l field onto level l-1 that keeps the free surface
/// h + z and the discharge of the parent cell.
template <int Dim>
BlockVector<Dim> inject_to_finer(const MeshHierarchy<Dim>& h, const BlockVector<Dim>& coarse, int level,
                                 double h_eps = kDryDepth) {
  const auto& cm = h.levels[level];
  const auto& fm = h.levels[level - 1];
  BlockVector<Dim> fine(cm.fine_to_coarse.size());
  for (std::size_t i = 0; i < fine.size(); ++i) {
    const int c = cm.fine_to_coarse[i];
    State<Dim> u = coarse[c];
    if (u[0] > 0.0) u[0] = std::max(0.0, u[0] + cm.cells[c].bed - fm.cells[i].bed);
    clamp_dry<Dim>(u, h_eps);
    fine[i] = u;
  }
  return fine;
}

template <int Dim>
BlockVector<Dim> sample_initial(const MeshLevel<Dim>& mesh, const InitialData<Dim>& init, double h_eps) {
  BlockVector<Dim> u(mesh.num_cells());
  for (const auto& c : mesh.cells) {
    u[c.index] = init(c.centroid, c.bed);
    if (!u[c.index].allFinite() || u[c.index][0] < 0.0)
      throw ConfigError("initial data is not admissible at cell " + std::to_string(c.index));
    clamp_dry<Dim>(u[c.index], h_eps);
  }
  return u;
}

/// Solver for one problem instance: the mesh hierarchy, boundary data and a
/// discretization on every level.
template <int Dim>
class NmgmSolver {
 public:
  NmgmSolver(const MeshHierarchy<Dim>& hierarchy, BoundaryMap boundary, SolverConfig cfg)
      : h_(&hierarchy), cfg_(cfg), mg_(MultigridSolver<Dim>::from_hierarchy(hierarchy, cfg.cycle)) {
    cfg_.validate();
    if (hierarchy.num_coarse_levels() != cfg_.n_levels)
      throw ConfigError("hierarchy depth does not match the configured number of coarse levels");
    for (const auto& lv : hierarchy.levels) disc_.emplace_back(lv, boundary, cfg_.flux, cfg_.physics());
  }

  const SolverConfig& config() const { return cfg_; }
  const Discretization<Dim>& discretization(int level = 0) const { return disc_[level]; }
  MultigridSolver<Dim>& multigrid() { return mg_; }

  /// Coarse-to-fine cascade: average the sampled data to the coarsest level,
  /// iterate nonlinear LU-SGS on level l until the residual drops below
  /// eps_p 2^-l, then inject to the next finer level.
  BlockVector<Dim> initialize(const InitialData<Dim>& init, std::vector<int>* sweeps = nullptr) {
    const BlockVector<Dim> fine = sample_initial<Dim>(h_->finest(), init, cfg_.h_eps);
    const int nl = cfg_.n_levels;
    if (sweeps) sweeps->assign(nl + 1, 0);
    if (nl == 0) return fine;
    BlockVector<Dim> u = average_to_level<Dim>(*h_, fine, nl);
    for (auto& s : u) clamp_dry<Dim>(s, cfg_.h_eps);
    for (int l = nl; l >= 1; --l) {
      const double tol = cfg_.eps_p * std::pow(2.0, -l);
      int count = 0;
      while (disc_[l].assemble_residual(u).total >= tol) {
        if (count >= cfg_.max_init_sweeps)
          throw InitializationError("initialization did not reach tolerance on level " + std::to_string(l));
        blusgs_nonlinear_step(disc_[l], u, cfg_.alpha, cfg_.eps_fd);
        if (!all_finite<Dim>(u)) throw InitializationError("non-finite state during initialization");
        ++count;
      }
      if (sweeps) (*sweeps)[l] = count;
      u = inject_to_finer<Dim>(*h_, u, l, cfg_.h_eps);
    }
    return u;
  }

  /// One Newton multigrid step; returns the residual after the update.
  /// A non-finite update is rolled back and reported as an error.
  ResidualVector<Dim> newton_mg_step(BlockVector<Dim>& u) {
    const BlockVector<Dim> saved = u;
    const auto& d0 = disc_[0];
    if (cfg_.presmooth) blusgs_nonlinear_step(d0, u, cfg_.alpha, cfg_.eps_fd);
    auto sys = d0.assemble_regularized_system(u, cfg_.alpha, cfg_.eps_fd);
    mg_.setup(std::move(sys.matrix), std::move(sys.rhs_residual));
    const BlockVector<Dim> du = mg_.solve(cfg_.n_mg);
    for (std::size_t i = 0; i < u.size(); ++i) {
      u[i] += cfg_.tau * du[i];
      clamp_dry<Dim>(u[i], cfg_.h_eps);
    }
    if (!all_finite<Dim>(u)) {
      u = saved;
      throw Error("non-finite state after the Newton update");
    }
    return d0.assemble_residual(u);
  }

  RunResult<Dim> run(BlockVector<Dim> u) {
    return iterate(std::move(u), cfg_.max_newton_steps, [this](BlockVector<Dim>& v) { return newton_mg_step(v); });
  }

  RunResult<Dim> run_baseline(BlockVector<Dim> u) {
    return iterate(std::move(u), cfg_.max_baseline_steps, [this](BlockVector<Dim>& v) {
      blusgs_nonlinear_step(disc_[0], v, cfg_.alpha, cfg_.eps_fd);
      if (!all_finite<Dim>(v)) throw Error("non-finite state after a nonlinear sweep");
      return disc_[0].assemble_residual(v);
    });
  }

 private:
  template <class Step>
  RunResult<Dim> iterate(BlockVector<Dim> u, int max_steps, Step&& step) {
    using Clock = std::chrono::steady_clock;
    const auto t0 = Clock::now();
    RunResult<Dim> out;
    auto& hist = out.history;
    auto tolerance = [&](const ResidualVector<Dim>& r) {
      const double floor = cfg_.floor_factor * std::numeric_limits<double>::epsilon() * r.flux_scale;
      return cfg_.roundoff_floor ? std::max(cfg_.eps_stop, floor) : cfg_.eps_stop;
    };
    try {
      const auto r0 = disc_[0].assemble_residual(u);
      hist.initial_residual = r0.total;
      hist.tolerance = tolerance(r0);
    } catch (const Error& e) {
      hist.status = RunStatus::kDiverged;
      hist.message = e.what();
      out.solution = std::move(u);
      return out;
    }
    const double guard = cfg_.divergence_factor * std::max(hist.initial_residual, 1e-6);
    hist.status = RunStatus::kMaxSteps;
    if (hist.initial_residual < hist.tolerance) hist.status = RunStatus::kConverged;
    for (int k = 1; k <= max_steps && hist.status != RunStatus::kConverged; ++k) {
      double r = 0.0;
      try {
        const ResidualVector<Dim> res = step(u);
        r = res.total;
        hist.tolerance = tolerance(res);
      } catch (const Error& e) {
        hist.status = RunStatus::kDiverged;
        hist.message = e.what();
        break;
      }
      const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
      hist.records.push_back({k, r, secs});
      if (!std::isfinite(r) || r > guard) {
        hist.status = RunStatus::kDiverged;
        hist.message = "residual grew beyond the divergence guard";
        break;
      }
      if (r < hist.tolerance) hist.status = RunStatus::kConverged;
    }
    out.solution = std::move(u);
    return out;
  }

  const MeshHierarchy<Dim>* h_;
  SolverConfig cfg_;
  std::vector<Discretization<Dim>> disc_;
  MultigridSolver<Dim> mg_;
};

/// Cascade initialization followed by Newton multigrid iterations.
template <int Dim>
RunResult<Dim> run_nmgm(const MeshHierarchy<Dim>& h, const BoundaryMap& boundary, const InitialData<Dim>& init,
                        const SolverConfig& cfg) {
  NmgmSolver<Dim> solver(h, boundary, cfg);
  std::vector<int> sweeps;
  BlockVector<Dim> u;
  try {
    u = solver.initialize(init, &sweeps);
  } catch (const Error& e) {
    if (dynamic_cast<const ConfigError*>(&e)) throw;
    RunResult<Dim> out;
    out.history.status = RunStatus::kDiverged;
    out.history.message = e.what();
    return out;
  }
  auto res = solver.run(std::move(u));
  res.history.init_sweeps = std::move(sweeps);
  return res;
}

/// Cascade initialization followed by nonlinear LU-SGS sweeps on the finest level.
template <int Dim>
RunResult<Dim> run_blusgs_baseline(const MeshHierarchy<Dim>& h, const BoundaryMap& boundary,
                                   const InitialData<Dim>& init, const SolverConfig& cfg) {
  NmgmSolver<Dim> solver(h, boundary, cfg);
  std::vector<int> sweeps;
  BlockVector<Dim> u;
  try {
    u = solver.initialize(init, &sweeps);
  } catch (const Error& e) {
    if (dynamic_cast<const ConfigError*>(&e)) throw;
    RunResult<Dim> out;
    out.history.status = RunStatus::kDiverged;
    out.history.message = e.what();
    return out;
  }
  auto res = solver.run_baseline(std::move(u));
  res.history.init_sweeps = std::move(sweeps);
  return res;
}

inline void write_history_csv(std::ostream& os, const ConvergenceHistory& h) {
  os.precision(17);
  os << "step,residual,seconds\n";
  os << 0 << ',' << h.initial_residual << ',' << 0.0 << '\n';
  for (const auto& r : h.records) os << r.step << ',' << r.residual << ',' << r.seconds << '\n';
}

/// Columnar text: centroid, h, hu[, hv], z, h + z.
template <int Dim>
void write_solution(std::ostream& os, const MeshLevel<Dim>& mesh, const BlockVector<Dim>& u) {
  os.precision(17);
  os << (Dim == 1 ? "# x h hu z eta\n" : "# x y h hu hv z eta\n");
  for (const auto& c : mesh.cells) {
    for (int d = 0; d < Dim; ++d) os << c.centroid[d] << ' ';
    for (int k = 0; k <= Dim; ++k) os << u[c.index][k] << ' ';
    os << c.bed << ' ' << u[c.index][0] + c.bed << '\n';
  }
}

}  // namespace swnmg
