#pragma once

// Batch studies built on the driver: convergence tables over mesh sizes,
// smoother spectra at converged states and Froude-number sweeps.

#include "swnmg/analysis.hpp"
#include "swnmg/driver.hpp"
#include "swnmg/problems.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <functional>
#include <exception>
#include <iomanip>
#include <limits>
#include <mutex>
#include <optional>
#include <ostream>
#include <string>
#include <thread>
#include <vector>

namespace swnmg {

/// Runs fn(0..n-1) on up to `jobs` threads. The first exception is rethrown.
inline void parallel_for(int n, int jobs, const std::function<void(int)>& fn) {
  jobs = std::clamp(jobs, 1, std::max(n, 1));
  if (jobs == 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr err;
  std::mutex err_mu;
  std::vector<std::thread> pool;
  for (int t = 0; t < jobs; ++t)
    pool.emplace_back([&] {
      for (int i = next++; i < n; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(err_mu);
          if (!err) err = std::current_exception();
        }
      }
    });
  for (auto& th : pool) th.join();
  if (err) std::rethrow_exception(err);
}

/// Summary of one run, as recorded in tables and sweeps.
struct RunOutcome {
  RunStatus status = RunStatus::kMaxSteps;
  int steps = 0;
  double final_residual = 0.0;
  double seconds = 0.0;
  std::string message;

  static RunOutcome from(const ConvergenceHistory& h) {
    RunOutcome o;
    o.status = h.status;
    o.steps = h.steps();
    o.final_residual = h.final_residual();
    o.seconds = h.records.empty() ? 0.0 : h.records.back().seconds;
    o.message = h.message;
    return o;
  }
  bool converged() const { return status == RunStatus::kConverged; }
  /// Table entry: the step count, or a status marker for failed runs.
  std::string entry() const {
    switch (status) {
      case RunStatus::kConverged: return std::to_string(steps);
      case RunStatus::kMaxSteps: return ">" + std::to_string(steps);
      case RunStatus::kDiverged: return "div";
    }
    return "?";
  }
};

/// Spectrum of the block SGS smoother at the converged state of a 1D problem.
/// Throws if the state does not converge.
inline SpectralReport steady_spectrum_1d(const ProblemSpec& p, SolverConfig cfg, int n, int max_dim = 4096) {
  auto run = solve_problem<1>(p, cfg, n);
  if (!run.result.history.converged())
    throw Error("steady state for the spectrum did not converge (" + to_string(run.result.history.status) + ")");
  Discretization<1> disc(run.mesh(), p.boundary, cfg.flux, cfg.physics());
  return steady_state_spectrum<1>(disc, run.result.solution, cfg.alpha, cfg.eps_fd, max_dim);
}

// ---------------------------------------------------------------------------
// Convergence tables.

struct MethodVariant {
  std::string label;
  Method method = Method::kNmgm;
  int gamma = 1;
  int levels = 3;
};

struct TableSpec {
  std::string name;
  ProblemSpec problem;
  std::vector<FluxKind> fluxes;
  std::vector<MethodVariant> variants;
};

struct TableOptions {
  std::vector<int> cells{64, 128, 256, 512, 1024};
  int max_baseline_steps = 20000;
  int max_newton_steps = 100;
  /// Spectral radius only for meshes up to this size (dense eigensolve).
  int rho_max_cells = 512;
  int jobs = 1;
  bool baseline = true;

  void validate() const {
    if (cells.empty()) throw ConfigError("mesh size list is empty");
    for (int n : cells)
      if (n < 2) throw ConfigError("mesh sizes must be >= 2");
    if (max_baseline_steps < 1 || max_newton_steps < 1) throw ConfigError("step caps must be positive");
    if (jobs < 1) throw ConfigError("jobs must be >= 1");
  }
};

struct TableRow {
  FluxKind flux = FluxKind::kHll;
  MethodVariant variant;
  std::vector<RunOutcome> cells;
};

struct TableReport {
  std::string name;
  std::string problem;
  std::vector<int> cells;
  std::vector<TableRow> rows;
  /// Per flux, per mesh size; empty where not computed or failed.
  std::vector<std::vector<std::optional<double>>> rho;
  std::vector<FluxKind> fluxes;
};

namespace detail {

inline std::vector<MethodVariant> standard_variants() {
  return {{"BLU-SGS", Method::kBlusgs, 1, 3},
          {"V N_L=1", Method::kNmgm, 1, 1},
          {"V N_L=3", Method::kNmgm, 1, 3},
          {"V N_L=5", Method::kNmgm, 1, 5},
          {"W N_L=5", Method::kNmgm, 2, 5}};
}

}  // namespace detail

/// Table layouts: 1 is the smooth subcritical case, 2 the transcritical
/// cases without and with a shock, 3 the wet/dry lake at rest.
inline std::vector<TableSpec> table_specs(int which) {
  const std::vector<FluxKind> three{FluxKind::kHll, FluxKind::kLlf, FluxKind::kRoe};
  switch (which) {
    case 1: return {{"table1", example1(), three, detail::standard_variants()}};
    case 2:
      return {{"table2_I", example2(false), three, detail::standard_variants()},
              {"table2_II", example2(true), three, detail::standard_variants()}};
    case 3:
      return {{"table3", example3(), {FluxKind::kLlf},
               {{"BLU-SGS", Method::kBlusgs, 1, 3},
                {"V N_L=1", Method::kNmgm, 1, 1},
                {"V N_L=3", Method::kNmgm, 1, 3},
                {"V N_L=5", Method::kNmgm, 1, 5},
                {"W N_L=1", Method::kNmgm, 2, 1},
                {"W N_L=3", Method::kNmgm, 2, 3}}}};
    default: throw ConfigError("table must be 1, 2 or 3");
  }
}

inline RunOutcome run_variant(const ProblemSpec& p, FluxKind flux, const MethodVariant& v, int n,
                              const TableOptions& opt) {
  SolverConfig cfg = default_config(p);
  cfg.flux = flux;
  cfg.cycle.gamma = v.gamma;
  cfg.n_levels = std::min(v.levels, static_cast<int>(std::floor(std::log2(n))) - 1);
  cfg.max_baseline_steps = opt.max_baseline_steps;
  cfg.max_newton_steps = opt.max_newton_steps;
  auto run = solve_problem<1>(p, cfg, n, 0, v.method);
  return RunOutcome::from(run.result.history);
}

inline TableReport run_table(const TableSpec& spec, const TableOptions& opt) {
  opt.validate();
  TableReport rep;
  rep.name = spec.name;
  rep.problem = spec.problem.name;
  rep.cells = opt.cells;
  rep.fluxes = spec.fluxes;
  const int nc = static_cast<int>(opt.cells.size());
  for (FluxKind f : spec.fluxes)
    for (const auto& v : spec.variants) {
      if (v.method == Method::kBlusgs && !opt.baseline) continue;
      rep.rows.push_back({f, v, std::vector<RunOutcome>(nc)});
    }
  rep.rho.assign(spec.fluxes.size(), std::vector<std::optional<double>>(nc));

  const int n_runs = static_cast<int>(rep.rows.size()) * nc;
  const int n_rho = static_cast<int>(spec.fluxes.size()) * nc;
  parallel_for(n_runs + n_rho, opt.jobs, [&](int k) {
    if (k < n_runs) {
      auto& row = rep.rows[k / nc];
      const int n = opt.cells[k % nc];
      try {
        row.cells[k % nc] = run_variant(spec.problem, row.flux, row.variant, n, opt);
      } catch (const Error& e) {
        RunOutcome o;
        o.status = RunStatus::kDiverged;
        o.message = e.what();
        row.cells[k % nc] = o;
      }
      return;
    }
    const int j = k - n_runs;
    const int fi = j / nc;
    const int n = opt.cells[j % nc];
    if (n > opt.rho_max_cells) return;
    SolverConfig cfg = default_config(spec.problem);
    cfg.flux = spec.fluxes[fi];
    try {
      rep.rho[fi][j % nc] = steady_spectrum_1d(spec.problem, cfg, n).rho;
    } catch (const Error&) {
    }
  });
  return rep;
}

inline void write_table_csv(std::ostream& os, const TableReport& rep) {
  os.precision(10);
  os << "table,problem,flux,variant,cells,status,steps,final_residual,seconds\n";
  for (const auto& row : rep.rows)
    for (std::size_t c = 0; c < rep.cells.size(); ++c) {
      const auto& o = row.cells[c];
      os << rep.name << ',' << rep.problem << ',' << to_string(row.flux) << ',' << row.variant.label << ','
         << rep.cells[c] << ',' << to_string(o.status) << ',' << o.steps << ',' << o.final_residual << ','
         << o.seconds << '\n';
    }
  for (std::size_t f = 0; f < rep.fluxes.size(); ++f)
    for (std::size_t c = 0; c < rep.cells.size(); ++c) {
      if (!rep.rho[f][c]) continue;
      const double r = *rep.rho[f][c];
      os << rep.name << ',' << rep.problem << ',' << to_string(rep.fluxes[f]) << ",rho," << rep.cells[c]
         << ",value,0," << r << ",0\n";
      os << rep.name << ',' << rep.problem << ',' << to_string(rep.fluxes[f]) << ",R_inf," << rep.cells[c]
         << ",value,0," << -std::log(r) << ",0\n";
    }
}

/// Aligned text: one block per flux, rows = method variants plus rho and
/// R_inf, columns = mesh sizes.
inline void write_table_text(std::ostream& os, const TableReport& rep) {
  constexpr int w0 = 10, w = 11;
  os << rep.name << " (" << rep.problem << ")\n";
  os << std::left << std::setw(w0) << "flux" << std::setw(w0) << "method";
  for (int n : rep.cells) os << std::right << std::setw(w) << n;
  os << '\n';
  auto num = [](double v, const char* fmt) {
    char buf[32];
    std::snprintf(buf, sizeof buf, fmt, v);
    return std::string(buf);
  };
  for (std::size_t f = 0; f < rep.fluxes.size(); ++f) {
    for (const auto& row : rep.rows) {
      if (row.flux != rep.fluxes[f]) continue;
      os << std::left << std::setw(w0) << to_string(row.flux) << std::setw(w0) << row.variant.label;
      for (const auto& o : row.cells) os << std::right << std::setw(w) << o.entry();
      os << '\n';
    }
    for (int kind = 0; kind < 2; ++kind) {
      os << std::left << std::setw(w0) << to_string(rep.fluxes[f]) << std::setw(w0) << (kind ? "R_inf" : "rho");
      for (const auto& r : rep.rho[f])
        os << std::right << std::setw(w) << (r ? num(kind ? -std::log(*r) : *r, kind ? "%.4e" : "%.5f") : "-");
      os << '\n';
    }
  }
}

// ---------------------------------------------------------------------------
// Froude-number sweep on the cosine constriction.

struct FroudePoint {
  double f_in = 0.0;
  RunOutcome outcome;
  double min_froude = 0.0;
  double max_froude = 0.0;
  int subcritical_cells = 0;
  int supercritical_cells = 0;

  std::string regime() const {
    if (!outcome.converged()) return "-";
    if (supercritical_cells == 0) return "subcritical";
    if (subcritical_cells == 0) return "supercritical";
    return "transcritical";
  }
};

/// Local Froude number |u| / sqrt(g h); zero in dry cells.
template <int Dim>
double froude_number(const State<Dim>& u, double g, double h_eps = kDryDepth) {
  if (u[0] <= h_eps) return 0.0;
  return velocity<Dim>(u, h_eps).norm() / std::sqrt(g * u[0]);
}

/// Uniform grid of `count` points on [lo, hi]; the critical value 1 is dropped.
inline std::vector<double> froude_grid(double lo, double hi, int count) {
  if (count < 1 || !(lo > 0.0) || hi < lo) throw ConfigError("bad Froude grid");
  std::vector<double> out;
  for (int k = 0; k < count; ++k) {
    const double f = count == 1 ? lo : lo + (hi - lo) * k / (count - 1);
    if (std::abs(f - 1.0) > 1e-12) out.push_back(f);
  }
  if (out.empty()) throw ConfigError("Froude grid contains only the critical value");
  return out;
}

/// `configure` may adjust the solver settings derived from each point's problem.
inline std::vector<FroudePoint> froude_sweep(const std::vector<double>& f_in, int nx, int ny, int jobs = 1,
                                             const std::function<void(SolverConfig&)>& configure = {}) {
  std::vector<FroudePoint> pts(f_in.size());
  parallel_for(static_cast<int>(f_in.size()), jobs, [&](int k) {
    auto& pt = pts[k];
    pt.f_in = f_in[k];
    try {
      const ProblemSpec p = example5(f_in[k]);
      SolverConfig cfg = default_config(p);
      if (configure) configure(cfg);
      auto run = solve_problem<2>(p, cfg, nx, ny);
      pt.outcome = RunOutcome::from(run.result.history);
      if (!pt.outcome.converged()) return;
      pt.min_froude = std::numeric_limits<double>::infinity();
      for (const auto& u : run.result.solution) {
        const double fr = froude_number<2>(u, cfg.g, cfg.h_eps);
        pt.min_froude = std::min(pt.min_froude, fr);
        pt.max_froude = std::max(pt.max_froude, fr);
        (fr < 1.0 ? pt.subcritical_cells : pt.supercritical_cells)++;
      }
    } catch (const Error& e) {
      pt.outcome.status = RunStatus::kDiverged;
      pt.outcome.message = e.what();
    }
  });
  return pts;
}

inline void write_froude_csv(std::ostream& os, const std::vector<FroudePoint>& pts) {
  os.precision(10);
  os << "f_in,status,steps,final_residual,min_froude,max_froude,subcritical_cells,supercritical_cells,regime\n";
  for (const auto& p : pts)
    os << p.f_in << ',' << to_string(p.outcome.status) << ',' << p.outcome.steps << ','
       << p.outcome.final_residual << ',' << p.min_froude << ',' << p.max_froude << ',' << p.subcritical_cells
       << ',' << p.supercritical_cells << ',' << p.regime() << '\n';
}

}  // namespace swnmg
