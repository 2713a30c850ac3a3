// Command-line front end for the steady shallow water Newton multigrid solver.
//
// Exit status: 0 ok, 1 diverged or not converged (solve), 2 configuration error.

#include "swnmg/swnmg.hpp"

#include "CLI11.hpp"

#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using namespace swnmg;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitDiverged = 1;
constexpr int kExitConfig = 2;

struct Options {
  std::string report = "solve";
  std::string problem = "ex1";
  std::optional<std::string> flux;
  std::optional<std::string> cycle;
  std::optional<int> levels;
  std::optional<int> nmg;
  std::optional<int> cells;
  std::optional<int> cells_x;
  std::optional<int> cells_y;
  std::optional<double> alpha;
  std::optional<double> tau;
  std::optional<double> eps_stop;
  std::optional<double> eps_p;
  std::optional<int> max_steps;
  std::optional<int> max_baseline_steps;
  std::string method = "nmgm";
  std::string out = "out";
  int jobs = 1;

  // sweep axes
  std::vector<int> sweep_cells;
  std::vector<std::string> sweep_flux;
  std::vector<std::string> sweep_cycle;
  std::vector<int> sweep_levels;
  std::vector<double> sweep_fin;

  // tables and spectra
  std::vector<int> ns;
  int rho_max_cells = 512;
  bool no_baseline = false;
  std::vector<std::string> fluxes{"hll", "llf", "roe"};

  // Froude sweep
  double fin_min = 0.1;
  double fin_max = 2.0;
  int fin_count = 20;
};

/// Writes through a temporary file renamed into place.
void write_atomic(const fs::path& path, const std::function<void(std::ostream&)>& body) {
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream os(tmp);
    if (!os) throw ConfigError("cannot write '" + tmp.string() + "'");
    body(os);
    if (!os) throw ConfigError("write failed for '" + tmp.string() + "'");
  }
  fs::rename(tmp, path);
}

fs::path prepare_out(const Options& o) {
  fs::path dir(o.out);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw ConfigError("output directory '" + o.out + "' is not writable");
  return dir;
}

ProblemSpec resolve_problem(const std::string& name) {
  for (const auto& p : catalog())
    if (p.name == name) return p;
  if (fs::is_regular_file(name)) return load_custom(name);
  throw ConfigError("unknown problem '" + name + "' (not a catalog name or a readable file)");
}

int parse_cycle(const std::string& s) {
  if (s == "v" || s == "V") return 1;
  if (s == "w" || s == "W") return 2;
  throw ConfigError("cycle must be v or w");
}

/// Problem defaults overridden by whatever was given on the command line.
SolverConfig make_config(const ProblemSpec& p, const Options& o) {
  SolverConfig c = default_config(p);
  if (o.flux) c.flux = parse_flux_kind(*o.flux);
  if (o.cycle) c.cycle.gamma = parse_cycle(*o.cycle);
  if (o.levels) c.n_levels = *o.levels;
  if (o.nmg) c.n_mg = *o.nmg;
  if (o.alpha) c.alpha = *o.alpha;
  if (o.tau) c.tau = *o.tau;
  if (o.eps_stop) c.eps_stop = *o.eps_stop;
  if (o.eps_p) c.eps_p = *o.eps_p;
  if (o.max_steps) c.max_newton_steps = *o.max_steps;
  if (o.max_baseline_steps) c.max_baseline_steps = *o.max_baseline_steps;
  c.validate();
  if (p.dim == 1 && c.flux == FluxKind::kHllc) throw ConfigError("the HLLC flux is only defined in 2D");
  return c;
}

Method parse_method(const std::string& s) {
  if (s == "nmgm") return Method::kNmgm;
  if (s == "blusgs") return Method::kBlusgs;
  throw ConfigError("method must be nmgm or blusgs");
}

std::pair<int, int> mesh_size(const ProblemSpec& p, const Options& o) {
  if (p.dim == 1) return {o.cells.value_or(p.cells), 0};
  int nx = o.cells_x.value_or(o.cells.value_or(p.cells_x));
  int ny = o.cells_y.value_or(o.cells ? std::max(1, nx * p.cells_y / p.cells_x) : p.cells_y);
  return {nx, ny};
}

std::string cycle_name(int gamma) { return gamma == 2 ? "w" : "v"; }

std::string summary(const ProblemSpec& p, const SolverConfig& c, int nx, int ny, const ConvergenceHistory& h) {
  std::ostringstream os;
  os.precision(6);
  os << "problem=" << p.name << " flux=" << to_string(c.flux) << " cycle=" << cycle_name(c.cycle.gamma)
     << " levels=" << c.n_levels << " cells=" << nx;
  if (p.dim == 2) os << 'x' << ny;
  os << " steps=" << h.steps() << " final_residual=" << h.final_residual() << " status=" << to_string(h.status);
  if (!h.records.empty()) os << " seconds=" << h.records.back().seconds;
  if (!h.message.empty()) os << " reason=\"" << h.message << '"';
  return os.str();
}

template <int Dim>
int solve_dim(const ProblemSpec& p, const Options& o) {
  const SolverConfig cfg = make_config(p, o);
  const auto [nx, ny] = mesh_size(p, o);
  const fs::path dir = prepare_out(o);
  auto run = solve_problem<Dim>(p, cfg, nx, ny, parse_method(o.method));
  const auto& h = run.result.history;
  write_atomic(dir / "convergence.csv", [&](std::ostream& os) { write_history_csv(os, h); });
  if (!run.result.solution.empty())
    write_atomic(dir / "solution.txt",
                 [&](std::ostream& os) { write_solution<Dim>(os, run.mesh(), run.result.solution); });
  std::cout << summary(p, cfg, nx, ny, h) << '\n';
  return h.converged() ? kExitOk : kExitDiverged;
}

int cmd_solve(const Options& o) {
  const ProblemSpec p = resolve_problem(o.problem);
  return p.dim == 1 ? solve_dim<1>(p, o) : solve_dim<2>(p, o);
}

int cmd_sweep(const Options& o) {
  const ProblemSpec base = resolve_problem(o.problem);
  if (!o.sweep_fin.empty() && base.name != "ex5") throw ConfigError("--sweep-fin applies to ex5 only");
  const fs::path dir = prepare_out(o);
  fs::create_directories(dir / "points");

  struct Point {
    ProblemSpec problem;
    SolverConfig cfg;
    int nx = 0, ny = 0;
    std::string fin = "-";
    std::string tag;
    RunOutcome outcome;
  };
  const SolverConfig seed = make_config(base, o);
  const auto [nx0, ny0] = mesh_size(base, o);
  auto or_one = [](auto v, auto fallback) {
    if (v.empty()) v.push_back(fallback);
    return v;
  };
  const auto fluxes = or_one(o.sweep_flux, to_string(seed.flux));
  const auto cycles = or_one(o.sweep_cycle, cycle_name(seed.cycle.gamma));
  const auto levels = or_one(o.sweep_levels, seed.n_levels);
  const auto cells = or_one(o.sweep_cells, nx0);
  const auto fins = or_one(o.sweep_fin, 0.0);

  std::vector<Point> pts;
  for (const auto& f : fluxes)
    for (const auto& cy : cycles)
      for (int nl : levels)
        for (int n : cells)
          for (double fin : fins) {
            Point pt;
            pt.problem = o.sweep_fin.empty() ? base : example5(fin);
            pt.cfg = make_config(pt.problem, o);
            pt.cfg.flux = parse_flux_kind(f);
            pt.cfg.cycle.gamma = parse_cycle(cy);
            pt.cfg.n_levels = nl;
            pt.cfg.validate();
            if (base.dim == 1 && pt.cfg.flux == FluxKind::kHllc) throw ConfigError("HLLC is only defined in 2D");
            if (n < 2) throw ConfigError("sweep mesh sizes must be >= 2");
            pt.nx = n;
            pt.ny = base.dim == 2 ? std::max(1, n * ny0 / nx0) : 0;
            std::ostringstream tag;
            tag << base.name << '_' << f << '_' << cy << nl << '_' << n;
            if (!o.sweep_fin.empty()) {
              tag << "_F" << fin;
              pt.fin = tag.str().substr(tag.str().rfind('F') + 1);
            }
            pt.tag = tag.str();
            pts.push_back(std::move(pt));
          }

  const Method method = parse_method(o.method);
  parallel_for(static_cast<int>(pts.size()), o.jobs, [&](int k) {
    auto& pt = pts[k];
    ConvergenceHistory h;
    try {
      if (pt.problem.dim == 1) h = solve_problem<1>(pt.problem, pt.cfg, pt.nx, 0, method).result.history;
      else h = solve_problem<2>(pt.problem, pt.cfg, pt.nx, pt.ny, method).result.history;
    } catch (const Error& e) {
      h.status = RunStatus::kDiverged;
      h.message = e.what();
    }
    pt.outcome = RunOutcome::from(h);
    write_atomic(dir / "points" / (pt.tag + ".csv"), [&](std::ostream& os) { write_history_csv(os, h); });
  });

  write_atomic(dir / "sweep.csv", [&](std::ostream& os) {
    os.precision(10);
    os << "problem,flux,cycle,levels,cells_x,cells_y,f_in,status,steps,final_residual,seconds\n";
    for (const auto& pt : pts)
      os << base.name << ',' << to_string(pt.cfg.flux) << ',' << cycle_name(pt.cfg.cycle.gamma) << ','
         << pt.cfg.n_levels << ',' << pt.nx << ',' << pt.ny << ',' << pt.fin << ','
         << to_string(pt.outcome.status) << ',' << pt.outcome.steps << ',' << pt.outcome.final_residual << ','
         << pt.outcome.seconds << '\n';
  });
  int failed = 0;
  for (const auto& pt : pts) failed += !pt.outcome.converged();
  std::cout << "sweep points=" << pts.size() << " failed=" << failed << " csv=" << (dir / "sweep.csv").string()
            << '\n';
  return kExitOk;
}

int cmd_spectrum(const Options& o) {
  const ProblemSpec p = resolve_problem(o.problem);
  if (p.dim != 1) throw ConfigError("spectra are computed for 1D problems only");
  const int n_scatter = o.cells.value_or(256);
  std::vector<int> ns = o.ns.empty() ? std::vector<int>{64, 128, 256, 512, 1024} : o.ns;
  for (int n : ns)
    if (n > 1024 || n < 4) throw ConfigError("spectrum mesh sizes must lie in [4, 1024]");
  if (n_scatter > 1024 || n_scatter < 4) throw ConfigError("spectrum mesh size must lie in [4, 1024]");
  const fs::path dir = prepare_out(o);

  struct FluxResult {
    FluxKind flux;
    SpectralReport scatter;
    std::vector<std::optional<double>> rho;
    std::optional<RateFit> fit;
    std::string error;
  };
  std::vector<FluxResult> res;
  for (const auto& f : o.fluxes) res.push_back({parse_flux_kind(f), {}, std::vector<std::optional<double>>(ns.size()), {}, {}});
  const int per = static_cast<int>(ns.size()) + 1;
  parallel_for(static_cast<int>(res.size()) * per, o.jobs, [&](int k) {
    auto& r = res[k / per];
    const int j = k % per;
    Options oo = o;
    oo.flux = to_string(r.flux);
    const SolverConfig cfg = make_config(p, oo);
    try {
      if (j == 0) r.scatter = steady_spectrum_1d(p, cfg, n_scatter);
      else r.rho[j - 1] = steady_spectrum_1d(p, cfg, ns[j - 1]).rho;
    } catch (const Error& e) {
      if (j == 0) r.error = e.what();
    }
  });

  std::ostringstream summary_csv;
  summary_csv.precision(10);
  summary_csv << "flux,cells,rho,r_inf,large_imag_count,rate_c\n";
  for (auto& r : res) {
    const std::string fname = to_string(r.flux);
    std::vector<std::pair<double, double>> samples;
    for (std::size_t i = 0; i < ns.size(); ++i)
      if (r.rho[i]) samples.emplace_back((p.x_max - p.x_min) / ns[i], *r.rho[i]);
    if (samples.size() >= 3) r.fit = fit_rate_law(samples);
    if (r.error.empty()) {
      write_atomic(dir / ("eigenvalues_" + fname + ".txt"), [&](std::ostream& os) { write_eigenvalues(os, r.scatter); });
    }
    if (r.fit)
      write_atomic(dir / ("rate_" + fname + ".csv"), [&](std::ostream& os) { write_rate_fit_csv(os, *r.fit); });
    int large_imag = 0;
    for (const auto& l : r.scatter.eigenvalues) large_imag += std::abs(l.imag()) > 0.3;
    summary_csv << fname << ',' << n_scatter << ',' << r.scatter.rho << ',' << r.scatter.r_inf << ',' << large_imag
                << ',' << (r.fit ? r.fit->c : std::nan("")) << '\n';
    std::cout << "flux=" << fname << " cells=" << n_scatter;
    if (r.error.empty()) std::cout << " rho=" << r.scatter.rho << " large_imag=" << large_imag;
    else std::cout << " error=\"" << r.error << '"';
    if (r.fit) std::cout << " C=" << r.fit->c;
    std::cout << '\n';
  }
  write_atomic(dir / "spectrum.csv", [&](std::ostream& os) { os << summary_csv.str(); });
  return kExitOk;
}

int cmd_table(const Options& o, int which) {
  TableOptions topt;
  if (!o.ns.empty()) topt.cells = o.ns;
  topt.rho_max_cells = o.rho_max_cells;
  topt.jobs = o.jobs;
  topt.baseline = !o.no_baseline;
  if (o.max_baseline_steps) topt.max_baseline_steps = *o.max_baseline_steps;
  if (o.max_steps) topt.max_newton_steps = *o.max_steps;
  topt.validate();
  const fs::path dir = prepare_out(o);
  for (const auto& spec : table_specs(which)) {
    const TableReport rep = run_table(spec, topt);
    write_atomic(dir / (spec.name + ".csv"), [&](std::ostream& os) { write_table_csv(os, rep); });
    write_atomic(dir / (spec.name + ".txt"), [&](std::ostream& os) { write_table_text(os, rep); });
    write_table_text(std::cout, rep);
  }
  return kExitOk;
}

int cmd_froude(const Options& o) {
  const auto grid = froude_grid(o.fin_min, o.fin_max, o.fin_count);
  const int nx = o.cells_x.value_or(o.cells.value_or(96));
  const int ny = o.cells_y.value_or(std::max(1, nx / 3));
  const fs::path dir = prepare_out(o);
  const auto pts = froude_sweep(grid, nx, ny, o.jobs, [&](SolverConfig& c) {
    if (o.flux) c.flux = parse_flux_kind(*o.flux);
    if (o.cycle) c.cycle.gamma = parse_cycle(*o.cycle);
    if (o.levels) c.n_levels = *o.levels;
    if (o.nmg) c.n_mg = *o.nmg;
    if (o.alpha) c.alpha = *o.alpha;
    if (o.tau) c.tau = *o.tau;
    if (o.eps_stop) c.eps_stop = *o.eps_stop;
    if (o.eps_p) c.eps_p = *o.eps_p;
    if (o.max_steps) c.max_newton_steps = *o.max_steps;
  });
  write_atomic(dir / "froude_histogram.csv", [&](std::ostream& os) { write_froude_csv(os, pts); });
  for (const auto& p : pts)
    std::cout << "f_in=" << p.f_in << " steps=" << p.outcome.steps << " status=" << to_string(p.outcome.status)
              << " regime=" << p.regime() << '\n';
  return kExitOk;
}

int cmd_list() {
  for (const auto& p : catalog()) {
    std::cout << p.name << "  " << p.dim << "D  " << p.title << "  (flux " << to_string(p.flux) << ", ";
    if (p.dim == 1) std::cout << p.cells << " cells)\n";
    else std::cout << p.cells_x << 'x' << p.cells_y << " cells)\n";
  }
  return kExitOk;
}

int cmd_dump(const Options& o) {
  const ProblemSpec p = resolve_problem(o.problem);
  const fs::path dir = prepare_out(o);
  write_atomic(dir / (p.name + ".ini"), [&](std::ostream& os) { dump_problem(os, p); });
  std::cout << (dir / (p.name + ".ini")).string() << '\n';
  return kExitOk;
}

int dispatch(const Options& o) {
  if (o.jobs < 1) throw ConfigError("--jobs must be >= 1");
  if (o.report == "solve") return cmd_solve(o);
  if (o.report == "sweep") return cmd_sweep(o);
  if (o.report == "spectrum") return cmd_spectrum(o);
  if (o.report == "table1") return cmd_table(o, 1);
  if (o.report == "table2") return cmd_table(o, 2);
  if (o.report == "table3") return cmd_table(o, 3);
  if (o.report == "froude_histogram") return cmd_froude(o);
  if (o.report == "list") return cmd_list();
  if (o.report == "dump") return cmd_dump(o);
  throw ConfigError("unknown report kind '" + o.report + "'");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Steady shallow water solver with Newton multigrid"};
  Options o;
  app.add_option("report,--report", o.report,
                 "solve | sweep | spectrum | table1 | table2 | table3 | froude_histogram | list | dump")
      ->capture_default_str();
  app.add_option("--problem", o.problem, "catalog name or problem file")->capture_default_str();
  app.add_option("--flux", o.flux, "hll | hllc | llf | roe");
  app.add_option("--cycle", o.cycle, "v | w");
  app.add_option("--levels", o.levels, "number of coarse levels N_L");
  app.add_option("--nmg", o.nmg, "multigrid cycles per Newton step");
  app.add_option("--cells", o.cells, "cells (1D) or cells in x (2D)");
  app.add_option("--cells-x", o.cells_x, "cells in x (2D)");
  app.add_option("--cells-y", o.cells_y, "cells in y (2D)");
  app.add_option("--alpha", o.alpha, "Newton regularization factor");
  app.add_option("--tau", o.tau, "Newton damping in (0, 1]");
  app.add_option("--eps-stop", o.eps_stop, "stopping tolerance on the total residual");
  app.add_option("--eps-p", o.eps_p, "initialization tolerance");
  app.add_option("--max-steps", o.max_steps, "Newton step cap");
  app.add_option("--max-baseline-steps", o.max_baseline_steps, "BLU-SGS step cap");
  app.add_option("--method", o.method, "nmgm | blusgs")->capture_default_str();
  app.add_option("--out", o.out, "output directory")->capture_default_str();
  app.add_option("--jobs", o.jobs, "concurrent runs in sweeps and tables")->capture_default_str();
  app.add_option("--sweep-cells", o.sweep_cells, "sweep axis: mesh sizes")->delimiter(',');
  app.add_option("--sweep-flux", o.sweep_flux, "sweep axis: fluxes")->delimiter(',');
  app.add_option("--sweep-cycle", o.sweep_cycle, "sweep axis: cycles")->delimiter(',');
  app.add_option("--sweep-levels", o.sweep_levels, "sweep axis: coarse level counts")->delimiter(',');
  app.add_option("--sweep-fin", o.sweep_fin, "sweep axis: inflow Froude numbers (ex5)")->delimiter(',');
  app.add_option("--ns", o.ns, "mesh sizes for tables and rate fits")->delimiter(',');
  app.add_option("--rho-max-cells", o.rho_max_cells, "largest mesh with a spectral radius in tables")
      ->capture_default_str();
  app.add_flag("--no-baseline", o.no_baseline, "skip BLU-SGS rows in tables");
  app.add_option("--fluxes", o.fluxes, "fluxes for the spectrum report")->delimiter(',');
  app.add_option("--fin-min", o.fin_min, "smallest inflow Froude number")->capture_default_str();
  app.add_option("--fin-max", o.fin_max, "largest inflow Froude number")->capture_default_str();
  app.add_option("--fin-count", o.fin_count, "number of inflow Froude numbers")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }
  try {
    return dispatch(o);
  } catch (const ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitDiverged;
  }
}
