// Acceptance runner: one PASS/FAIL line per criterion. With --criterion k
// only that criterion runs; the exit status is 0 iff every run criterion passed.

#include "property_checks.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <map>
#include <numbers>
#include <sstream>
#include <string>

using namespace swnmg;

namespace {

struct Verdict {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

SolverConfig config_for(const ProblemSpec& p, FluxKind flux, int gamma, int levels) {
  SolverConfig c = default_config(p);
  c.flux = flux;
  c.cycle.gamma = gamma;
  c.n_levels = levels;
  return c;
}

// Lake at rest stays at rest to roundoff under ten Newton multigrid steps.
Verdict criterion1() {
  const auto p = example3();
  const auto cfg = config_for(p, FluxKind::kLlf, 2, 3);
  const auto h = build_hierarchy(build_problem_mesh<1>(p, 512), cfg.n_levels);
  NmgmSolver<1> s(h, p.boundary, cfg);
  BlockVector<1> u = lake_at_rest_exact<1>(h.finest(), 0.1);
  const double r0 = s.discretization().assemble_residual(u).total;
  double r10 = r0;
  for (int k = 0; k < 10; ++k) r10 = s.newton_mg_step(u).total;
  double surf = 0.0;
  for (const auto& c : h.finest().cells)
    if (u[c.index][0] > 0.0) surf = std::max(surf, std::abs(u[c.index][0] + c.bed - 0.1));
  return {r0 < 1e-12 && r10 < 1e-12 && surf < 1e-13,
          fmt("R0=%.3e R10=%.3e max|h+z-0.1|=%.3e (tol 1e-12, 1e-12, 1e-13)", r0, r10, surf)};
}

double ex1_l1_error(int n) {
  const auto p = example1();
  auto cfg = config_for(p, FluxKind::kHll, 1, 3);
  cfg.n_mg = 2;
  cfg.eps_stop = 1e-12;
  cfg.roundoff_floor = false;
  const auto run = solve_problem<1>(p, cfg, n);
  if (!run.result.history.converged()) throw Error("ex1 at N=" + std::to_string(n) + " did not converge");
  BlockVector<1> exact(n);
  for (const auto& c : run.mesh().cells) {
    const auto [hh, uu] = exact_subcritical_1d(c.bed);
    exact[c.index] = State<1>(hh, hh * uu);
  }
  return error_norms<1>(run.result.solution, exact, run.mesh()).l1[0];
}

// First-order convergence towards the exact subcritical profile.
Verdict criterion2() {
  const double e256 = ex1_l1_error(256), e512 = ex1_l1_error(512);
  const double ratio = e256 / e512;
  return {ratio >= 1.5 && ratio <= 2.5, fmt("L1(256)=%.4e L1(512)=%.4e ratio=%.3f (want [1.5, 2.5])", e256, e512, ratio)};
}

// Mesh-independent Newton step counts.
Verdict criterion3() {
  bool ok = true;
  std::ostringstream os;
  for (const auto& p : {example1(), example2(false)}) {
    const auto base = config_for(p, FluxKind::kHll, 1, 3);
    int lo = 1 << 30, hi = 0;
    os << p.name << ":";
    for (int n : {64, 128, 256, 512, 1024}) {
      const auto run = solve_problem<1>(p, base, n);
      const int st = run.result.history.converged() ? run.result.history.steps() : 1 << 20;
      os << ' ' << run.result.history.steps() << (run.result.history.converged() ? "" : "!");
      lo = std::min(lo, std::max(st, 1));
      hi = std::max(hi, st);
    }
    ok = ok && hi <= 6 && hi <= 2 * lo;
    os << "  ";
  }
  os << "(want steps <= 6, max/min <= 2)";
  return {ok, os.str()};
}

// Smoother spectral radii and their ordering across fluxes.
Verdict criterion4() {
  const auto p = example1();
  const std::map<FluxKind, std::pair<double, double>> want{
      {FluxKind::kHll, {0.39347, 0.05}}, {FluxKind::kLlf, {0.96013, 0.02}}, {FluxKind::kRoe, {0.48516, 0.05}}};
  bool ok = true;
  std::ostringstream os;
  os.precision(5);
  for (int n : {64, 128, 256}) {
    std::map<FluxKind, double> rho;
    for (const auto& [f, _] : want) rho[f] = steady_spectrum_1d(p, config_for(p, f, 1, 3), n).rho;
    os << "N=" << n << " HLL=" << rho[FluxKind::kHll] << " LLF=" << rho[FluxKind::kLlf] << " Roe=" << rho[FluxKind::kRoe]
       << "; ";
    ok = ok && rho[FluxKind::kLlf] > rho[FluxKind::kHll] && rho[FluxKind::kLlf] > rho[FluxKind::kRoe];
    if (n == 64)
      for (const auto& [f, wt] : want) ok = ok && std::abs(rho[f] - wt.first) <= wt.second;
  }
  os << "(N=64 within 0.05/0.02/0.05 of 0.39347/0.96013/0.48516; LLF largest)";
  return {ok, os.str()};
}

double llf_rate(const ProblemSpec& p, double length) {
  std::vector<std::pair<double, double>> s;
  for (int n : {64, 128, 256, 512, 1024})
    s.emplace_back(length / n, steady_spectrum_1d(p, config_for(p, FluxKind::kLlf, 1, 3), n).rho);
  return fit_rate_law(s).c;
}

// Smoother convergence rate law 1 - rho ~ C dx for the LLF flux.
Verdict criterion5() {
  const double c1 = llf_rate(example1(), 20.0), c2 = llf_rate(example2(false), 25.0);
  return {c1 >= 0.046 && c1 <= 0.184 && c2 >= 0.15 && c2 <= 0.6,
          fmt("C(ex1)=%.4f (want [0.046, 0.184]) C(ex2a)=%.4f (want [0.15, 0.6])", c1, c2)};
}

// Speed-up over single-grid sweeps at N=1024 with the LLF flux.
Verdict criterion6() {
  const auto p = example1();
  const auto w = solve_problem<1>(p, config_for(p, FluxKind::kLlf, 2, 5), 1024);
  auto bcfg = config_for(p, FluxKind::kLlf, 1, 5);
  bcfg.max_baseline_steps = 2000;
  const auto b = solve_problem<1>(p, bcfg, 1024, 0, Method::kBlusgs);
  const int ws = w.result.history.steps(), bs = b.result.history.steps();
  const bool ok = w.result.history.converged() && ws <= 16 && bs >= 2000 && bs >= 100 * ws;
  return {ok, fmt("W N_L=5 steps=%d (%s) BLU-SGS steps=%d%s ratio>=%.1f (want <=16, >=2000, >=100)", ws,
                  to_string(w.result.history.status).c_str(), bs, b.result.history.converged() ? "" : "+",
                  double(bs) / std::max(ws, 1))};
}

// Stationary shock position and jump conditions.
Verdict criterion7() {
  const auto p = example2(true);
  const int n = 512;
  const auto run = solve_problem<1>(p, config_for(p, FluxKind::kHll, 1, 3), n);
  TranscriticalOracle o([&](double x) { return p.bed_at(x); }, 10.0, 25.0, 0.18, 0.33, true);
  const auto [h1, h2] = o.jump_depths();
  const double rh = std::abs(o.momentum_function(h1) - o.momentum_function(h2));
  // Numerical shock: first crossing of the mid depth downstream of the crest.
  const double mid = 0.5 * (h1 + h2), dx = 25.0 / n;
  double xs = std::numeric_limits<double>::quiet_NaN();
  const auto& cells = run.mesh().cells;
  for (int i = 0; i + 1 < n; ++i) {
    const double a = run.result.solution[i][0], b = run.result.solution[i + 1][0];
    if (cells[i].centroid[0] > 10.0 && a < mid && b >= mid) {
      xs = cells[i].centroid[0] + dx * (mid - a) / (b - a);
      break;
    }
  }
  const double off = std::abs(xs - o.shock_position());
  return {run.result.history.converged() && off <= 2.0 * dx && rh < 1e-10,
          fmt("x_shock=%.4f oracle=%.4f |diff|/dx=%.2f RH residual=%.2e (want <=2 cells, <1e-10)", xs,
              o.shock_position(), off / dx, rh)};
}

// Oblique-jump plateau depths in the narrowing supercritical channel.
Verdict criterion8() {
  const auto p = example4(false);
  const auto run = solve_problem<2>(p, default_config(p), 144, 80);
  const double theta = 5.0 * std::numbers::pi / 180.0;
  const auto j1 = oblique_jump(2.5, theta);
  const auto j2 = oblique_jump(j1.froude_after, theta);
  const double want1 = j1.depth_ratio, want2 = j1.depth_ratio * j2.depth_ratio;
  const auto& m = run.mesh();
  const auto& u = run.result.solution;
  const double up = mean_depth_near<2>(m, u, Point<2>(30.0, 13.7), 1.5);
  const double dn = mean_depth_near<2>(m, u, Point<2>(30.0, -13.7), 1.5);
  const double second = mean_depth_near<2>(m, u, Point<2>(60.0, 0.0), 1.5);
  const double e1 = std::max(std::abs(up - want1), std::abs(dn - want1)) / want1;
  const double e2 = std::abs(second - want2) / want2;
  return {run.result.history.converged() && e1 <= 0.02 && e2 <= 0.02,
          fmt("status=%s first=%.4f/%.4f oracle=%.4f second=%.4f oracle=%.4f (want within 2%%)",
              to_string(run.result.history.status).c_str(), up, dn, want1, second, want2)};
}

// Wet/dry channel around a hill.
Verdict criterion9() {
  const auto p = example7();
  auto cfg = default_config(p);
  const auto run = solve_problem<2>(p, cfg, 128, 64);
  const auto& u = run.result.solution;
  bool nonneg = true;
  for (const auto& s : u) nonneg = nonneg && s[0] >= 0.0;
  int apex = 0;
  double best = 1e300;
  for (const auto& c : run.mesh().cells) {
    const double d = (c.centroid - Point<2>(10.0, 0.0)).norm();
    if (d < best) best = d, apex = c.index;
  }
  const bool apex_dry = u[apex][0] <= cfg.h_eps;
  std::string others;
  for (auto f : {FluxKind::kHllc, FluxKind::kRoe}) {
    auto c = cfg;
    c.flux = f;
    const auto r = solve_problem<2>(p, c, 128, 64);
    others += fmt(" %s=%s", to_string(f).c_str(), to_string(r.result.history.status).c_str());
  }
  return {run.result.history.converged() && cfg.eps_stop <= 1e-10 && nonneg && apex_dry,
          fmt("LLF status=%s steps=%d residual=%.2e h>=0:%s apex dry:%s; expected failures:%s",
              to_string(run.result.history.status).c_str(), run.result.history.steps(),
              run.result.history.final_residual(), nonneg ? "yes" : "no", apex_dry ? "yes" : "no", others.c_str())};
}

// Flux, Jacobian and multigrid property suites.
Verdict criterion10() {
  double flux = 0.0;
  for (auto f : {FluxKind::kHll, FluxKind::kLlf, FluxKind::kRoe}) {
    const auto e = props::flux_properties<1>(f);
    flux = std::max({flux, e.consistency, e.conservation});
  }
  for (auto f : {FluxKind::kHll, FluxKind::kHllc, FluxKind::kLlf, FluxKind::kRoe}) {
    const auto e = props::flux_properties<2>(f);
    flux = std::max({flux, e.consistency, e.conservation, e.rotation});
  }
  const double jac = std::max(props::llf_frozen_jacobian_error<1>(), props::llf_frozen_jacobian_error<2>());
  const double gal = std::max(props::galerkin_linearity_error<1>(), props::galerkin_linearity_error<2>());
  const double cyc = std::max(props::two_level_cycle_mismatch<1>(), props::two_level_cycle_mismatch<2>());
  const double swp = std::max(props::sweep_vs_matrix_error<1>(), props::sweep_vs_matrix_error<2>());
  return {flux < 1e-13 && jac < 1e-6 && gal == 0.0 && cyc < 1e-12 && swp < 1e-12,
          fmt("flux=%.2e (tol 1e-13) jacobian=%.2e (1e-6) galerkin=%.1e (0) cycle=%.2e (1e-12) sweep=%.2e (1e-12)", flux,
              jac, gal, cyc, swp)};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"acceptance criteria"};
  int only = 0;
  app.add_option("--criterion", only, "run a single criterion (1-10)")->check(CLI::Range(1, 10));
  CLI11_PARSE(app, argc, argv);

  const std::vector<std::function<Verdict()>> all{criterion1, criterion2, criterion3, criterion4, criterion5,
                                                  criterion6, criterion7, criterion8, criterion9, criterion10};
  bool ok = true;
  for (int k = 1; k <= 10; ++k) {
    if (only && k != only) continue;
    Verdict v;
    try {
      v = all[k - 1]();
    } catch (const std::exception& e) {
      v = {false, std::string("error: ") + e.what()};
    }
    std::cout << "criterion " << k << ": " << (v.pass ? "PASS" : "FAIL") << "  " << v.detail << std::endl;
    ok = ok && v.pass;
  }
  return ok ? 0 : 1;
}
