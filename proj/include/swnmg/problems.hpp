#pragma once

// Declarative problem specifications: the built-in catalog, INI-style
// problem files, and helpers that turn a spec into meshes, boundary maps,
// initial data and solver runs.

#include "swnmg/core.hpp"
#include "swnmg/driver.hpp"
#include "swnmg/expression.hpp"
#include "swnmg/mesh.hpp"
#include "swnmg/physics.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <array>
#include <cmath>
#include <fstream>
#include <istream>
#include <numbers>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

namespace swnmg {

struct ProblemSpec {
  std::string name;
  std::string title;
  int dim = 1;

  // 1D interval.
  double x_min = 0.0;
  double x_max = 1.0;
  // 2D channel.
  ChannelSpec channel;

  Expression bed;
  /// Optional 1D bed table (x, z), interpolated linearly; overrides `bed`.
  std::vector<std::pair<double, double>> bed_table;

  /// Boundary data per patch (west, east, south, north).
  BoundaryMap boundary;
  /// Initial depth and momentum; may use x, y and the bed elevation z.
  Expression init_h;
  Expression init_hu;
  Expression init_hv;

  /// Exact-solution tag: none, cubic, transcritical, transcritical_shock,
  /// lake_at_rest, uniform, oblique_jumps.
  std::string reference = "none";

  /// The solution has wet/dry fronts (see SolverConfig::wet_dry).
  bool wet_dry = false;
  double g = kGravity;
  double eps_p = 0.2;
  double eps_stop = 1e-12;
  FluxKind flux = FluxKind::kHll;
  int gamma = 1;
  int levels = 3;
  int n_mg = 2;
  int cells = 512;
  int cells_x = 0;
  int cells_y = 0;

  double bed_at(double x, double y = 0.0) const {
    if (!bed_table.empty()) {
      const auto& t = bed_table;
      if (x <= t.front().first) return t.front().second;
      if (x >= t.back().first) return t.back().second;
      std::size_t k = 1;
      while (t[k].first < x) ++k;
      const double w = (x - t[k - 1].first) / (t[k].first - t[k - 1].first);
      return (1.0 - w) * t[k - 1].second + w * t[k].second;
    }
    return bed({x, y, 0.0, g});
  }

  void validate() const {
    if (name.empty()) throw ConfigError("problem needs a name");
    if (dim != 1 && dim != 2) throw ConfigError("dimension must be 1 or 2");
    if (dim == 1 && !(x_max > x_min)) throw ConfigError("1D problem needs x_max > x_min");
    if (dim == 2) {
      if (!(channel.length > 0.0) || !(channel.width > 0.0)) throw ConfigError("channel needs positive size");
      if (channel.kind == ChannelSpec::Kind::kCosine && !(channel.w_min > 0.0))
        throw ConfigError("cosine channel needs w_min > 0");
    }
    for (std::size_t k = 1; k < bed_table.size(); ++k)
      if (!(bed_table[k].first > bed_table[k - 1].first)) throw ConfigError("bed table x must increase");
    const int n_patches = dim == 1 ? 2 : 4;
    for (int p = 0; p < n_patches; ++p) boundary[p].validate();
    if (dim == 1 && flux == FluxKind::kHllc) throw ConfigError("the HLLC flux is only defined in 2D");
    if (gamma != 1 && gamma != 2) throw ConfigError("cycle must be v or w");
    if (levels < 0 || n_mg < 1) throw ConfigError("need levels >= 0 and nmg >= 1");
    if (!(eps_p > 0.0) || !(eps_stop >= 0.0) || !(g > 0.0)) throw ConfigError("bad tolerance or gravity");
    if (dim == 1 && cells < 2) throw ConfigError("need at least 2 cells");
    if (dim == 2 && (cells_x < 1 || cells_y < 1)) throw ConfigError("need positive cells_x and cells_y");
  }

  bool operator==(const ProblemSpec& o) const {
    auto same = [](double a, double b) { return a == b || (std::isnan(a) && std::isnan(b)); };
    return name == o.name && title == o.title && dim == o.dim && same(x_min, o.x_min) && same(x_max, o.x_max) &&
           (dim == 1 || channel == o.channel) && bed == o.bed && bed_table == o.bed_table &&
           boundary == o.boundary && init_h == o.init_h && init_hu == o.init_hu && init_hv == o.init_hv &&
           reference == o.reference && wet_dry == o.wet_dry && g == o.g && eps_p == o.eps_p && eps_stop == o.eps_stop && flux == o.flux &&
           gamma == o.gamma && levels == o.levels && n_mg == o.n_mg && cells == o.cells && cells_x == o.cells_x &&
           cells_y == o.cells_y;
  }
};

namespace detail {

inline BoundarySpec bc(BoundaryKind kind, std::optional<double> h = std::nullopt,
                       std::optional<double> hu = std::nullopt, double hv = 0.0) {
  BoundarySpec b;
  b.kind = kind;
  b.depth = h;
  if (hu) b.discharge = std::array<double, 2>{*hu, hv};
  return b;
}

inline ProblemSpec base_1d(std::string name, std::string title, double x_min, double x_max) {
  ProblemSpec p;
  p.name = std::move(name);
  p.title = std::move(title);
  p.dim = 1;
  p.x_min = x_min;
  p.x_max = x_max;
  p.cells = 512;
  p.n_mg = 2;
  return p;
}

inline ProblemSpec base_2d(std::string name, std::string title, ChannelSpec ch, int nx, int ny) {
  ProblemSpec p;
  p.name = std::move(name);
  p.title = std::move(title);
  p.dim = 2;
  p.x_min = ch.x0;
  p.x_max = ch.x0 + ch.length;
  p.channel = ch;
  p.flux = FluxKind::kHllc;
  p.n_mg = 3;
  p.cells_x = nx;
  p.cells_y = ny;
  p.eps_stop = 1e-10;
  p.boundary[2] = bc(BoundaryKind::kSlipWall);
  p.boundary[3] = bc(BoundaryKind::kSlipWall);
  return p;
}

inline const char* kBump1d = "if(abs(x - 10) < 2, 0.2 - 0.05*(x - 10)^2, 0)";

}  // namespace detail

inline ProblemSpec example1() {
  using namespace detail;
  auto p = base_1d("ex1", "smooth subcritical flow", -10.0, 10.0);
  p.bed = Expression::parse("0.2*exp(-(x + 1)^2/2) + 0.3*exp(-(x - 1.5)^2)");
  p.boundary[0] = bc(BoundaryKind::kAutoOpen, 1.0, 1.0);
  p.boundary[1] = bc(BoundaryKind::kAutoOpen, 1.0, 1.0);
  p.init_h = Expression::parse("1");
  p.init_hu = Expression::parse("1");
  p.reference = "cubic";
  return p;
}

/// Transcritical flow over a bump: without a shock (q = 1.53, h = 0.66) or
/// with a stationary shock (q = 0.18, h = 0.33).
inline ProblemSpec example2(bool with_shock) {
  using namespace detail;
  const double q = with_shock ? 0.18 : 1.53;
  const double hd = with_shock ? 0.33 : 0.66;
  auto p = base_1d(with_shock ? "ex2b" : "ex2a",
                   with_shock ? "transcritical flow with a shock" : "transcritical flow without a shock", 0.0, 25.0);
  p.bed = Expression::parse(kBump1d);
  p.boundary[0] = bc(BoundaryKind::kAutoOpen, std::nullopt, q);
  p.boundary[1] = bc(BoundaryKind::kAutoOpen, hd);
  p.init_h = Expression::parse("max(" + Expression::format_number(hd) + " - z, 0.01)");
  p.init_hu = Expression::constant(q);
  p.reference = with_shock ? "transcritical_shock" : "transcritical";
  return p;
}

inline ProblemSpec example3() {
  using namespace detail;
  auto p = base_1d("ex3", "wet-dry lake at rest", 0.0, 20.0);
  p.bed = Expression::parse(kBump1d);
  p.boundary[0] = bc(BoundaryKind::kAutoOpen, 0.1);
  p.boundary[1] = bc(BoundaryKind::kAutoOpen, 0.1);
  p.init_h = Expression::parse("max(0.22 - z, 0)");
  p.init_hu = Expression::parse("0");
  p.reference = "lake_at_rest";
  p.wet_dry = true;
  p.flux = FluxKind::kLlf;
  p.gamma = 2;
  return p;
}

/// Supercritical flow (Froude 2.5) into a channel narrowed from both sides.
/// Channel I: 5 degrees from x = 10 to the outlet. Channel II: 15 degrees
/// from x = 10 to x = 30, straight afterwards.
inline ProblemSpec example4(bool channel_two) {
  using namespace detail;
  const ChannelSpec ch = channel_two ? ChannelSpec::constricting(90.0, 40.0, 15.0, 10.0, 30.0)
                                     : ChannelSpec::constricting(90.0, 40.0, 5.0, 10.0, 90.0);
  auto p = base_2d(channel_two ? "ex4b" : "ex4a",
                   channel_two ? "supercritical channel II" : "supercritical channel I", ch, 144, 80);
  const double u_in = 2.5 * std::sqrt(kGravity);
  p.bed = Expression::parse("0");
  p.boundary[0] = bc(BoundaryKind::kSupercriticalInflow, 1.0, u_in);
  p.boundary[1] = bc(BoundaryKind::kSupercriticalOutflow);
  p.init_h = Expression::parse("1");
  p.init_hu = Expression::parse("2.5*sqrt(g)");
  p.init_hv = Expression::parse("0");
  p.eps_p = 2e2;
  p.eps_stop = 1e-8;
  p.reference = channel_two ? "none" : "oblique_jumps";
  return p;
}

/// Flow through a cosine constriction with inflow Froude number f_in.
inline ProblemSpec example5(double f_in = 0.5, double h0 = 1.0, double w_min = 0.9) {
  using namespace detail;
  if (!(f_in > 0.0) || f_in == 1.0) throw ConfigError("inflow Froude number must be positive and not 1");
  auto p = base_2d("ex5", "cosine constriction", ChannelSpec::cosine(3.0, 1.0, w_min, 1.5, 0.5), 96, 32);
  const double q = h0 * f_in * std::sqrt(kGravity * h0);
  p.bed = Expression::parse("0");
  if (f_in < 1.0) {
    p.boundary[0] = bc(BoundaryKind::kSubcriticalInflow, std::nullopt, q);
    p.boundary[1] = bc(BoundaryKind::kAutoOpen, h0);
  } else {
    p.boundary[0] = bc(BoundaryKind::kSupercriticalInflow, h0, q);
    p.boundary[1] = bc(BoundaryKind::kSupercriticalOutflow);
  }
  p.init_h = Expression::constant(h0);
  p.init_hu = Expression::constant(q);
  p.init_hv = Expression::parse("0");
  return p;
}

inline ProblemSpec example6() {
  using namespace detail;
  auto p = base_2d("ex6", "transcritical flow over a 2D bump", ChannelSpec::rectangle(0.0, 25.0, 10.0), 160, 80);
  p.bed = Expression::parse("if((x - 10)^2 + y^2 < 4, 0.2 - 0.05*((x - 10)^2 + y^2), 0)");
  p.boundary[0] = bc(BoundaryKind::kAutoOpen, std::nullopt, 1.53);
  p.boundary[1] = bc(BoundaryKind::kAutoOpen, 0.52);
  p.boundary[2] = bc(BoundaryKind::kReflectiveWall);
  p.boundary[3] = bc(BoundaryKind::kReflectiveWall);
  p.init_h = Expression::parse("max(0.52 - z, 0.01)");
  p.init_hu = Expression::parse("1.53");
  p.init_hv = Expression::parse("0");
  p.eps_p = 2.0;
  return p;
}

inline ProblemSpec example7() {
  using namespace detail;
  auto p = base_2d("ex7", "channel flow around a hill", ChannelSpec::rectangle(0.0, 25.0, 10.0), 128, 64);
  p.bed = Expression::parse("if((x - 10)^2 + y^2 < 4, 1.2 - 0.3*((x - 10)^2 + y^2), 0)");
  p.boundary[0] = bc(BoundaryKind::kAutoOpen, std::nullopt, 0.1);
  p.boundary[1] = bc(BoundaryKind::kAutoOpen, 0.2);
  p.boundary[2] = bc(BoundaryKind::kReflectiveWall);
  p.boundary[3] = bc(BoundaryKind::kReflectiveWall);
  p.init_h = Expression::parse("max(0.2 - z, 0)");
  p.init_hu = Expression::parse("0");
  p.init_hv = Expression::parse("0");
  p.flux = FluxKind::kLlf;
  p.wet_dry = true;
  return p;
}

/// Uniform flow over a flat bed; the initial data is the exact discrete solution.
inline ProblemSpec uniform_flow() {
  using namespace detail;
  auto p = base_1d("uniform", "uniform flow over a flat bed", 0.0, 10.0);
  p.bed = Expression::parse("0");
  p.boundary[0] = bc(BoundaryKind::kAutoOpen, 1.0, 0.5);
  p.boundary[1] = bc(BoundaryKind::kAutoOpen, 1.0, 0.5);
  p.init_h = Expression::parse("1");
  p.init_hu = Expression::parse("0.5");
  p.cells = 64;
  p.reference = "uniform";
  return p;
}

inline std::vector<ProblemSpec> catalog() {
  return {example1(),      example2(false), example2(true), example3(),  example4(false),
          example4(true),  example5(),      example6(),     example7(),  uniform_flow()};
}

inline ProblemSpec find_problem(const std::string& name) {
  for (auto& p : catalog())
    if (p.name == name) return p;
  throw ConfigError("unknown problem '" + name + "'");
}

// ---------------------------------------------------------------------------
// Problem files.

namespace detail {

inline const char* kPatchSections[kNumPatches] = {"boundary_west", "boundary_east", "boundary_south",
                                                   "boundary_north"};

inline std::string kind_name(ChannelSpec::Kind k) {
  switch (k) {
    case ChannelSpec::Kind::kRectangle: return "rectangle";
    case ChannelSpec::Kind::kConstricting: return "constricting";
    case ChannelSpec::Kind::kCosine: return "cosine";
  }
  return "?";
}

inline ChannelSpec::Kind parse_kind(const std::string& s) {
  if (s == "rectangle") return ChannelSpec::Kind::kRectangle;
  if (s == "constricting") return ChannelSpec::Kind::kConstricting;
  if (s == "cosine") return ChannelSpec::Kind::kCosine;
  throw ConfigError("unknown channel kind '" + s + "'");
}

inline std::string num(double v) { return Expression::format_number(v); }

}  // namespace detail

/// Writes a problem file that load_problem reads back into an equal spec.
inline void dump_problem(std::ostream& os, const ProblemSpec& p) {
  using detail::num;
  os << "[problem]\n";
  os << "name = " << p.name << "\n";
  os << "title = " << p.title << "\n";
  os << "dimension = " << p.dim << "\n";
  os << "reference = " << p.reference << "\n";
  os << "wet_dry = " << (p.wet_dry ? "true" : "false") << "\n";
  os << "g = " << num(p.g) << "\n";
  os << "eps_p = " << num(p.eps_p) << "\n";
  os << "eps_stop = " << num(p.eps_stop) << "\n";
  os << "flux = " << to_string(p.flux) << "\n";
  os << "cycle = " << (p.gamma == 2 ? "w" : "v") << "\n";
  os << "levels = " << p.levels << "\n";
  os << "nmg = " << p.n_mg << "\n";
  os << "cells = " << p.cells << "\n";
  os << "cells_x = " << p.cells_x << "\n";
  os << "cells_y = " << p.cells_y << "\n\n";
  os << "[geometry]\n";
  if (p.dim == 1) {
    os << "x_min = " << num(p.x_min) << "\nx_max = " << num(p.x_max) << "\n";
  } else {
    const auto& c = p.channel;
    os << "kind = " << detail::kind_name(c.kind) << "\n";
    os << "x0 = " << num(c.x0) << "\nlength = " << num(c.length) << "\nwidth = " << num(c.width) << "\n";
    os << "angle = " << num(c.angle_deg) << "\nstart = " << num(c.start) << "\nend = " << num(c.end) << "\n";
    os << "w_min = " << num(c.w_min) << "\ncenter = " << num(c.center) << "\nhalf_span = " << num(c.half_span)
       << "\n";
  }
  os << "\n[bed]\n";
  os << "z = " << p.bed.source() << "\n";
  if (!p.bed_table.empty()) {
    os << "table =";
    for (std::size_t k = 0; k < p.bed_table.size(); ++k)
      os << (k ? "; " : " ") << num(p.bed_table[k].first) << ' ' << num(p.bed_table[k].second);
    os << "\n";
  }
  os << "\n[initial]\n";
  os << "h = " << p.init_h.source() << "\nhu = " << p.init_hu.source() << "\n";
  if (p.dim == 2) os << "hv = " << p.init_hv.source() << "\n";
  const int n_patches = p.dim == 1 ? 2 : 4;
  for (int k = 0; k < n_patches; ++k) {
    const auto& b = p.boundary[k];
    os << "\n[" << detail::kPatchSections[k] << "]\n";
    os << "kind = " << to_string(b.kind) << "\n";
    if (b.depth) os << "h = " << num(*b.depth) << "\n";
    if (b.discharge) {
      os << "hu = " << num((*b.discharge)[0]) << "\n";
      if (p.dim == 2) os << "hv = " << num((*b.discharge)[1]) << "\n";
    }
  }
}

inline ProblemSpec parse_problem(std::istream& is) {
  namespace pt = boost::property_tree;
  pt::ptree tree;
  try {
    pt::read_ini(is, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(std::string("problem file: ") + e.what());
  }
  auto get_str = [&](const std::string& key) -> std::string {
    auto v = tree.get_optional<std::string>(pt::ptree::path_type(key, '/'));
    if (!v) throw ConfigError("problem file: missing key " + key);
    return *v;
  };
  auto opt_str = [&](const std::string& key) {
    return tree.get_optional<std::string>(pt::ptree::path_type(key, '/'));
  };
  auto to_double = [](const std::string& key, const std::string& s) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(s, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || s.find_first_not_of(" \t", used) != std::string::npos)
      throw ConfigError("problem file: key " + key + " is not a number: '" + s + "'");
    return v;
  };
  auto get_num = [&](const std::string& key, std::optional<double> def = std::nullopt) {
    auto s = opt_str(key);
    if (!s) {
      if (def) return *def;
      throw ConfigError("problem file: missing key " + key);
    }
    return to_double(key, *s);
  };
  auto get_int = [&](const std::string& key, int def) {
    const double v = get_num(key, static_cast<double>(def));
    if (v != std::floor(v)) throw ConfigError("problem file: key " + key + " must be an integer");
    return static_cast<int>(v);
  };

  ProblemSpec p;
  p.name = get_str("problem/name");
  p.title = opt_str("problem/title").value_or("");
  p.dim = get_int("problem/dimension", 1);
  p.reference = opt_str("problem/reference").value_or("none");
  {
    const std::string wd = opt_str("problem/wet_dry").value_or("false");
    if (wd != "true" && wd != "false") throw ConfigError("problem file: wet_dry must be true or false");
    p.wet_dry = wd == "true";
  }
  p.g = get_num("problem/g", kGravity);
  p.eps_p = get_num("problem/eps_p", 0.2);
  p.eps_stop = get_num("problem/eps_stop", 1e-12);
  p.flux = parse_flux_kind(opt_str("problem/flux").value_or(p.dim == 2 ? "hllc" : "hll"));
  const std::string cycle = opt_str("problem/cycle").value_or("v");
  if (cycle != "v" && cycle != "w") throw ConfigError("problem file: cycle must be v or w");
  p.gamma = cycle == "w" ? 2 : 1;
  p.levels = get_int("problem/levels", 3);
  p.n_mg = get_int("problem/nmg", p.dim == 2 ? 3 : 2);
  p.cells = get_int("problem/cells", 512);
  p.cells_x = get_int("problem/cells_x", 0);
  p.cells_y = get_int("problem/cells_y", 0);

  if (p.dim == 1) {
    p.x_min = get_num("geometry/x_min");
    p.x_max = get_num("geometry/x_max");
  } else {
    auto& c = p.channel;
    c.kind = detail::parse_kind(opt_str("geometry/kind").value_or("rectangle"));
    c.x0 = get_num("geometry/x0", 0.0);
    c.length = get_num("geometry/length");
    c.width = get_num("geometry/width");
    c.angle_deg = get_num("geometry/angle", 0.0);
    c.start = get_num("geometry/start", 0.0);
    c.end = get_num("geometry/end", 0.0);
    c.w_min = get_num("geometry/w_min", 1.0);
    c.center = get_num("geometry/center", 0.0);
    c.half_span = get_num("geometry/half_span", 0.5);
    p.x_min = c.x0;
    p.x_max = c.x0 + c.length;
  }

  p.bed = Expression::parse(opt_str("bed/z").value_or("0"));
  if (auto table = opt_str("bed/table")) {
    std::stringstream ss(*table);
    std::string item;
    while (std::getline(ss, item, ';')) {
      std::istringstream row(item);
      double x = 0.0, z = 0.0;
      if (!(row >> x >> z)) throw ConfigError("problem file: bad bed table entry '" + item + "'");
      p.bed_table.emplace_back(x, z);
    }
  }
  p.init_h = Expression::parse(get_str("initial/h"));
  p.init_hu = Expression::parse(opt_str("initial/hu").value_or("0"));
  p.init_hv = Expression::parse(opt_str("initial/hv").value_or("0"));

  const int n_patches = p.dim == 1 ? 2 : 4;
  for (int k = 0; k < n_patches; ++k) {
    const std::string sec = detail::kPatchSections[k];
    auto kind = opt_str(sec + "/kind");
    if (!kind) throw ConfigError("problem file: missing section [" + sec + "]");
    BoundarySpec b;
    b.kind = parse_boundary_kind(*kind);
    if (opt_str(sec + "/h")) b.depth = get_num(sec + "/h");
    if (opt_str(sec + "/hu") || opt_str(sec + "/hv"))
      b.discharge = std::array<double, 2>{get_num(sec + "/hu", 0.0), get_num(sec + "/hv", 0.0)};
    p.boundary[k] = b;
  }
  for (int k = n_patches; k < kNumPatches; ++k) p.boundary[k] = BoundarySpec{};
  p.validate();
  return p;
}

inline ProblemSpec load_custom(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open problem file '" + path + "'");
  return parse_problem(in);
}

// ---------------------------------------------------------------------------
// Building runs.

/// Finest mesh of a problem. For 1D only nx is used.
template <int Dim>
MeshLevel<Dim> build_problem_mesh(const ProblemSpec& p, int nx, int ny = 0) {
  if (p.dim != Dim) throw ConfigError("problem dimension mismatch");
  if constexpr (Dim == 1) {
    return build_uniform_1d(p.x_min, p.x_max, nx, [&](double x) { return p.bed_at(x); });
  } else {
    return build_channel_2d(p.channel, nx, ny, [&](const Point<2>& c) { return p.bed_at(c[0], c[1]); });
  }
}

template <int Dim>
InitialData<Dim> problem_initial_data(const ProblemSpec& p) {
  return [p](const Point<Dim>& c, double z) {
    ExprVars v{c[0], Dim == 2 ? c[Dim - 1] : 0.0, z, p.g};
    State<Dim> u;
    u[0] = p.init_h(v);
    u[1] = p.init_hu(v);
    if constexpr (Dim == 2) u[2] = p.init_hv(v);
    return u;
  };
}

/// Solver settings implied by a problem's defaults.
inline SolverConfig default_config(const ProblemSpec& p) {
  SolverConfig c;
  c.flux = p.flux;
  c.cycle.gamma = p.gamma;
  c.n_levels = p.levels;
  c.n_mg = p.n_mg;
  c.eps_p = p.eps_p;
  c.eps_stop = p.eps_stop;
  c.g = p.g;
  c.wet_dry = p.wet_dry;
  return c;
}

/// A solved problem together with the mesh hierarchy it lives on.
template <int Dim>
struct ProblemRun {
  MeshHierarchy<Dim> hierarchy;
  RunResult<Dim> result;

  const MeshLevel<Dim>& mesh() const { return hierarchy.finest(); }
};

enum class Method { kNmgm, kBlusgs };

template <int Dim>
ProblemRun<Dim> solve_problem(const ProblemSpec& p, const SolverConfig& cfg, int nx, int ny = 0,
                              Method method = Method::kNmgm) {
  p.validate();
  ProblemRun<Dim> run;
  run.hierarchy = build_hierarchy(build_problem_mesh<Dim>(p, nx, ny), cfg.n_levels);
  const auto init = problem_initial_data<Dim>(p);
  run.result = method == Method::kNmgm ? run_nmgm<Dim>(run.hierarchy, p.boundary, init, cfg)
                                       : run_blusgs_baseline<Dim>(run.hierarchy, p.boundary, init, cfg);
  return run;
}

}  // namespace swnmg
