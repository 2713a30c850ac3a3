#pragma once

// Structured finite-volume meshes (1D intervals and 2D boundary-fitted
// quadrilateral channels) and the agglomerated coarse-level hierarchy used by
// the multigrid solver and the initialization cascade.

#include "swnmg/core.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <map>
#include <numbers>
#include <ostream>
#include <utility>
#include <vector>

namespace swnmg {

/// Boundary patches of a structured mesh. 1D meshes only use kWest/kEast.
enum class Patch : int { kWest = 0, kEast = 1, kSouth = 2, kNorth = 3 };

inline constexpr int kNumPatches = 4;

inline const char* to_string(Patch p) {
  switch (p) {
    case Patch::kWest: return "west";
    case Patch::kEast: return "east";
    case Patch::kSouth: return "south";
    case Patch::kNorth: return "north";
  }
  return "?";
}

template <int Dim>
struct Cell {
  int index = 0;
  Point<Dim> centroid = Point<Dim>::Zero();
  double area = 0.0;
  double bed = 0.0;
  std::vector<int> edges;
};

/// Mesh face. Interior edges are stored once with the normal pointing from
/// `left` to `right`; boundary edges have right < 0 and an outward normal.
template <int Dim>
struct Edge {
  int index = 0;
  int left = 0;
  int right = -1;
  Patch patch = Patch::kWest;
  Point<Dim> normal = Point<Dim>::Zero();
  double length = 0.0;
  Point<Dim> midpoint = Point<Dim>::Zero();

  bool is_boundary() const { return right < 0; }

  /// The cell across this edge as seen from `cell`, or -1 on the boundary.
  int other(int cell) const { return cell == left ? right : left; }

  /// Unit normal pointing out of `cell`.
  Point<Dim> outward_normal(int cell) const {
    return cell == left ? normal : Point<Dim>(-normal);
  }
};

template <int Dim>
struct MeshLevel {
  std::vector<Cell<Dim>> cells;
  std::vector<Edge<Dim>> edges;
  int level = 0;
  /// Structured index extents (nx, ny); ny = 1 in 1D.
  std::array<int, 2> shape{0, 1};
  /// For level >= 1: the fine cells agglomerated into each cell.
  std::vector<std::vector<int>> children;
  /// For level >= 1: the coarse cell owning each cell of the finer level.
  std::vector<int> fine_to_coarse;

  int num_cells() const { return static_cast<int>(cells.size()); }

  double total_area() const {
    double a = 0.0;
    for (const auto& c : cells) a += c.area;
    return a;
  }
};

template <int Dim>
struct MeshHierarchy {
  /// levels[0] is the finest mesh.
  std::vector<MeshLevel<Dim>> levels;

  int num_coarse_levels() const { return static_cast<int>(levels.size()) - 1; }
  const MeshLevel<Dim>& finest() const { return levels.front(); }
  const MeshLevel<Dim>& coarsest() const { return levels.back(); }
};

namespace detail {

template <int Dim>
void link_cell_edges(MeshLevel<Dim>& mesh) {
  for (auto& c : mesh.cells) c.edges.clear();
  for (const auto& e : mesh.edges) {
    mesh.cells[e.left].edges.push_back(e.index);
    if (!e.is_boundary()) mesh.cells[e.right].edges.push_back(e.index);
  }
}

}  // namespace detail

/// Uniform 1D mesh of `n_cells` cells on [x_min, x_max]; the bed is sampled
/// at cell centroids.
template <class BedFn>
MeshLevel<1> build_uniform_1d(double x_min, double x_max, int n_cells, BedFn&& bed) {
  if (n_cells < 2) throw ConfigError("1D mesh needs at least 2 cells");
  if (!(x_max > x_min)) throw ConfigError("1D mesh needs x_max > x_min");
  MeshLevel<1> mesh;
  mesh.shape = {n_cells, 1};
  const double dx = (x_max - x_min) / n_cells;
  mesh.cells.resize(n_cells);
  for (int i = 0; i < n_cells; ++i) {
    auto& c = mesh.cells[i];
    c.index = i;
    c.centroid[0] = x_min + (i + 0.5) * dx;
    c.area = dx;
    c.bed = bed(c.centroid[0]);
    if (!std::isfinite(c.bed)) throw ConfigError("bed evaluates to a non-finite value");
  }
  mesh.edges.resize(n_cells + 1);
  for (int k = 0; k <= n_cells; ++k) {
    auto& e = mesh.edges[k];
    e.index = k;
    e.length = 1.0;
    e.midpoint[0] = x_min + k * dx;
    if (k == 0) {
      e.left = 0;
      e.right = -1;
      e.patch = Patch::kWest;
      e.normal[0] = -1.0;
    } else if (k == n_cells) {
      e.left = n_cells - 1;
      e.right = -1;
      e.patch = Patch::kEast;
      e.normal[0] = 1.0;
    } else {
      e.left = k - 1;
      e.right = k;
      e.normal[0] = 1.0;
    }
  }
  // Keep the west edge first for each cell so that cell i sees edges {i, i+1}.
  detail::link_cell_edges(mesh);
  return mesh;
}

/// Channel geometry: the region x0 <= x <= x0 + length between the walls
/// y = -W(x)/2 and y = +W(x)/2.
struct ChannelSpec {
  enum class Kind {
    kRectangle,     ///< constant width
    kConstricting,  ///< straight walls turned inwards by `angle_deg` on [start, end]
    kCosine,        ///< W(x) = 1 - (1 - w_min) cos^2(pi (x - center) / (2 half_span)) near center
  };

  Kind kind = Kind::kRectangle;
  double x0 = 0.0;
  double length = 1.0;
  double width = 1.0;
  double angle_deg = 0.0;
  double start = 0.0;
  double end = 0.0;
  double w_min = 1.0;
  double center = 0.0;
  double half_span = 0.5;

  static ChannelSpec rectangle(double x0, double length, double width) {
    ChannelSpec s;
    s.kind = Kind::kRectangle;
    s.x0 = x0;
    s.length = length;
    s.width = width;
    return s;
  }

  static ChannelSpec constricting(double length, double width, double angle_deg, double start,
                                  double end) {
    ChannelSpec s;
    s.kind = Kind::kConstricting;
    s.length = length;
    s.width = width;
    s.angle_deg = angle_deg;
    s.start = start;
    s.end = end;
    return s;
  }

  static ChannelSpec cosine(double length, double width, double w_min, double center,
                            double half_span) {
    ChannelSpec s;
    s.kind = Kind::kCosine;
    s.length = length;
    s.width = width;
    s.w_min = w_min;
    s.center = center;
    s.half_span = half_span;
    return s;
  }

  double channel_width(double x) const {
    switch (kind) {
      case Kind::kRectangle:
        return width;
      case Kind::kConstricting: {
        const double t = std::tan(angle_deg * std::numbers::pi / 180.0);
        const double xs = std::clamp(x, start, end);
        return width - 2.0 * (xs - start) * t;
      }
      case Kind::kCosine: {
        if (std::abs(x - center) > half_span) return width;
        const double c = std::cos(std::numbers::pi * (x - center) / (2.0 * half_span));
        return width * (1.0 - (1.0 - w_min) * c * c);
      }
    }
    return width;
  }

  bool operator==(const ChannelSpec&) const = default;
};

namespace detail {

inline double polygon_area(const std::array<Point<2>, 4>& p) {
  double a = 0.0;
  for (int k = 0; k < 4; ++k) {
    const auto& q = p[k];
    const auto& r = p[(k + 1) % 4];
    a += q[0] * r[1] - r[0] * q[1];
  }
  return 0.5 * a;
}

inline Point<2> polygon_centroid(const std::array<Point<2>, 4>& p, double area) {
  Point<2> c = Point<2>::Zero();
  for (int k = 0; k < 4; ++k) {
    const auto& q = p[k];
    const auto& r = p[(k + 1) % 4];
    const double w = q[0] * r[1] - r[0] * q[1];
    c += (q + r) * w;
  }
  return c / (6.0 * area);
}

}  // namespace detail

/// Node (i, j) of the structured channel grid, by transfinite interpolation
/// between the four boundary curves of the channel.
inline Point<2> channel_node(const ChannelSpec& geo, int nx, int ny, int i, int j) {
  const double s = static_cast<double>(i) / nx;
  const double t = static_cast<double>(j) / ny;
  const double x_w = geo.x0;
  const double x_e = geo.x0 + geo.length;
  auto south = [&](double ss) {
    const double x = x_w + ss * geo.length;
    return Point<2>(x, -0.5 * geo.channel_width(x));
  };
  auto north = [&](double ss) {
    const double x = x_w + ss * geo.length;
    return Point<2>(x, 0.5 * geo.channel_width(x));
  };
  auto west = [&](double tt) {
    const double hw = 0.5 * geo.channel_width(x_w);
    return Point<2>(x_w, -hw + 2.0 * tt * hw);
  };
  auto east = [&](double tt) {
    const double hw = 0.5 * geo.channel_width(x_e);
    return Point<2>(x_e, -hw + 2.0 * tt * hw);
  };
  const Point<2> c00 = south(0.0), c10 = south(1.0), c01 = north(0.0), c11 = north(1.0);
  return (1.0 - t) * south(s) + t * north(s) + (1.0 - s) * west(t) + s * east(t) -
         ((1.0 - s) * (1.0 - t) * c00 + s * (1.0 - t) * c10 + (1.0 - s) * t * c01 +
          s * t * c11);
}

/// Structured nx x ny boundary-fitted quadrilateral mesh of a channel. Cell
/// (i, j) has index i * ny + j, so sweeps advance cross-section by
/// cross-section along x.
template <class BedFn>
MeshLevel<2> build_channel_2d(const ChannelSpec& geo, int nx, int ny, BedFn&& bed) {
  if (nx < 1 || ny < 1 || nx * ny < 2) throw ConfigError("2D mesh needs at least 2 cells");
  if (!(geo.length > 0.0)) throw ConfigError("channel length must be positive");
  for (int i = 0; i <= 4 * nx; ++i) {
    const double x = geo.x0 + geo.length * i / (4.0 * nx);
    if (!(geo.channel_width(x) > 0.0)) throw ConfigError("channel width must stay positive");
  }

  std::vector<Point<2>> nodes((nx + 1) * (ny + 1));
  auto node = [&](int i, int j) -> Point<2>& { return nodes[i * (ny + 1) + j]; };
  for (int i = 0; i <= nx; ++i)
    for (int j = 0; j <= ny; ++j) node(i, j) = channel_node(geo, nx, ny, i, j);

  MeshLevel<2> mesh;
  mesh.shape = {nx, ny};
  mesh.cells.resize(nx * ny);
  for (int i = 0; i < nx; ++i) {
    for (int j = 0; j < ny; ++j) {
      const std::array<Point<2>, 4> quad{node(i, j), node(i + 1, j), node(i + 1, j + 1),
                                         node(i, j + 1)};
      auto& c = mesh.cells[i * ny + j];
      c.index = i * ny + j;
      c.area = detail::polygon_area(quad);
      if (!(c.area > 0.0)) throw ConfigError("mapped channel cell has non-positive area");
      c.centroid = detail::polygon_centroid(quad, c.area);
      c.bed = bed(c.centroid);
      if (!std::isfinite(c.bed)) throw ConfigError("bed evaluates to a non-finite value");
    }
  }

  auto add_edge = [&](const Point<2>& a, const Point<2>& b, int left, int right, Patch patch,
                      bool flip) {
    Edge<2> e;
    e.index = static_cast<int>(mesh.edges.size());
    const Point<2> t = b - a;
    e.length = t.norm();
    // (t_y, -t_x) is the right-hand normal of segment a -> b.
    e.normal = Point<2>(t[1], -t[0]) / e.length;
    if (flip) e.normal = -e.normal;
    e.midpoint = 0.5 * (a + b);
    e.left = left;
    e.right = right;
    e.patch = patch;
    mesh.edges.push_back(e);
  };

  // x-faces: segment (i, j) -> (i, j+1); right-hand normal points towards +x.
  for (int i = 0; i <= nx; ++i) {
    for (int j = 0; j < ny; ++j) {
      const Point<2>& a = node(i, j);
      const Point<2>& b = node(i, j + 1);
      if (i == 0)
        add_edge(a, b, j, -1, Patch::kWest, true);
      else if (i == nx)
        add_edge(a, b, (nx - 1) * ny + j, -1, Patch::kEast, false);
      else
        add_edge(a, b, (i - 1) * ny + j, i * ny + j, Patch::kWest, false);
    }
  }
  // y-faces: segment (i+1, j) -> (i, j); right-hand normal points towards +y.
  for (int j = 0; j <= ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      const Point<2>& a = node(i + 1, j);
      const Point<2>& b = node(i, j);
      if (j == 0)
        add_edge(a, b, i * ny, -1, Patch::kSouth, true);
      else if (j == ny)
        add_edge(a, b, i * ny + ny - 1, -1, Patch::kNorth, false);
      else
        add_edge(a, b, i * ny + j - 1, i * ny + j, Patch::kWest, false);
    }
  }
  detail::link_cell_edges(mesh);
  return mesh;
}

/// Agglomerates pairs (1D) or 2x2 blocks (2D) of cells into a coarse level.
/// Coarse area and bed are the sum and the area-weighted mean of the
/// children; each coarse interface carries the summed area vector sum |e| n
/// of the fine edges it replaces.
template <int Dim>
MeshLevel<Dim> coarsen(const MeshLevel<Dim>& fine) {
  const int nx = fine.shape[0];
  const int ny = fine.shape[1];
  int cnx = 0, cny = 0;
  if constexpr (Dim == 1) {
    if (nx % 2 != 0) throw ConfigError("cell count not divisible by 2");
    cnx = nx / 2;
    cny = 1;
  } else {
    if (nx % 2 != 0 || ny % 2 != 0) throw ConfigError("cell counts not divisible by 2");
    cnx = nx / 2;
    cny = ny / 2;
  }
  if (cnx * cny < 2) throw ConfigError("coarse level would have a single cell");

  MeshLevel<Dim> coarse;
  coarse.level = fine.level + 1;
  coarse.shape = {cnx, cny};
  coarse.cells.resize(cnx * cny);
  coarse.children.assign(cnx * cny, {});
  coarse.fine_to_coarse.assign(fine.cells.size(), -1);

  for (int i = 0; i < nx; ++i) {
    for (int j = 0; j < ny; ++j) {
      const int f = i * ny + j;
      const int c = (Dim == 1) ? i / 2 : (i / 2) * cny + j / 2;
      coarse.fine_to_coarse[f] = c;
      coarse.children[c].push_back(f);
    }
  }
  for (int c = 0; c < cnx * cny; ++c) {
    auto& cell = coarse.cells[c];
    cell.index = c;
    double a = 0.0;
    Point<Dim> m = Point<Dim>::Zero();
    double zb = 0.0;
    for (int f : coarse.children[c]) {
      const auto& fc = fine.cells[f];
      a += fc.area;
      m += fc.area * fc.centroid;
      zb += fc.area * fc.bed;
    }
    cell.area = a;
    cell.centroid = m / a;
    cell.bed = zb / a;
  }

  struct Accum {
    Point<Dim> area_vector = Point<Dim>::Zero();
    Point<Dim> weighted_mid = Point<Dim>::Zero();
    double length = 0.0;
    Patch patch = Patch::kWest;
  };
  // Key (a, b) with a < b for interior faces, (a, -1 - patch) on the boundary.
  std::map<std::pair<int, int>, Accum> faces;
  for (const auto& e : fine.edges) {
    const int pl = coarse.fine_to_coarse[e.left];
    if (e.is_boundary()) {
      auto& acc = faces[{pl, -1 - static_cast<int>(e.patch)}];
      acc.area_vector += e.length * e.normal;
      acc.weighted_mid += e.length * e.midpoint;
      acc.length += e.length;
      acc.patch = e.patch;
      continue;
    }
    const int pr = coarse.fine_to_coarse[e.right];
    if (pl == pr) continue;
    const bool flip = pl > pr;
    auto& acc = faces[{std::min(pl, pr), std::max(pl, pr)}];
    acc.area_vector += (flip ? -e.length : e.length) * e.normal;
    acc.weighted_mid += e.length * e.midpoint;
    acc.length += e.length;
  }
  for (const auto& [key, acc] : faces) {
    Edge<Dim> e;
    e.index = static_cast<int>(coarse.edges.size());
    e.left = key.first;
    e.right = key.second >= 0 ? key.second : -1;
    e.patch = acc.patch;
    e.length = acc.area_vector.norm();
    e.normal = acc.area_vector / e.length;
    e.midpoint = acc.weighted_mid / acc.length;
    coarse.edges.push_back(e);
  }
  detail::link_cell_edges(coarse);
  return coarse;
}

template <int Dim>
MeshHierarchy<Dim> build_hierarchy(MeshLevel<Dim> finest, int n_coarse_levels) {
  if (n_coarse_levels < 0) throw ConfigError("number of coarse levels must be >= 0");
  MeshHierarchy<Dim> h;
  finest.level = 0;
  h.levels.push_back(std::move(finest));
  for (int l = 0; l < n_coarse_levels; ++l) h.levels.push_back(coarsen(h.levels.back()));
  return h;
}

/// Columnar text: index, centroid coordinates, area, bed elevation.
template <int Dim>
void write_mesh(std::ostream& os, const MeshLevel<Dim>& mesh) {
  os.precision(17);
  os << "# index" << (Dim == 1 ? " x" : " x y") << " area z\n";
  for (const auto& c : mesh.cells) {
    os << c.index;
    for (int d = 0; d < Dim; ++d) os << ' ' << c.centroid[d];
    os << ' ' << c.area << ' ' << c.bed << '\n';
  }
}

}  // namespace swnmg
