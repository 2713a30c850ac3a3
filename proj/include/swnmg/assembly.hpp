#pragma once

// Nonlinear residual, finite-difference flux Jacobians and the regularized
// block-sparse Newton system on one mesh level.

#include "swnmg/core.hpp"
#include "swnmg/mesh.hpp"
#include "swnmg/physics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <ostream>
#include <utility>
#include <vector>

namespace swnmg {

/// Boundary condition per mesh patch (west, east, south, north).
using BoundaryMap = std::array<BoundarySpec, kNumPatches>;

template <int Dim>
struct ResidualVector {
  BlockVector<Dim> cells;
  std::vector<double> l1;
  double total = 0.0;
  /// Sum of |e| (||F||_1 + g h^2 / 2) over every cell side. The pressure term
  /// cancels inside F but sets its rounding error; this fixes the roundoff
  /// level of `total`.
  double flux_scale = 0.0;

  static ResidualVector from_cells(BlockVector<Dim> r) {
    ResidualVector out;
    out.cells = std::move(r);
    out.l1.resize(out.cells.size());
    for (std::size_t i = 0; i < out.cells.size(); ++i) {
      out.l1[i] = out.cells[i].template lpNorm<1>();
      out.total += out.l1[i];
    }
    return out;
  }
};

/// Block compressed-row matrix of dense (Dim+1) x (Dim+1) blocks. Column
/// indices are sorted within each row and every row stores its diagonal.
template <int Dim>
struct BlockSparseMatrix {
  using BlockType = Block<Dim>;
  static constexpr int kBlockSize = Dim + 1;

  std::vector<int> row_ptr{0};
  std::vector<int> cols;
  std::vector<BlockType> blocks;
  std::vector<int> diag;

  /// Zero matrix with the given per-row column sets (the diagonal is added).
  static BlockSparseMatrix from_pattern(std::vector<std::vector<int>> pattern) {
    BlockSparseMatrix a;
    const int n = static_cast<int>(pattern.size());
    a.diag.resize(n);
    for (int i = 0; i < n; ++i) {
      auto& row = pattern[i];
      row.push_back(i);
      std::sort(row.begin(), row.end());
      row.erase(std::unique(row.begin(), row.end()), row.end());
      for (int j : row) {
        if (j < 0 || j >= n) throw ConfigError("block column index out of range");
        if (j == i) a.diag[i] = static_cast<int>(a.cols.size());
        a.cols.push_back(j);
      }
      a.row_ptr.push_back(static_cast<int>(a.cols.size()));
    }
    a.blocks.assign(a.cols.size(), BlockType::Zero());
    return a;
  }

  int rows() const { return static_cast<int>(row_ptr.size()) - 1; }
  int nnz_blocks() const { return static_cast<int>(cols.size()); }

  /// Storage position of block (i, j), or -1 when it is not in the pattern.
  int find(int i, int j) const {
    const auto b = cols.begin() + row_ptr[i];
    const auto e = cols.begin() + row_ptr[i + 1];
    const auto it = std::lower_bound(b, e, j);
    return (it != e && *it == j) ? static_cast<int>(it - cols.begin()) : -1;
  }

  BlockType& diagonal(int i) { return blocks[diag[i]]; }
  const BlockType& diagonal(int i) const { return blocks[diag[i]]; }

  BlockType block(int i, int j) const {
    const int k = find(i, j);
    return k < 0 ? BlockType::Zero() : blocks[k];
  }

  Eigen::MatrixXd to_dense() const {
    const int n = rows();
    Eigen::MatrixXd d = Eigen::MatrixXd::Zero(n * kBlockSize, n * kBlockSize);
    for (int i = 0; i < n; ++i)
      for (int k = row_ptr[i]; k < row_ptr[i + 1]; ++k)
        d.block<kBlockSize, kBlockSize>(i * kBlockSize, cols[k] * kBlockSize) = blocks[k];
    return d;
  }
};

/// y = A x
template <int Dim>
BlockVector<Dim> matvec(const BlockSparseMatrix<Dim>& a, const BlockVector<Dim>& x) {
  if (static_cast<int>(x.size()) != a.rows()) throw ConfigError("matvec: dimension mismatch");
  BlockVector<Dim> y(x.size(), State<Dim>::Zero());
  for (int i = 0; i < a.rows(); ++i) {
    State<Dim> acc = State<Dim>::Zero();
    for (int k = a.row_ptr[i]; k < a.row_ptr[i + 1]; ++k) acc.noalias() += a.blocks[k] * x[a.cols[k]];
    y[i] = acc;
  }
  return y;
}

/// Coordinate text dump: "row col" followed by the block entries, row-major.
template <int Dim>
void write_matrix(std::ostream& os, const BlockSparseMatrix<Dim>& a) {
  os.precision(17);
  os << "# block_rows " << a.rows() << " block_size " << Dim + 1 << '\n';
  for (int i = 0; i < a.rows(); ++i) {
    for (int k = a.row_ptr[i]; k < a.row_ptr[i + 1]; ++k) {
      os << i << ' ' << a.cols[k];
      for (int r = 0; r <= Dim; ++r)
        for (int c = 0; c <= Dim; ++c) os << ' ' << a.blocks[k](r, c);
      os << '\n';
    }
  }
}

/// Newton system of one step: A dU = -R, with dry rows frozen.
template <int Dim>
struct RegularizedSystem {
  BlockSparseMatrix<Dim> matrix;
  /// Right-hand side residual R (dry rows zeroed).
  BlockVector<Dim> rhs_residual;
  /// Residual of the current iterate.
  ResidualVector<Dim> residual;
};

/// Finite-volume discretization of the steady shallow water equations on one
/// mesh level.
template <int Dim>
class Discretization {
 public:
  Discretization(const MeshLevel<Dim>& mesh, BoundaryMap boundary, FluxKind flux,
                 PhysicsParams phys = {})
      : mesh_(&mesh), boundary_(std::move(boundary)), flux_(flux), phys_(phys) {
    if constexpr (Dim == 1) {
      if (flux_ == FluxKind::kHllc) throw ConfigError("the HLLC flux is only defined in 2D");
    }
  }

  const MeshLevel<Dim>& mesh() const { return *mesh_; }
  const BoundaryMap& boundary() const { return boundary_; }
  FluxKind flux() const { return flux_; }
  const PhysicsParams& physics() const { return phys_; }

  /// Edge-length weighted interface flux of `cell` across `e`. `u_other` is
  /// ignored on boundary edges, where the ghost state is built from `u_self`.
  State<Dim> side_flux(int cell, const Edge<Dim>& e, const State<Dim>& u_self,
                       const State<Dim>& u_other) const {
    const Point<Dim> n = e.outward_normal(cell);
    const double z = mesh_->cells[cell].bed;
    if (e.is_boundary()) {
      const State<Dim> ug = ghost_state<Dim>(u_self, boundary_[static_cast<int>(e.patch)], n, phys_);
      return e.length * total_interface_flux<Dim>(u_self, ug, z, z, n, flux_, phys_);
    }
    const double zo = mesh_->cells[e.other(cell)].bed;
    return e.length * total_interface_flux<Dim>(u_self, u_other, z, zo, n, flux_, phys_);
  }

  State<Dim> side_flux(int cell, const Edge<Dim>& e, const BlockVector<Dim>& sol) const {
    const int o = e.other(cell);
    return side_flux(cell, e, sol[cell], o >= 0 ? sol[o] : sol[cell]);
  }

  State<Dim> cell_residual(int cell, const BlockVector<Dim>& sol, double* scale = nullptr) const {
    State<Dim> r = State<Dim>::Zero();
    const double pressure = 0.5 * phys_.g * sol[cell][0] * sol[cell][0];
    for (int ei : mesh_->cells[cell].edges) {
      const State<Dim> f = side_flux(cell, mesh_->edges[ei], sol);
      if (scale) *scale += f.template lpNorm<1>() + mesh_->edges[ei].length * pressure;
      r += f;
    }
    return r;
  }

  ResidualVector<Dim> assemble_residual(const BlockVector<Dim>& sol) const {
    check_size(sol);
    BlockVector<Dim> r(sol.size());
    double scale = 0.0;
    for (int i = 0; i < mesh_->num_cells(); ++i) r[i] = cell_residual(i, sol, &scale);
    auto out = ResidualVector<Dim>::from_cells(std::move(r));
    out.flux_scale = scale;
    return out;
  }

  /// |e| dF/dU of `cell`'s interface flux across `e`, with respect to the
  /// cell's own average or (wrt_neighbor) the neighbour's. Forward
  /// differences with step eps; central differences with step 1e-6 when the
  /// forward quotient is non-finite or exceeds 1e8 in magnitude.
  Block<Dim> jacobian_block_fd(int cell, const Edge<Dim>& e, const BlockVector<Dim>& sol,
                               bool wrt_neighbor, double eps) const {
    if (!(eps > 0.0)) throw ConfigError("finite-difference step must be positive");
    if (wrt_neighbor && e.is_boundary())
      throw ConfigError("boundary edges have no neighbour unknown");
    const int o = e.other(cell);
    State<Dim> self = sol[cell];
    State<Dim> other = o >= 0 ? sol[o] : sol[cell];
    const State<Dim> base = side_flux(cell, e, self, other);
    State<Dim>& var = wrt_neighbor ? other : self;

    Block<Dim> jac;
    bool ok = true;
    for (int k = 0; k <= Dim; ++k) {
      const double keep = var[k];
      var[k] = keep + eps;
      jac.col(k) = (side_flux(cell, e, self, other) - base) / eps;
      var[k] = keep;
    }
    if (!jac.allFinite() || jac.cwiseAbs().maxCoeff() > 1e8) ok = false;
    if (ok) return jac;

    constexpr double kCentral = 1e-6;
    for (int k = 0; k <= Dim; ++k) {
      const double keep = var[k];
      var[k] = keep + kCentral;
      const State<Dim> fp = side_flux(cell, e, self, other);
      var[k] = keep - kCentral;
      const State<Dim> fm = side_flux(cell, e, self, other);
      var[k] = keep;
      jac.col(k) = (fp - fm) / (2.0 * kCentral);
    }
    return jac;
  }

  /// Residual of one cell and its derivative with respect to the cell's own
  /// average, with neighbours frozen.
  std::pair<State<Dim>, Block<Dim>> cell_residual_and_diagonal(int cell,
                                                              const BlockVector<Dim>& sol,
                                                              double eps) const {
    State<Dim> r = State<Dim>::Zero();
    Block<Dim> d = Block<Dim>::Zero();
    for (int ei : mesh_->cells[cell].edges) {
      const auto& e = mesh_->edges[ei];
      r += side_flux(cell, e, sol);
      d += jacobian_block_fd(cell, e, sol, false, eps);
    }
    return {r, d};
  }

  /// Sparsity pattern: each cell couples to itself and its face neighbours.
  std::vector<std::vector<int>> pattern() const {
    std::vector<std::vector<int>> p(mesh_->num_cells());
    for (const auto& e : mesh_->edges) {
      if (e.is_boundary()) continue;
      p[e.left].push_back(e.right);
      p[e.right].push_back(e.left);
    }
    return p;
  }

  /// Regularized Newton system at `sol`:
  ///   A_ii = alpha ||R_i||_1 I + sum_e |e| dF/dU_i,  A_ij = |e_ij| dF/dU_j.
  /// Rows of dry cells (h <= h_eps) become identity rows with zero residual.
  RegularizedSystem<Dim> assemble_regularized_system(const BlockVector<Dim>& sol, double alpha,
                                                     double eps) const {
    check_size(sol);
    if (alpha < 0.0) throw ConfigError("regularization parameter must be non-negative");
    RegularizedSystem<Dim> sys;
    sys.matrix = BlockSparseMatrix<Dim>::from_pattern(pattern());
    sys.residual = assemble_residual(sol);
    sys.rhs_residual = sys.residual.cells;
    auto& a = sys.matrix;
    for (int i = 0; i < mesh_->num_cells(); ++i) {
      if (sol[i][0] <= phys_.h_eps) {
        a.diagonal(i) = Block<Dim>::Identity();
        sys.rhs_residual[i].setZero();
        continue;
      }
      Block<Dim>& di = a.diagonal(i);
      di = alpha * sys.residual.l1[i] * Block<Dim>::Identity();
      for (int ei : mesh_->cells[i].edges) {
        const auto& e = mesh_->edges[ei];
        di += jacobian_block_fd(i, e, sol, false, eps);
        if (!e.is_boundary()) a.blocks[a.find(i, e.other(i))] += jacobian_block_fd(i, e, sol, true, eps);
      }
    }
    return sys;
  }

 private:
  void check_size(const BlockVector<Dim>& sol) const {
    if (static_cast<int>(sol.size()) != mesh_->num_cells())
      throw ConfigError("solution size does not match the mesh");
  }

  const MeshLevel<Dim>* mesh_;
  BoundaryMap boundary_;
  FluxKind flux_;
  PhysicsParams phys_;
};

}  // namespace swnmg
