#pragma once

// Linear inner solver: block symmetric Gauss-Seidel smoothing, Galerkin
// coarse operators and the recursive gamma-cycle. Every level solves
// A delta = -R.

#include "swnmg/assembly.hpp"
#include "swnmg/core.hpp"
#include "swnmg/mesh.hpp"

#include <cmath>
#include <optional>
#include <ostream>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace swnmg {

enum class CoarsestSolver { kDirect, kSweeps };

struct CycleConfig {
  int gamma = 1;
  int nu1 = 1;
  int nu2 = 1;
  CoarsestSolver coarsest = CoarsestSolver::kDirect;
  /// Direct solves above this expanded dimension switch to sweeps.
  int max_direct_dim = 4096;
  int coarsest_max_sweeps = 500;
  double coarsest_rel_tol = 1e-12;

  void validate() const {
    if (gamma != 1 && gamma != 2) throw ConfigError("gamma must be 1 (V) or 2 (W)");
    if (nu1 < 0 || nu2 < 0 || nu1 + nu2 < 1) throw ConfigError("need nu1, nu2 >= 0 and nu1 + nu2 >= 1");
  }
};

template <int Dim>
struct LinearLevel {
  using LU = Eigen::PartialPivLU<Block<Dim>>;

  BlockSparseMatrix<Dim> matrix;
  /// R in A delta = -R.
  BlockVector<Dim> rhs;
  BlockVector<Dim> correction;
  /// Owning cell on the next coarser level; empty on the coarsest level.
  std::vector<int> to_coarse;
  std::vector<LU> diag_lu;
  std::optional<Eigen::PartialPivLU<Eigen::MatrixXd>> dense_lu;
  long visits = 0;

  int size() const { return matrix.rows(); }

  /// Factorizes every diagonal block; throws on an exactly singular block.
  void factorize() {
    diag_lu.clear();
    diag_lu.reserve(size());
    for (int i = 0; i < size(); ++i) {
      const Block<Dim>& d = matrix.diagonal(i);
      LU lu(d);
      const double det = lu.determinant();
      if (!std::isfinite(det) || det == 0.0 || !d.allFinite())
        throw SingularMatrixError("singular diagonal block at row " + std::to_string(i));
      diag_lu.push_back(std::move(lu));
    }
    dense_lu.reset();
  }
};

namespace detail {

template <int Dim>
void sgs_row(LinearLevel<Dim>& lv, int i) {
  const auto& a = lv.matrix;
  State<Dim> r = lv.rhs[i];
  for (int k = a.row_ptr[i]; k < a.row_ptr[i + 1]; ++k) {
    const int j = a.cols[k];
    if (j != i) r.noalias() += a.blocks[k] * lv.correction[j];
  }
  lv.correction[i] = lv.diag_lu[i].solve(-r);
}

}  // namespace detail

/// One forward (ascending) then backward (descending) block Gauss-Seidel pass.
template <int Dim>
void block_sgs_sweep(LinearLevel<Dim>& lv) {
  if (static_cast<int>(lv.diag_lu.size()) != lv.size()) lv.factorize();
  const int n = lv.size();
  for (int i = 0; i < n; ++i) detail::sgs_row(lv, i);
  for (int i = n - 1; i >= 0; --i) detail::sgs_row(lv, i);
}

/// Block residual A delta + R.
template <int Dim>
BlockVector<Dim> linear_residual(const LinearLevel<Dim>& lv) {
  BlockVector<Dim> r = matvec(lv.matrix, lv.correction);
  for (int i = 0; i < lv.size(); ++i) r[i] += lv.rhs[i];
  return r;
}

template <int Dim>
double linear_residual_norm(const LinearLevel<Dim>& lv) {
  double s = 0.0;
  for (const auto& b : linear_residual(lv)) s += b.template lpNorm<1>();
  return s;
}

/// Coarse block (I, J) = sum of fine blocks (i, j) with parent(i) = I and parent(j) = J.
template <int Dim>
BlockSparseMatrix<Dim> galerkin_coarsen(const BlockSparseMatrix<Dim>& fine,
                                        const std::vector<int>& to_coarse, int n_coarse) {
  if (static_cast<int>(to_coarse.size()) != fine.rows())
    throw ConfigError("parent map does not match the fine matrix");
  std::vector<std::set<int>> cols(n_coarse);
  for (int i = 0; i < fine.rows(); ++i)
    for (int k = fine.row_ptr[i]; k < fine.row_ptr[i + 1]; ++k)
      cols[to_coarse[i]].insert(to_coarse[fine.cols[k]]);
  std::vector<std::vector<int>> pattern(n_coarse);
  for (int c = 0; c < n_coarse; ++c) pattern[c].assign(cols[c].begin(), cols[c].end());
  auto coarse = BlockSparseMatrix<Dim>::from_pattern(std::move(pattern));
  for (int i = 0; i < fine.rows(); ++i) {
    const int ci = to_coarse[i];
    for (int k = fine.row_ptr[i]; k < fine.row_ptr[i + 1]; ++k)
      coarse.blocks[coarse.find(ci, to_coarse[fine.cols[k]])] += fine.blocks[k];
  }
  return coarse;
}

/// R_I = sum over children j of (R_j + (A delta)_j).
template <int Dim>
BlockVector<Dim> restrict_residual(const LinearLevel<Dim>& fine, int n_coarse) {
  BlockVector<Dim> out(n_coarse, State<Dim>::Zero());
  const BlockVector<Dim> r = linear_residual(fine);
  for (int i = 0; i < fine.size(); ++i) out[fine.to_coarse[i]] += r[i];
  return out;
}

/// Piecewise-constant injection of the coarse correction, added in place.
template <int Dim>
void prolongate_correct(const BlockVector<Dim>& coarse, const std::vector<int>& to_coarse,
                        BlockVector<Dim>& fine) {
  for (std::size_t i = 0; i < fine.size(); ++i) fine[i] += coarse[to_coarse[i]];
}

template <int Dim>
void solve_coarsest(LinearLevel<Dim>& lv, const CycleConfig& cfg) {
  const int dim = lv.size() * (Dim + 1);
  if (cfg.coarsest == CoarsestSolver::kDirect && dim <= cfg.max_direct_dim) {
    if (!lv.dense_lu) {
      Eigen::MatrixXd d = lv.matrix.to_dense();
      if (!d.allFinite()) throw SingularMatrixError("non-finite coarsest matrix");
      lv.dense_lu.emplace(d);
    }
    Eigen::VectorXd b(dim);
    for (int i = 0; i < lv.size(); ++i) b.segment<Dim + 1>(i * (Dim + 1)) = -lv.rhs[i];
    const Eigen::VectorXd x = lv.dense_lu->solve(b);
    if (!x.allFinite()) throw SingularMatrixError("singular coarsest matrix");
    for (int i = 0; i < lv.size(); ++i) lv.correction[i] = x.segment<Dim + 1>(i * (Dim + 1));
    return;
  }
  double r0 = 0.0;
  for (const auto& b : lv.rhs) r0 += b.template lpNorm<1>();
  if (r0 == 0.0) return;
  for (int s = 0; s < cfg.coarsest_max_sweeps; ++s) {
    block_sgs_sweep(lv);
    if (linear_residual_norm(lv) < cfg.coarsest_rel_tol * r0) break;
  }
}

/// Per-level visit counters and per-cycle linear residuals.
struct CycleStats {
  std::vector<long> visits;
  std::vector<double> residuals;

  void write_csv(std::ostream& os) const {
    os << "cycle,linear_residual\n";
    os.precision(17);
    for (std::size_t k = 0; k < residuals.size(); ++k) os << k << ',' << residuals[k] << '\n';
    os << "# level visits";
    for (long v : visits) os << ' ' << v;
    os << '\n';
  }
};

/// Recursive gamma-cycle on level l. The finest level uses a single coarse
/// visit regardless of gamma. With a single level the cycle is nu1 + nu2
/// smoothing sweeps.
template <int Dim>
void mg_cycle(std::vector<LinearLevel<Dim>>& levels, int l, const CycleConfig& cfg) {
  LinearLevel<Dim>& lv = levels[l];
  ++lv.visits;
  const int last = static_cast<int>(levels.size()) - 1;
  if (last == 0) {
    for (int s = 0; s < cfg.nu1 + cfg.nu2; ++s) block_sgs_sweep(lv);
    return;
  }
  if (l == last) {
    solve_coarsest(lv, cfg);
    return;
  }
  for (int s = 0; s < cfg.nu1; ++s) block_sgs_sweep(lv);
  LinearLevel<Dim>& co = levels[l + 1];
  co.rhs = restrict_residual(lv, co.size());
  co.correction.assign(co.size(), State<Dim>::Zero());
  const int g = (l == 0) ? 1 : cfg.gamma;
  for (int k = 0; k < g; ++k) mg_cycle(levels, l + 1, cfg);
  prolongate_correct<Dim>(co.correction, lv.to_coarse, lv.correction);
  for (int s = 0; s < cfg.nu2; ++s) block_sgs_sweep(lv);
}

/// Multigrid hierarchy of linear levels rebuilt from each fresh fine system.
template <int Dim>
class MultigridSolver {
 public:
  /// maps[l] gives, for each cell of level l, its owner on level l + 1.
  MultigridSolver(std::vector<std::vector<int>> maps, CycleConfig cfg)
      : maps_(std::move(maps)), cfg_(cfg) {
    cfg_.validate();
  }

  static MultigridSolver from_hierarchy(const MeshHierarchy<Dim>& h, CycleConfig cfg) {
    std::vector<std::vector<int>> maps;
    for (int l = 1; l < static_cast<int>(h.levels.size()); ++l) maps.push_back(h.levels[l].fine_to_coarse);
    return MultigridSolver(std::move(maps), cfg);
  }

  /// Builds Galerkin operators for A delta = -R and factorizes the smoothers.
  void setup(BlockSparseMatrix<Dim> a, BlockVector<Dim> r) {
    if (static_cast<int>(r.size()) != a.rows()) throw ConfigError("rhs size does not match matrix");
    levels_.clear();
    levels_.resize(maps_.size() + 1);
    levels_[0].matrix = std::move(a);
    levels_[0].rhs = std::move(r);
    for (std::size_t l = 0; l < levels_.size(); ++l) {
      auto& lv = levels_[l];
      if (l > 0) {
        int n_coarse = 0;
        for (int p : maps_[l - 1]) n_coarse = std::max(n_coarse, p + 1);
        lv.matrix = galerkin_coarsen(levels_[l - 1].matrix, maps_[l - 1], n_coarse);
        lv.rhs.assign(n_coarse, State<Dim>::Zero());
      }
      if (l < maps_.size()) {
        if (static_cast<int>(maps_[l].size()) != lv.matrix.rows())
          throw ConfigError("level map does not match the matrix size");
        lv.to_coarse = maps_[l];
      }
      lv.correction.assign(lv.matrix.rows(), State<Dim>::Zero());
      lv.factorize();
    }
    if (stats_.visits.size() != levels_.size()) stats_.visits.assign(levels_.size(), 0);
  }

  /// Runs n_cycles cycles from a zero correction and returns delta.
  BlockVector<Dim> solve(int n_cycles) {
    if (levels_.empty()) throw ConfigError("multigrid solver used before setup");
    auto& fine = levels_[0];
    fine.correction.assign(fine.size(), State<Dim>::Zero());
    for (auto& lv : levels_) lv.visits = 0;
    for (int c = 0; c < n_cycles; ++c) {
      mg_cycle(levels_, 0, cfg_);
      if (record_residuals_) stats_.residuals.push_back(linear_residual_norm(fine));
    }
    for (std::size_t l = 0; l < levels_.size(); ++l) stats_.visits[l] += levels_[l].visits;
    return fine.correction;
  }

  void record_residuals(bool on) { record_residuals_ = on; }
  const CycleStats& stats() const { return stats_; }
  std::vector<LinearLevel<Dim>>& levels() { return levels_; }
  const CycleConfig& config() const { return cfg_; }

 private:
  std::vector<std::vector<int>> maps_;
  CycleConfig cfg_;
  std::vector<LinearLevel<Dim>> levels_;
  CycleStats stats_;
  bool record_residuals_ = false;
};

}  // namespace swnmg
