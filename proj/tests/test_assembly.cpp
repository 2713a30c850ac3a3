#include "property_checks.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace swnmg;

namespace {

struct Setup1d {
  ProblemSpec p;
  MeshLevel<1> mesh;
  Discretization<1> disc;
  Setup1d(ProblemSpec spec, int n, FluxKind flux)
      : p(std::move(spec)), mesh(build_problem_mesh<1>(p, n)), disc(mesh, p.boundary, flux, PhysicsParams{}) {}
};

BlockVector<1> example1_exact(const MeshLevel<1>& m) {
  BlockVector<1> u(m.num_cells());
  for (const auto& c : m.cells) {
    const auto [h, vel] = exact_subcritical_1d(c.bed);
    u[c.index] = State<1>(h, h * vel);
  }
  return u;
}

}  // namespace

TEST(Residual, LakeAtRestWithDryCellsIsZero) {
  for (auto flux : {FluxKind::kHll, FluxKind::kLlf}) {
    Setup1d s(example3(), 512, flux);
    const auto u = lake_at_rest_exact<1>(s.mesh, 0.1);
    int dry = 0;
    for (const auto& v : u) dry += v[0] == 0.0;
    ASSERT_GT(dry, 0);
    EXPECT_LT(s.disc.assemble_residual(u).total, 1e-12) << to_string(flux);
  }
}

TEST(Residual, LakeAtRest2dIsZero) {
  auto p = example7();
  const auto mesh = build_problem_mesh<2>(p, 64, 32);
  for (auto flux : {FluxKind::kHll, FluxKind::kHllc, FluxKind::kLlf}) {
    // Reflective walls all round keep the lake closed.
    BoundaryMap closed;
    for (auto& b : closed) b.kind = BoundaryKind::kReflectiveWall;
    Discretization<2> dc(mesh, closed, flux, PhysicsParams{});
    EXPECT_LT(dc.assemble_residual(lake_at_rest_exact<2>(mesh, 0.2)).total, 1e-12) << to_string(flux);
  }
}

TEST(Residual, UniformFlowIsZero) {
  Setup1d s(uniform_flow(), 64, FluxKind::kHll);
  BlockVector<1> u(64, State<1>(1.0, 0.5));
  EXPECT_LT(s.disc.assemble_residual(u).total, 1e-13);
}

TEST(Residual, ExactExample1StateHasFirstOrderResidual) {
  double prev = 0.0;
  for (int n : {64, 128, 256}) {
    Setup1d s(example1(), n, FluxKind::kHll);
    const double r = s.disc.assemble_residual(example1_exact(s.mesh)).total;
    if (prev > 0.0) {
      EXPECT_GT(prev / r, 1.5) << n;
      EXPECT_LT(prev / r, 2.5) << n;
    }
    prev = r;
  }
}

TEST(Residual, ConvergedExample1HasTinyCellResiduals) {
  const auto p = example1();
  auto cfg = default_config(p);
  auto run = solve_problem<1>(p, cfg, 64);
  ASSERT_TRUE(run.result.history.converged());
  Discretization<1> d(run.mesh(), p.boundary, cfg.flux, cfg.physics());
  const auto r = d.assemble_residual(run.result.solution);
  for (double v : r.l1) EXPECT_LT(v, 1e-10);
}

TEST(Jacobian, SupercriticalOutflowIsOneSidedFluxJacobian) {
  auto p = uniform_flow();
  p.boundary[1].kind = BoundaryKind::kSupercriticalOutflow;
  Setup1d s(p, 8, FluxKind::kHll);
  const State<1> u(0.5, 5.0);  // Froude about 4.5
  BlockVector<1> sol(8, u);
  const int last = 7;
  const Edge<1>* be = nullptr;
  for (int ei : s.mesh.cells[last].edges)
    if (s.mesh.edges[ei].is_boundary()) be = &s.mesh.edges[ei];
  ASSERT_NE(be, nullptr);
  const Block<1> fd = s.disc.jacobian_block_fd(last, *be, sol, false, 1e-8);
  // The edge term subtracts the interface pressure g h^2 / 2 n.
  Block<1> an = physical_flux_jacobian<1>(u, Point<1>(1.0), kGravity);
  an(1, 0) -= kGravity * u[0];
  EXPECT_LT((fd - an).cwiseAbs().maxCoeff(), 1e-6 * (1.0 + an.cwiseAbs().maxCoeff()));
  EXPECT_THROW(s.disc.jacobian_block_fd(last, *be, sol, true, 1e-8), ConfigError);
}

TEST(Jacobian, ColumnsAreUnitDirections) {
  Setup1d s(example1(), 16, FluxKind::kLlf);
  BlockVector<1> sol(16, State<1>(1.0, 1.0));
  const auto& e = s.mesh.edges[s.mesh.cells[5].edges[0]];
  const Block<1> j = s.disc.jacobian_block_fd(5, e, sol, false, 1e-8);
  for (int k = 0; k < 2; ++k) {
    BlockVector<1> pert = sol;
    pert[5][k] += 1e-8;
    const State<1> col = (s.disc.side_flux(5, e, pert) - s.disc.side_flux(5, e, sol)) / 1e-8;
    EXPECT_LT((col - j.col(k)).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(NewtonSystem, RegularizationShiftsTheDiagonal) {
  Setup1d s(example1(), 32, FluxKind::kHll);
  BlockVector<1> sol(32, State<1>(1.0, 1.0));
  const auto a3 = s.disc.assemble_regularized_system(sol, 3.0, 1e-8);
  const auto a0 = s.disc.assemble_regularized_system(sol, 0.0, 1e-8);
  bool some_nonzero = false;
  for (int i = 0; i < 32; ++i) {
    const double shift = 3.0 * a3.residual.l1[i];
    some_nonzero |= shift > 0.0;
    EXPECT_LT((a3.matrix.diagonal(i) - a0.matrix.diagonal(i) - shift * Block<1>::Identity()).cwiseAbs().maxCoeff(),
              1e-14);
  }
  EXPECT_TRUE(some_nonzero);
}

TEST(NewtonSystem, AlphaTimesHalf) {
  // alpha = 3 and ||R_i|| = 0.5 add 1.5 I.
  Setup1d s(uniform_flow(), 8, FluxKind::kHll);
  BlockVector<1> sol(8, State<1>(1.0, 0.5));
  const auto base = s.disc.assemble_regularized_system(sol, 3.0, 1e-8);
  EXPECT_LT(base.residual.total, 1e-13);
  const Block<1> d = base.matrix.diagonal(3) + 3.0 * 0.5 * Block<1>::Identity();
  EXPECT_NEAR(d(0, 0) - base.matrix.diagonal(3)(0, 0), 1.5, 1e-15);
}

TEST(NewtonSystem, ZeroResidualMeansNoRegularization) {
  Setup1d s(uniform_flow(), 16, FluxKind::kHll);
  BlockVector<1> sol(16, State<1>(1.0, 0.5));
  const auto a3 = s.disc.assemble_regularized_system(sol, 3.0, 1e-8);
  const auto a0 = s.disc.assemble_regularized_system(sol, 0.0, 1e-8);
  for (int i = 0; i < 16; ++i) EXPECT_LT((a3.matrix.diagonal(i) - a0.matrix.diagonal(i)).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(NewtonSystem, MatvecMatchesEdgeLoop) {
  const auto p = example7();
  const auto mesh = build_problem_mesh<2>(p, 16, 8);
  Discretization<2> d(mesh, p.boundary, FluxKind::kHllc, PhysicsParams{});
  std::mt19937_64 rng(2);
  BlockVector<2> sol(mesh.num_cells());
  for (auto& u : sol) u = props::random_wet_state<2>(rng, 0.5, 1.5);
  const auto sys = d.assemble_regularized_system(sol, 0.0, 1e-8);
  BlockVector<2> x(mesh.num_cells());
  for (auto& v : x) v = props::random_wet_state<2>(rng);
  const auto y = matvec(sys.matrix, x);
  for (int i = 0; i < mesh.num_cells(); ++i) {
    State<2> acc = State<2>::Zero();
    for (int ei : mesh.cells[i].edges) {
      const auto& e = mesh.edges[ei];
      acc += d.jacobian_block_fd(i, e, sol, false, 1e-8) * x[i];
      if (!e.is_boundary()) acc += d.jacobian_block_fd(i, e, sol, true, 1e-8) * x[e.other(i)];
    }
    ASSERT_LT((acc - y[i]).cwiseAbs().maxCoeff(), 1e-13 * (1.0 + acc.cwiseAbs().maxCoeff()));
  }
}

TEST(NewtonSystem, DryRowsAreIdentity) {
  Setup1d s(example3(), 64, FluxKind::kLlf);
  const auto u = lake_at_rest_exact<1>(s.mesh, 0.1);
  const auto sys = s.disc.assemble_regularized_system(u, 3.0, 1e-8);
  int dry = 0;
  for (int i = 0; i < 64; ++i)
    if (u[i][0] <= kDryDepth) {
      ++dry;
      EXPECT_EQ(sys.matrix.diagonal(i), Block<1>::Identity());
      EXPECT_EQ(sys.rhs_residual[i], State<1>::Zero());
    }
  EXPECT_GT(dry, 0);
}

TEST(BlockSparse, IdentityAndSingleBlock) {
  auto a = BlockSparseMatrix<1>::from_pattern({{1}, {0}, {}});
  for (int i = 0; i < 3; ++i) a.diagonal(i).setIdentity();
  BlockVector<1> x{State<1>(1, 2), State<1>(3, 4), State<1>(5, 6)};
  EXPECT_EQ(matvec(a, x), x);
  auto b = BlockSparseMatrix<1>::from_pattern({{1}, {0}, {}});
  b.blocks[b.find(0, 1)] << 1, 2, 3, 4;
  const auto y = matvec(b, x);
  EXPECT_EQ(y[0], State<1>(1 * 3 + 2 * 4, 3 * 3 + 4 * 4));
  EXPECT_EQ(y[1], State<1>::Zero());
  EXPECT_EQ(b.find(0, 2), -1);
  EXPECT_EQ(b.block(0, 2), Block<1>::Zero());
}

TEST(BlockSparse, MatvecMatchesDense) {
  std::mt19937_64 rng(11);
  const auto a = props::random_grid_matrix<2>(5, 4, rng, false);
  BlockVector<2> x(20);
  Eigen::VectorXd xd(60);
  std::uniform_real_distribution<double> rd(-1, 1);
  for (int i = 0; i < 20; ++i) {
    for (int k = 0; k < 3; ++k) x[i][k] = rd(rng);
    xd.segment<3>(3 * i) = x[i];
  }
  const auto y = matvec(a, x);
  const Eigen::VectorXd yd = a.to_dense() * xd;
  for (int i = 0; i < 20; ++i) EXPECT_LT((y[i] - yd.segment<3>(3 * i)).cwiseAbs().maxCoeff(), 1e-13);
}

TEST(BlockSparse, PatternRejectsBadColumns) {
  EXPECT_THROW(BlockSparseMatrix<1>::from_pattern({{5}, {}}), ConfigError);
}
