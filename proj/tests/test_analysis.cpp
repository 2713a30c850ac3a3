#include "property_checks.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <map>
#include <random>

using namespace swnmg;

TEST(IterationMatrix, BlockDiagonalGivesZero) {
  auto a = BlockSparseMatrix<1>::from_pattern(std::vector<std::vector<int>>(5));
  for (int i = 0; i < 5; ++i) a.diagonal(i) << 3.0, 1.0, -1.0, 2.0;
  EXPECT_EQ(build_iteration_matrix(a).cwiseAbs().maxCoeff(), 0.0);
}

TEST(IterationMatrix, MatchesTriangularFactorFormula) {
  const int n = 12, m = 2;
  std::vector<std::vector<int>> pat(n);
  for (int i = 0; i < n; ++i) {
    if (i > 0) pat[i].push_back(i - 1);
    if (i + 1 < n) pat[i].push_back(i + 1);
  }
  auto a = BlockSparseMatrix<1>::from_pattern(pat);
  Block<1> d, l, u;
  d << 3.0, 0.5, -0.2, 2.5;
  l << -1.0, 0.3, 0.1, -0.8;
  u << -0.7, -0.2, 0.4, -1.1;
  for (int i = 0; i < n; ++i) {
    a.diagonal(i) = d;
    if (i > 0) a.blocks[a.find(i, i - 1)] = l;
    if (i + 1 < n) a.blocks[a.find(i, i + 1)] = u;
  }
  const Eigen::MatrixXd ad = a.to_dense();
  Eigen::MatrixXd dd = Eigen::MatrixXd::Zero(n * m, n * m), lo = dd, up = dd;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const auto blk = ad.block(i * m, j * m, m, m);
      (i == j ? dd : i > j ? lo : up).block(i * m, j * m, m, m) = blk;
    }
  const Eigen::MatrixXd want = (dd + up).inverse() * lo * (dd + lo).inverse() * up;
  EXPECT_LT((build_iteration_matrix(a) - want).cwiseAbs().maxCoeff(), 1e-13);
}

TEST(IterationMatrix, SweepCrossCheck) {
  EXPECT_LT(props::sweep_vs_matrix_error<1>(), 1e-12);
  EXPECT_LT(props::sweep_vs_matrix_error<2>(), 1e-12);
}

TEST(IterationMatrix, DimensionCap) {
  auto a = BlockSparseMatrix<1>::from_pattern(std::vector<std::vector<int>>(10));
  for (int i = 0; i < 10; ++i) a.diagonal(i).setIdentity();
  EXPECT_THROW(build_iteration_matrix(a, 8), ConfigError);
}

TEST(Spectrum, DiagonalMatrix) {
  Eigen::MatrixXd t = Eigen::MatrixXd::Zero(2, 2);
  t(0, 0) = 0.5;
  t(1, 1) = -0.25;
  const auto rep = spectrum(t);
  EXPECT_DOUBLE_EQ(rep.rho, 0.5);
  EXPECT_NEAR(rep.r_inf, std::log(2.0), 1e-15);
  ASSERT_EQ(rep.eigenvalues.size(), 2u);
  std::vector<double> re{rep.eigenvalues[0].real(), rep.eigenvalues[1].real()};
  std::sort(re.begin(), re.end());
  EXPECT_DOUBLE_EQ(re[0], -0.25);
  EXPECT_DOUBLE_EQ(re[1], 0.5);
  EXPECT_NEAR(power_iteration_rho(t), 0.5, 1e-12);
  EXPECT_LT(eigen_residual(t, dominant_eigenvalue(rep)), 1e-10);
}

TEST(Spectrum, Example1Fluxes) {
  const auto p = example1();
  std::map<FluxKind, double> rho;
  for (auto f : {FluxKind::kHll, FluxKind::kLlf, FluxKind::kRoe}) {
    auto cfg = default_config(p);
    cfg.flux = f;
    rho[f] = steady_spectrum_1d(p, cfg, 64).rho;
  }
  EXPECT_NEAR(rho[FluxKind::kHll], 0.39347, 0.05);
  EXPECT_NEAR(rho[FluxKind::kLlf], 0.96013, 0.02);
  EXPECT_NEAR(rho[FluxKind::kRoe], 0.48516, 0.05);
  EXPECT_GT(rho[FluxKind::kLlf], rho[FluxKind::kHll]);
  EXPECT_GT(rho[FluxKind::kLlf], rho[FluxKind::kRoe]);
}

TEST(Spectrum, Example1HllFewComplexEigenvalues) {
  const auto p = example1();
  const auto rep = steady_spectrum_1d(p, default_config(p), 256);
  int large = 0;
  for (const auto& l : rep.eigenvalues) large += std::abs(l.imag()) > 0.3;
  EXPECT_LE(large, 4);
}

TEST(RateFit, ExactSyntheticData) {
  std::vector<std::pair<double, double>> s;
  for (double dx : {0.3, 0.15, 0.075, 0.0375}) s.emplace_back(dx, 1.0 - 0.1 * dx);
  const auto fit = fit_rate_law(s);
  EXPECT_NEAR(fit.c, 0.1, 1e-12);
  EXPECT_LT(fit.residual, 1e-12);
  EXPECT_THROW(fit_rate_law({{0.1, 0.9}, {0.2, 0.8}}), ConfigError);
  EXPECT_THROW(fit_rate_law({{0.1, 0.9}, {0.1, 0.8}, {0.2, 0.7}}), ConfigError);
}

TEST(RateFit, Example1Llf) {
  const auto p = example1();
  auto cfg = default_config(p);
  cfg.flux = FluxKind::kLlf;
  std::vector<std::pair<double, double>> s;
  for (int n : {64, 128, 256, 512}) s.emplace_back(20.0 / n, steady_spectrum_1d(p, cfg, n).rho);
  const double c = fit_rate_law(s).c;
  EXPECT_GT(c, 0.092 * 0.5);
  EXPECT_LT(c, 0.092 * 1.5);
}

TEST(RateFit, Example2WithShock) {
  const auto p = example2(true);
  const std::map<FluxKind, double> reference{{FluxKind::kHll, 2.58}, {FluxKind::kLlf, 0.15}, {FluxKind::kRoe, 4.53}};
  for (const auto& [f, want] : reference) {
    auto cfg = default_config(p);
    cfg.flux = f;
    std::vector<std::pair<double, double>> s;
    for (int n : {64, 128, 256, 512}) s.emplace_back(25.0 / n, steady_spectrum_1d(p, cfg, n).rho);
    const double c = fit_rate_law(s).c;
    EXPECT_GE(c, want / 2.0) << to_string(f);
    EXPECT_LE(c, want * 2.0) << to_string(f);
  }
}

TEST(Oracle, CubicRootAtFlatBed) {
  EXPECT_NEAR(example1_cubic_velocity(0.0), 1.0, 1e-14);
  const auto [h, u] = exact_subcritical_1d(0.0);
  EXPECT_NEAR(h, 1.0, 1e-14);
  EXPECT_NEAR(u, 1.0, 1e-14);
}

TEST(Oracle, BernoulliInvariantOverBump) {
  const auto [h, u] = exact_subcritical_1d(0.2);
  const double e0 = 0.5 + kGravity;
  EXPECT_NEAR(0.5 * u * u + kGravity * (h + 0.2), e0, 1e-12);
  // Subcritical flow accelerates over the bump and the surface dips.
  EXPECT_GT(u, 1.0);
  EXPECT_LT(h + 0.2, 1.0);
  EXPECT_NEAR(example1_cubic_velocity(0.2), u, 1e-12);
}

TEST(Oracle, Example1ProfileIsContinuous) {
  const auto p = example1();
  double prev = exact_subcritical_1d(p.bed_at(-10.0)).first;
  for (int k = 1; k <= 20000; ++k) {
    const double x = -10.0 + 20.0 * k / 20000;
    const double h = exact_subcritical_1d(p.bed_at(x)).first;
    ASSERT_LT(std::abs(h - prev), 1e-3);
    prev = h;
  }
}

TEST(Oracle, TranscriticalCriticalAtCrest) {
  const auto p = example2(false);
  TranscriticalOracle o([&](double x) { return p.bed_at(x); }, 10.0, 25.0, 1.53, 0.66, false);
  EXPECT_NEAR(o.critical_depth(), std::cbrt(1.53 * 1.53 / kGravity), 1e-15);
  const double h = o.depth(10.0);
  EXPECT_NEAR(1.53 / (h * std::sqrt(kGravity * h)), 1.0, 1e-10);
  EXPECT_FALSE(o.has_shock());
  EXPECT_GT(o.depth(9.0), o.critical_depth());
  EXPECT_LT(o.depth(11.0), o.critical_depth());
}

TEST(Oracle, ShockSatisfiesRankineHugoniot) {
  const auto p = example2(true);
  TranscriticalOracle o([&](double x) { return p.bed_at(x); }, 10.0, 25.0, 0.18, 0.33, true);
  ASSERT_TRUE(o.has_shock());
  EXPECT_GT(o.shock_position(), 10.0);
  EXPECT_LT(o.shock_position(), 12.0);
  const auto [h1, h2] = o.jump_depths();
  EXPECT_LT(h1, h2);
  EXPECT_LT(std::abs(o.momentum_function(h1) - o.momentum_function(h2)), 1e-10);
}

TEST(Oracle, LakeAtRest) {
  const auto p = example3();
  const auto m = build_problem_mesh<1>(p, 256);
  const auto u = lake_at_rest_exact<1>(m, 0.1);
  for (const auto& c : m.cells) {
    EXPECT_EQ(u[c.index][0] == 0.0, c.bed >= 0.1);
    EXPECT_EQ(u[c.index][1], 0.0);
  }
  for (const auto& s : lake_at_rest_exact<1>(m, -1.0)) EXPECT_EQ(s[0], 0.0);
  const auto flat = build_uniform_1d(0.0, 1.0, 8, [](double) { return 0.0; });
  for (const auto& s : lake_at_rest_exact<1>(flat, 0.7)) EXPECT_EQ(s[0], 0.7);
}

TEST(ErrorNorms, IdentityAndOffset) {
  const auto m = build_uniform_1d(0.0, 4.0, 16, [](double) { return 0.0; });
  BlockVector<1> a(16, State<1>(1.0, 2.0)), b = a;
  const auto z = error_norms<1>(a, b, m);
  EXPECT_EQ(z.l1, State<1>::Zero());
  EXPECT_EQ(z.linf, State<1>::Zero());
  for (auto& s : b) s[0] += 0.25;
  const auto e = error_norms<1>(b, a, m);
  EXPECT_NEAR(e.l1[0], 0.25 * 4.0, 1e-15);
  EXPECT_NEAR(e.linf[0], 0.25, 1e-15);
  EXPECT_THROW(error_norms<1>(a, BlockVector<1>(3), m), ConfigError);
}

TEST(ObliqueJump, ContinuityAcrossTheJump) {
  const double theta = 5.0 * std::numbers::pi / 180.0;
  const auto j = oblique_jump(2.5, theta);
  EXPECT_GT(j.beta, std::asin(1.0 / 2.5));
  EXPECT_NEAR(j.beta * 180.0 / std::numbers::pi, 28.3, 0.1);
  // Mass across the jump with the tangential velocity unchanged.
  EXPECT_NEAR(std::tan(j.beta - theta) / std::tan(j.beta), 1.0 / j.depth_ratio, 1e-10);
  EXPECT_GT(j.froude_after, 1.0);
  EXPECT_LT(j.froude_after, 2.5);
  EXPECT_THROW(oblique_jump(0.8, theta), ConfigError);
  EXPECT_THROW(oblique_jump(1.2, 0.5), ConfigError);
}

TEST(Sampling, MeanDepthNear) {
  const auto m = build_channel_2d(ChannelSpec::rectangle(0.0, 4.0, 2.0), 8, 4, [](const Point<2>&) { return 0.0; });
  BlockVector<2> u(m.num_cells(), State<2>(2.0, 0.0, 0.0));
  EXPECT_DOUBLE_EQ(mean_depth_near<2>(m, u, Point<2>(2.0, 0.0), 1.0), 2.0);
  EXPECT_THROW(mean_depth_near<2>(m, u, Point<2>(100.0, 0.0), 0.1), ConfigError);
}
