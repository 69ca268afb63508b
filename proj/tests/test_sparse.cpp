#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <random>

#include "test_util.hpp"
#include "volcolor/solver.hpp"

using namespace volcolor;
using testutil::dense;
using testutil::ev;

TEST(Assemble, SumsDuplicates) {
  auto m = assemble(2, {{0, 0, 1.0}, {0, 0, 2.0}});
  EXPECT_EQ(m.nnz(), 1u);
  EXPECT_EQ(m.at(0, 0), 3.0);
}

TEST(Assemble, EmptyIsZeroMatrix) {
  auto m = assemble(4, {});
  EXPECT_EQ(m.nnz(), 0u);
  std::vector<double> x{1, 2, 3, 4};
  EXPECT_EQ(matvec(m, x), std::vector<double>(4, 0.0));
}

TEST(Assemble, CanonicalRows) {
  auto m = assemble(3, {{1, 2, 1.0}, {1, 0, 2.0}, {1, 1, 1.0}, {1, 1, -1.0}, {2, 2, 5.0}});
  EXPECT_EQ(m.nnz(), 3u);  // the cancelled (1,1) entry is dropped
  EXPECT_EQ(m.col_index[0], 0u);
  EXPECT_EQ(m.col_index[1], 2u);
  EXPECT_THROW(assemble(3, {{3, 0, 1.0}}), Error);
  EXPECT_THROW(assemble(3, {{0, 5, 1.0}}), Error);
}

TEST(Matvec, IdentityAndTridiagonal) {
  std::vector<double> x{3, -1, 2};
  EXPECT_EQ(matvec(identity_matrix(3), x), x);
  std::vector<double> ones{1, 1, 1};
  EXPECT_EQ(matvec(testutil::poisson_1d(3), ones), (std::vector<double>{1, 0, 1}));
  std::vector<double> bad{1, 2};
  EXPECT_THROW(matvec(identity_matrix(3), bad), Error);
}

TEST(Matvec, MatchesDenseOnRandomMatrices) {
  std::mt19937 rng(42);
  std::uniform_int_distribution<std::size_t> dim(1, 32);
  std::uniform_real_distribution<double> u(-1, 1);
  for (int trial = 0; trial < 50; ++trial) {
    std::size_t n = dim(rng);
    std::vector<Triplet> t;
    std::size_t count = n * 3;
    std::uniform_int_distribution<std::size_t> idx(0, n - 1);
    Eigen::MatrixXd oracle = Eigen::MatrixXd::Zero(Eigen::Index(n), Eigen::Index(n));
    for (std::size_t c = 0; c < count; ++c) {
      Triplet tr{idx(rng), idx(rng), u(rng)};
      t.push_back(tr);
      oracle(Eigen::Index(tr.row), Eigen::Index(tr.col)) += tr.value;
    }
    auto m = assemble(n, t);
    for (int v = 0; v < 10; ++v) {
      auto x = testutil::random_vector(n, rng);
      Eigen::VectorXd expect = oracle * ev(x);
      auto y = matvec(m, x);
      for (std::size_t i = 0; i < n; ++i) EXPECT_NEAR(y[i], expect(Eigen::Index(i)), 1e-12);
    }
  }
}

TEST(SparseOps, TransposeAndMultiplyMatchDense) {
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> u(-1, 1);
  std::vector<Triplet> ta, tb;
  for (std::size_t i = 0; i < 7; ++i)
    for (std::size_t j = 0; j < 5; ++j)
      if (u(rng) > 0.3) ta.push_back({i, j, u(rng)});
  for (std::size_t i = 0; i < 5; ++i)
    for (std::size_t j = 0; j < 6; ++j)
      if (u(rng) > 0.3) tb.push_back({i, j, u(rng)});
  auto a = assemble(7, 5, ta);
  auto b = assemble(5, 6, tb);
  EXPECT_TRUE(dense(transpose(a)).isApprox(dense(a).transpose()));
  EXPECT_LT((dense(multiply(a, b)) - dense(a) * dense(b)).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(SparseOps, MatrixMarketDump) {
  auto path = std::filesystem::temp_directory_path() / "volcolor_mm_test.mtx";
  write_matrix_market(testutil::poisson_1d(3), path);
  std::ifstream in(path);
  std::string header;
  std::getline(in, header);
  EXPECT_EQ(header, "%%MatrixMarket matrix coordinate real general");
  std::size_t r, c, nnz;
  in >> r >> c >> nnz;
  EXPECT_EQ(r, 3u);
  EXPECT_EQ(nnz, 7u);
  std::filesystem::remove(path);
}

TEST(CgSolve, IdentityInOneIteration) {
  std::vector<double> b{1, -2, 3, 0.5};
  std::vector<double> x(4, 0.0);
  auto rep = cg_solve(identity_matrix(4), b, x, {});
  EXPECT_TRUE(rep.converged);
  EXPECT_LE(rep.iterations, 1);
  for (std::size_t i = 0; i < 4; ++i) EXPECT_NEAR(x[i], b[i], 1e-14);
}

TEST(CgSolve, ZeroRhsReturnsZero) {
  std::vector<double> b(5, 0.0), x(5, 3.0);
  auto rep = cg_solve(testutil::poisson_1d(5), b, x, {});
  EXPECT_TRUE(rep.converged);
  EXPECT_EQ(rep.iterations, 0);
  EXPECT_EQ(x, std::vector<double>(5, 0.0));
}

TEST(CgSolve, OneDimensionalPoissonMatchesDense) {
  auto a = testutil::poisson_1d(16);
  std::vector<double> b(16, 0.0);
  b[0] = 1.0;
  std::vector<double> x(16, 0.0);
  auto rep = cg_solve(a, b, x, {});
  ASSERT_TRUE(rep.converged);
  Eigen::VectorXd oracle = dense(a).llt().solve(ev(b));
  EXPECT_LT(testutil::rel_l2(x, oracle), 1e-8);
}

TEST(CgSolve, IndefiniteIsFlagged) {
  auto a = assemble(2, {{0, 0, 1.0}, {1, 1, -1.0}});
  std::vector<double> b{1.0, 1.0}, x(2, 0.0);
  auto rep = cg_solve(a, b, x, {});
  EXPECT_FALSE(rep.converged);
  EXPECT_TRUE(rep.breakdown);
}

TEST(CgSolve, EnergyErrorDecreases) {
  std::mt19937 rng(5);
  auto a = testutil::random_spd(40, 0.15, rng);
  auto b = testutil::random_vector(40, rng);
  Eigen::MatrixXd ad = dense(a);
  Eigen::VectorXd exact = ad.llt().solve(ev(b));
  std::vector<double> energies;
  auto monitor = [&](int, std::span<const double> x) {
    Eigen::VectorXd e = Eigen::Map<const Eigen::VectorXd>(x.data(), Eigen::Index(x.size())) - exact;
    energies.push_back(e.dot(ad * e));
  };
  std::vector<double> x(40, 0.0);
  SolverConfig cfg;
  cfg.rel_tolerance = 1e-12;
  cg_solve(a, b, x, cfg, monitor);
  ASSERT_GT(energies.size(), 3u);
  double e0 = exact.dot(ad * exact);
  EXPECT_LE(energies[0], e0 * (1 + 1e-12));
  for (std::size_t i = 1; i < energies.size(); ++i) EXPECT_LE(energies[i], energies[i - 1] * (1 + 1e-9) + 1e-28);
}

TEST(CgSolve, ReportsNonConvergence) {
  auto a = testutil::poisson_1d(200);
  std::vector<double> b(200, 1.0), x(200, 0.0);
  SolverConfig cfg;
  cfg.max_iterations = 3;
  auto rep = cg_solve(a, b, x, cfg);
  EXPECT_FALSE(rep.converged);
  EXPECT_EQ(rep.iterations, 3);
  EXPECT_GT(rep.relative_residual, cfg.rel_tolerance);
}

TEST(SolverConfig, Validation) {
  SolverConfig cfg;
  cfg.rel_tolerance = 0;
  std::vector<double> b{1.0}, x{0.0};
  EXPECT_THROW(cg_solve(identity_matrix(1), b, x, cfg), Error);
  cfg.rel_tolerance = 1e-8;
  cfg.max_iterations = 0;
  EXPECT_THROW(cg_solve(identity_matrix(1), b, x, cfg), Error);
}

TEST(Solve, PreconditionersAgree) {
  std::mt19937 rng(17);
  for (int trial = 0; trial < 5; ++trial) {
    auto a = testutil::random_spd(150, 0.04, rng);
    auto b = testutil::random_vector(150, rng);
    Eigen::VectorXd oracle = dense(a).llt().solve(ev(b));
    std::vector<std::vector<double>> sols;
    for (auto p : {Preconditioner::none, Preconditioner::jacobi, Preconditioner::amg}) {
      SolverConfig cfg;
      cfg.preconditioner = p;
      cfg.amg.max_coarse = 16;
      auto [x, rep] = solve(a, b, cfg);
      EXPECT_TRUE(rep.converged) << preconditioner_name(p);
      EXPECT_LT(testutil::rel_l2(x, oracle), 1e-6);
      sols.push_back(x);
    }
    for (std::size_t s = 1; s < sols.size(); ++s) EXPECT_LT(testutil::rel_l2(sols[s], ev(sols[0])), 10 * SolverConfig{}.rel_tolerance);
  }
}

TEST(Solve, SingularNeumannWithCompatibleRhs) {
  auto a = testutil::neumann_1d(50);
  std::mt19937 rng(8);
  auto b = testutil::random_vector(50, rng);
  double mean = 0;
  for (double v : b) mean += v;
  mean /= 50;
  for (auto& v : b) v -= mean;
  for (auto p : {Preconditioner::none, Preconditioner::jacobi, Preconditioner::amg}) {
    SolverConfig cfg;
    cfg.preconditioner = p;
    cfg.project_constant_nullspace = true;
    cfg.amg.max_coarse = 8;
    auto [x, rep] = solve(a, b, cfg);
    EXPECT_TRUE(rep.converged) << preconditioner_name(p);
    EXPECT_TRUE(rep.nullspace_projected);
    auto ax = matvec(a, x);
    double err = 0, bn = 0;
    for (std::size_t i = 0; i < 50; ++i) {
      err += (ax[i] - b[i]) * (ax[i] - b[i]);
      bn += b[i] * b[i];
    }
    EXPECT_LT(std::sqrt(err / bn), 1e-7);
  }
}
