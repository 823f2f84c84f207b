#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "apmm/assembly.hpp"
#include "apmm/linsolve.hpp"
#include "dense.hpp"
#include "oracles.hpp"

using namespace apmm;

namespace {

SparseMatrix from_rows(int n, const std::vector<double>& a) { return SparseMatrix::from_dense(n, a); }

double max_abs(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

}  // namespace

TEST(Lu, Identity) {
  const auto f = lu_factorize(SparseMatrix::identity(4));
  const std::vector<double> b{1, 2, 3, 4};
  EXPECT_EQ(lu_solve(f, b), b);
}

TEST(Lu, NeedsPivoting) {
  const auto f = lu_factorize(from_rows(2, {0, 1, 1, 0}));
  const auto x = lu_solve(f, std::vector<double>{2, 3});
  EXPECT_DOUBLE_EQ(x[0], 3.0);
  EXPECT_DOUBLE_EQ(x[1], 2.0);
}

TEST(Lu, Diagonal) {
  const auto x = lu_solve(lu_factorize(from_rows(2, {2, 0, 0, 4})), std::vector<double>{2, 8});
  EXPECT_DOUBLE_EQ(x[0], 1.0);
  EXPECT_DOUBLE_EQ(x[1], 2.0);
}

TEST(Lu, SingularMatrixThrows) {
  try {
    lu_factorize(from_rows(2, {1, 1, 1, 1}));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::SingularPivot);
  }
}

TEST(Lu, DimensionMismatch) {
  const auto f = lu_factorize(SparseMatrix::identity(3));
  try {
    lu_solve(f, std::vector<double>{1, 2});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::DimensionMismatch);
  }
  EXPECT_THROW(lu_solve_transposed(f, std::vector<double>{1}), Error);
}

TEST(Lu, FactorsReproduceMatrix) {
  // || P D A - L U || <= 1e-12 || D A ||
  const int n = 100;
  const auto a = oracle::random_dominant(n, 11, 0.3);
  const auto f = lu_factorize(from_rows(n, a));
  Eigen::MatrixXd L, U;
  dense::unpack(f, L, U);
  const Eigen::MatrixXd pda = dense::scaled_permuted(f, dense::of(from_rows(n, a)));
  const double err = (pda - L * U).cwiseAbs().maxCoeff();
  EXPECT_LE(err, 1e-12 * pda.cwiseAbs().maxCoeff());
}

TEST(Lu, RoundTripAndResidual) {
  std::mt19937 rng(5);
  std::uniform_real_distribution<double> u(-1, 1);
  for (int n : {10, 60, 200, 500}) {
    const auto a = oracle::random_dominant(n, 100 + n, n > 200 ? 0.05 : 0.5);
    const SparseMatrix A = from_rows(n, a);
    std::vector<double> y(n);
    for (double& v : y) v = u(rng);
    const auto b = A.multiply(y);
    const auto x = lu_solve(lu_factorize(A), b);
    double err = 0.0;
    for (int k = 0; k < n; ++k) err = std::max(err, std::abs(x[k] - y[k]));
    EXPECT_LE(err, 1e-8 * max_abs(y)) << "n=" << n;
    // || A x - b || <= 1e-10 (||A|| ||x|| + ||b||), infinity norms
    const auto ax = A.multiply(x);
    double res = 0.0, norm_a = 0.0;
    for (int k = 0; k < n; ++k) {
      res = std::max(res, std::abs(ax[k] - b[k]));
      double row = 0.0;
      for (double v : A.row_vals(k)) row += std::abs(v);
      norm_a = std::max(norm_a, row);
    }
    EXPECT_LE(res, 1e-10 * (norm_a * max_abs(x) + max_abs(b)));
  }
}

TEST(Lu, TransposedSolveMatchesDense) {
  const int n = 40;
  const auto a = oracle::random_dominant(n, 9, 0.4);
  const SparseMatrix A = from_rows(n, a);
  std::vector<double> b(n);
  for (int k = 0; k < n; ++k) b[k] = std::sin(k + 1.0);
  const auto x = lu_solve_transposed(lu_factorize(A), b);
  const Eigen::VectorXd ref = dense::of(A).transpose().fullPivLu().solve(Eigen::Map<Eigen::VectorXd>(b.data(), n));
  for (int k = 0; k < n; ++k) EXPECT_NEAR(x[k], ref(k), 1e-12);
}

TEST(Lu, CountsFactorizations) {
  const long before = lu_factorization_count().load();
  lu_factorize(SparseMatrix::identity(3));
  lu_factorize(SparseMatrix::identity(3));
  EXPECT_EQ(lu_factorization_count().load() - before, 2);
}

TEST(Cond, IdentityIsOne) {
  const auto I = SparseMatrix::identity(20);
  EXPECT_NEAR(estimate_cond2(I, lu_factorize(I)).value, 1.0, 1e-6);
}

TEST(Cond, DiagonalRatio) {
  std::vector<double> a(100, 0.0);
  for (int k = 0; k < 10; ++k) a[k * 10 + k] = k + 1.0;
  const auto A = from_rows(10, a);
  const auto est = estimate_cond2(A, lu_factorize(A));
  EXPECT_TRUE(est.converged);
  EXPECT_NEAR(est.value, 10.0, 1e-3 * 10.0);
}

TEST(Cond, MatchesDenseSvd) {
  std::mt19937 rng(21);
  std::uniform_real_distribution<double> u(-1, 1);
  const int n = 50;
  std::vector<double> a(n * n);
  for (double& v : a) v = u(rng);
  const auto A = from_rows(n, a);
  const double ref = oracle::svd_cond(dense::of(A));
  EXPECT_NEAR(estimate_cond2(A, lu_factorize(A), 1e-8, 200000).value / ref, 1.0, 1e-3);
}

TEST(Cond, MatchesDenseSvdOnSchemeMatrices) {
  PhysConfig p;
  const DiscConfig d{0.1, 0.25, 1e-3, GeometryMode::Strip};
  const Grid g = build_grid(p, d);
  for (double eta : {1e-1, 1e-3, 0.0}) {
    p.eta = eta;
    for (Scheme sc : {Scheme::AP, Scheme::Naive}) {
      if (sc == Scheme::Naive && eta == 0.0) continue;
      const auto s = assemble_matrix(sc, g, p, d);
      ASSERT_LE(s.matrix.rows(), 200);
      const double ref = oracle::svd_cond(dense::of(s.matrix));
      const auto est = estimate_cond2(s.matrix, lu_factorize(s.matrix), 1e-8, 200000);
      EXPECT_NEAR(est.value / ref, 1.0, 1e-3) << to_string(sc) << " eta=" << eta;
    }
  }
}

TEST(Cond, ScaleInvariant) {
  const int n = 30;
  auto a = oracle::random_dominant(n, 4, 0.5);
  const auto A = from_rows(n, a);
  for (double& v : a) v *= 1e6;
  const auto B = from_rows(n, a);
  const double ka = estimate_cond2(A, lu_factorize(A), 1e-8).value;
  const double kb = estimate_cond2(B, lu_factorize(B), 1e-8).value;
  EXPECT_NEAR(ka / kb, 1.0, 1e-6);
}

TEST(Cond, Deterministic) {
  const auto A = from_rows(30, oracle::random_dominant(30, 8, 0.5));
  const auto f = lu_factorize(A);
  EXPECT_EQ(estimate_cond2(A, f).value, estimate_cond2(A, f).value);
}

TEST(Cond, SchemeMatricesNonsingularAcrossEta) {
  PhysConfig p;
  const DiscConfig d{0.025, 0.025, 1e-3, GeometryMode::Strip};
  const Grid g = build_grid(p, d);
  for (double eta : {1.0, 1e-3, 1e-6, 0.0}) {
    p.eta = eta;
    EXPECT_NO_THROW(lu_factorize(assemble_ap_matrix(g, p, d).matrix)) << "eta=" << eta;
    if (eta > 0.0) EXPECT_NO_THROW(lu_factorize(assemble_naive_matrix(g, p, d).matrix)) << "eta=" << eta;
  }
}
