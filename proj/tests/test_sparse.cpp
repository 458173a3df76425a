#include <gtest/gtest.h>

#include <Eigen/Dense>
#include <cmath>
#include <cstdlib>
#include <cstring>
#include <memory>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "sacflow/sparse.hpp"

using namespace sacflow;

namespace {

CsrMatrix dense_to_csr(const Eigen::MatrixXd& M) {
  std::vector<std::vector<int>> rows(M.rows());
  for (int i = 0; i < M.rows(); ++i)
    for (int j = 0; j < M.cols(); ++j)
      if (M(i, j) != 0.0 || i == j) rows[i].push_back(j);
  CsrMatrix A(std::make_shared<SparsityPattern>(SparsityPattern::from_rows(rows)));
  for (int i = 0; i < M.rows(); ++i)
    for (int j = 0; j < M.cols(); ++j)
      if (M(i, j) != 0.0) A.add(i, j, M(i, j));
  return A;
}

Eigen::MatrixXd random_sparse(int n, double fill, unsigned seed, bool spd) {
  std::mt19937 gen(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0), p(0.0, 1.0);
  Eigen::MatrixXd M = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (p(gen) < fill) M(i, j) = u(gen);
  if (spd) M = M * M.transpose() + Eigen::MatrixXd::Identity(n, n);
  else M += n * fill * Eigen::MatrixXd::Identity(n, n);
  return M;
}

}  // namespace

TEST(Backend, MatchesEnvironment) {
  const char* env = std::getenv("SACFLOW_LU");
  if (env && std::strcmp(env, "eigen") == 0) EXPECT_EQ(lu_backend(), LuBackend::EigenSparseLU);
  if (lu_backend() == LuBackend::Umfpack) EXPECT_TRUE(blas_self_check());
  std::cout << "backend: " << to_string(lu_backend()) << "\n";
}

TEST(Pattern, FromRowsSortsAndDeduplicates) {
  const SparsityPattern p = SparsityPattern::from_rows({{2, 0, 2}, {1}, {1, 0, 2}});
  EXPECT_EQ(p.n, 3u);
  EXPECT_EQ(p.nnz(), 6u);
  EXPECT_EQ(p.cols[0], 0);
  EXPECT_EQ(p.cols[1], 2);
}

TEST(Csr, FindMultiplyAndIdentityRow) {
  Eigen::MatrixXd M(3, 3);
  M << 2, 0, 1, 0, 3, 0, 4, 0, 5;
  CsrMatrix A = dense_to_csr(M);
  EXPECT_THROW(A.find(0, 1), std::out_of_range);
  EXPECT_EQ(A.at(2, 0), 4.0);
  EXPECT_EQ(A.at(0, 1), 0.0);
  std::vector<double> x{1, 2, 3}, y(3);
  A.multiply(x, y);
  EXPECT_EQ(y[0], 5.0);
  EXPECT_EQ(y[1], 6.0);
  EXPECT_EQ(y[2], 19.0);
  EXPECT_EQ(A.max_abs(), 5.0);
  A.set_identity_row(2);
  EXPECT_EQ(A.at(2, 0), 0.0);
  EXPECT_EQ(A.at(2, 2), 1.0);
}

TEST(Solve, IdentityReturnsRhs) {
  const CsrMatrix A = dense_to_csr(Eigen::MatrixXd::Identity(7, 7));
  const std::vector<double> b{1, -2, 3, 0.5, 9, 1e-3, 4};
  SolveReport r;
  const auto x = factor_solve(A, b, &r);
  for (int i = 0; i < 7; ++i) EXPECT_DOUBLE_EQ(x[i], b[i]);
  EXPECT_LT(r.relative_residual, 1e-15);
}

TEST(Solve, ZeroPivotIsSingular) {
  Eigen::MatrixXd M(2, 2);
  M << 0, 0, 0, 1;
  const CsrMatrix A = dense_to_csr(M);
  const std::vector<double> b{1, 1};
  try {
    factor_solve(A, b);
    FAIL() << "expected NumericallySingular";
  } catch (const NumericallySingular& e) {
    EXPECT_LE(std::abs(e.pivot()), 1e-14);
  }
}

TEST(Solve, NearZeroPivotIsSingular) {
  Eigen::MatrixXd M(2, 2);
  M << 1, 1, 1, 1 + 1e-16;
  EXPECT_THROW(factor_solve(dense_to_csr(M), std::vector<double>{1, 2}), NumericallySingular);
}

TEST(Solve, RandomSpdAgainstDenseLu) {
  const Eigen::MatrixXd M = random_sparse(50, 0.1, 42, true);
  Eigen::VectorXd b = Eigen::VectorXd::LinSpaced(50, -1.0, 2.0);
  const Eigen::VectorXd ref = M.partialPivLu().solve(b);
  SolveReport r;
  const auto x = factor_solve(dense_to_csr(M), std::vector<double>(b.data(), b.data() + 50), &r);
  EXPECT_LT(r.relative_residual, 1e-10);
  for (int i = 0; i < 50; ++i) EXPECT_NEAR(x[i], ref[i], 1e-10 * (1 + std::abs(ref[i])));
}

TEST(Solve, UnsymmetricAndRefactorSamePattern) {
  const Eigen::MatrixXd M = random_sparse(300, 0.02, 5, false);
  CsrMatrix A = dense_to_csr(M);
  LuSolver lu;
  std::vector<double> b(300, 1.0), x(300);
  lu.factor(A);
  EXPECT_LT(lu.solve(b, x).relative_residual, 1e-12);
  const Eigen::VectorXd ref1 = M.partialPivLu().solve(Eigen::VectorXd::Ones(300));
  for (int i = 0; i < 300; ++i) EXPECT_NEAR(x[i], ref1[i], 1e-10);

  // new values, same pattern object
  for (auto& v : A.values()) v *= 2.0;
  lu.factor(A);
  lu.solve(b, x);
  for (int i = 0; i < 300; ++i) EXPECT_NEAR(x[i], 0.5 * ref1[i], 1e-10);
}

TEST(Solve, BitwiseDeterministic) {
  const CsrMatrix A = dense_to_csr(random_sparse(120, 0.05, 9, false));
  std::vector<double> b(120);
  for (int i = 0; i < 120; ++i) b[i] = std::sin(i);
  const auto x1 = factor_solve(A, b);
  const auto x2 = factor_solve(A, b);
  EXPECT_EQ(std::memcmp(x1.data(), x2.data(), x1.size() * sizeof(double)), 0);
}

TEST(MatrixMarket, CoordinateFormat) {
  Eigen::MatrixXd M(2, 2);
  M << 1, 0, -2, 3;
  std::ostringstream os;
  write_matrix_market(os, dense_to_csr(M));
  std::istringstream is(os.str());
  std::string line;
  std::getline(is, line);
  EXPECT_EQ(line, "%%MatrixMarket matrix coordinate real general");
  while (std::getline(is, line) && line[0] == '%') {
  }
  std::istringstream hdr(line);
  int r, c, nnz;
  hdr >> r >> c >> nnz;
  EXPECT_EQ(r, 2);
  EXPECT_EQ(c, 2);
  EXPECT_EQ(nnz, 3);
}
