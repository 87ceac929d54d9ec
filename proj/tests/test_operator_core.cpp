#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "test_support.hpp"

using namespace bregman;
using testing_support::random_vector;

namespace {

void expect_adjoint_consistent(const LinearOperator& op, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  for (int t = 0; t < 100; ++t) {
    const Vector x = random_vector(rng, op.cols());
    const Vector z = random_vector(rng, op.rows());
    const double lhs = z.dot(op.apply(x));
    const double rhs = op.adjoint(z).dot(x);
    EXPECT_LE(std::abs(lhs - rhs), 1e-10 * (1.0 + std::abs(lhs)));
  }
}

}  // namespace

TEST(OperatorApply, DifferenceOperatorSmall) {
  DifferenceOperator d(3);
  const Vector out = d.apply(Vector{{1.0, 2.0, 4.0}});
  ASSERT_EQ(out.size(), 2);
  EXPECT_EQ(out[0], 1.0);
  EXPECT_EQ(out[1], 2.0);
}

TEST(OperatorApply, IdentityDense) {
  const Vector x{{5.0, -1.0, 2.0}};
  EXPECT_EQ(DenseOperator::identity(3).apply(x), x);
}

TEST(OperatorApply, DenseMatchesLoop) {
  RowMajorMatrix m(2, 2);
  m << 1, 2, 3, 4;
  DenseOperator op(m);
  const Vector x{{1.0, 1.0}};
  const Vector y = op.apply(x);
  for (int i = 0; i < 2; ++i) {
    double s = 0.0;
    for (int j = 0; j < 2; ++j) s += m(i, j) * x[j];
    EXPECT_EQ(y[i], s);
  }
  EXPECT_EQ(y[0], 3.0);
  EXPECT_EQ(y[1], 7.0);
}

TEST(OperatorApply, DimensionMismatchNamesSizes) {
  DifferenceOperator d(4);
  try {
    d.apply(Vector::Zero(3));
    FAIL() << "expected DimensionError";
  } catch (const DimensionError& e) {
    EXPECT_EQ(e.expected(), 4u);
    EXPECT_EQ(e.actual(), 3u);
  }
  EXPECT_THROW(d.adjoint(Vector::Zero(4)), DimensionError);
}

TEST(OperatorApply, DifferenceRejectsTinyN) {
  EXPECT_THROW(DifferenceOperator(1), ConfigError);
}

TEST(OperatorAdjoint, RandomPairs) {
  std::mt19937_64 rng(3);
  expect_adjoint_consistent(DifferenceOperator(2), 1);
  expect_adjoint_consistent(DifferenceOperator(57), 2);
  expect_adjoint_consistent(DenseOperator(testing_support::random_matrix(rng, 6, 9)), 3);
}

TEST(OperatorAdjoint, Linearity) {
  std::mt19937_64 rng(5);
  DifferenceOperator d(20);
  const Vector x = random_vector(rng, 20), y = random_vector(rng, 20);
  const Vector lhs = d.apply(2.5 * x - 0.75 * y);
  const Vector rhs = 2.5 * d.apply(x) - 0.75 * d.apply(y);
  EXPECT_LE((lhs - rhs).lpNorm<Eigen::Infinity>(), 1e-14);
}

TEST(OperatorAdjoint, DifferenceMatchesMaterialized) {
  const Eigen::Index n = 6;
  DifferenceOperator d(n);
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n - 1, n);
  for (Eigen::Index i = 0; i < n - 1; ++i) {
    m(i, i) = -1.0;
    m(i, i + 1) = 1.0;
  }
  std::mt19937_64 rng(9);
  const Vector z = random_vector(rng, n - 1);
  EXPECT_LE((d.adjoint(z) - m.transpose() * z).lpNorm<Eigen::Infinity>(), 1e-15);
}

TEST(Norm12, DifferenceIsSqrtTwo) {
  for (Eigen::Index n : {3, 10, 500, 10000}) {
    EXPECT_EQ(norm_1_2(DifferenceOperator(n)), std::sqrt(2.0)) << "n = " << n;
  }
}

TEST(Norm12, DifferenceWithTwoColumns) {
  // A = [-1 1] has no interior column, so both column norms are 1.
  EXPECT_EQ(norm_1_2(DifferenceOperator(2)), 1.0);
}

TEST(Norm12, DenseExamples) {
  EXPECT_EQ(norm_1_2(DenseOperator::identity(3)), 1.0);
  RowMajorMatrix m(2, 2);
  m << 1, 0, 0, 2;
  EXPECT_EQ(norm_1_2(DenseOperator(m)), 2.0);
}

TEST(NormSpectral, Difference) {
  const auto est = norm_spectral(DifferenceOperator(10000), 1e-6, 1000000);
  EXPECT_GT(est.estimate, 1.9999);
  EXPECT_LE(est.estimate, 2.0);
}

TEST(NormSpectral, IdentityAndDiagonal) {
  EXPECT_NEAR(norm_spectral(DenseOperator::identity(5), 1e-10, 1000).estimate, 1.0, 1e-10);
  RowMajorMatrix m(2, 2);
  m << 3, 0, 0, 1;
  const DenseOperator op(m);
  const double est = norm_spectral(op, 1e-12, 10000).estimate;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
  EXPECT_NEAR(est, svd.singularValues()[0], 1e-10);
  EXPECT_NEAR(est, 3.0, 1e-10);
}

TEST(NormSpectral, BoundHoldsOnRandomVectors) {
  std::mt19937_64 rng(11);
  const DenseOperator op(testing_support::random_matrix(rng, 15, 30));
  const auto est = norm_spectral(op, 1e-8, 100000);
  EXPECT_DOUBLE_EQ(est.bound, est.estimate * (1.0 + 1e-8));
  for (int t = 0; t < 200; ++t) {
    const Vector x = random_vector(rng, 30);
    EXPECT_LE(op.apply(x).norm(), est.bound * x.norm());
  }
}

TEST(NormSpectral, NonConvergenceCarriesEstimate) {
  std::mt19937_64 rng(13);
  const DenseOperator op(testing_support::random_matrix(rng, 40, 40));
  try {
    norm_spectral(op, 1e-15, 2);
    FAIL() << "expected ConvergenceError";
  } catch (const ConvergenceError& e) {
    EXPECT_GT(e.best_estimate(), 0.0);
  }
}

TEST(LipschitzL1, Examples) {
  EXPECT_EQ(lipschitz_l1(DenseOperator::identity(2)), 1.0);
  RowMajorMatrix a(2, 2);
  a << 2, 0, 0, 1;
  EXPECT_EQ(lipschitz_l1(DenseOperator(a)), 4.0);
  RowMajorMatrix b(1, 2);
  b << 1, 1;
  EXPECT_EQ(lipschitz_l1(DenseOperator(b)), 1.0);
}

TEST(LipschitzL1, MatchesFullGram) {
  std::mt19937_64 rng(17);
  const RowMajorMatrix c = testing_support::random_matrix(rng, 7, 600);
  const Eigen::MatrixXd gram = c.transpose() * c;
  EXPECT_NEAR(lipschitz_l1(DenseOperator(c)), gram.cwiseAbs().maxCoeff(), 1e-10);
}
