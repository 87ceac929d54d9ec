#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

#include "test_support.hpp"

using namespace bregman;
using testing_support::random_simplex;
using testing_support::random_vector;

namespace {

PrimalDualDistance euclid_distance(PdDistanceKind kind, double sigma, double tau,
                                   std::shared_ptr<const LinearOperator> A,
                                   std::optional<SmoothTerm> h = std::nullopt) {
  return {kind, sigma, tau, euclidean_kernel(), euclidean_kernel(), std::move(h), std::move(A)};
}

}  // namespace

TEST(Lagrangian, SaddleAgainstItself) {
  const auto qp = testing_support::small_qp();
  const double gap = lagrangian(qp.problem, qp.x_star, qp.z_star) -
                     lagrangian(qp.problem, qp.x_star, qp.z_star);
  EXPECT_EQ(gap, 0.0);
  std::mt19937_64 rng(1);
  for (int t = 0; t < 50; ++t) {
    const Vector x = random_vector(rng, 4), z = random_vector(rng, 3);
    EXPECT_GE(lagrangian(qp.problem, x, qp.z_star) - lagrangian(qp.problem, qp.x_star, z), -1e-12);
  }
}

TEST(Lagrangian, IdentityOperatorExample) {
  const Eigen::Index n = 3;
  auto I = std::make_shared<const DenseOperator>(DenseOperator::identity(n));
  LagrangianSpec spec{[](const Vector&) { return 0.0; },
                      [](const Vector& x) { return 0.5 * x.squaredNorm(); },
                      [](const Vector&) { return 0.0; }, I};
  std::mt19937_64 rng(2);
  for (int t = 0; t < 10; ++t) {
    const Vector x = random_vector(rng, n), z = random_vector(rng, n);
    EXPECT_NEAR(lagrangian(spec, x, z), 0.5 * x.squaredNorm() + z.dot(x), 1e-14);
    EXPECT_EQ(lagrangian(spec, Vector::Zero(n), z), 0.0);
  }
}

TEST(Lagrangian, DomainConventions) {
  const auto data = testing_support::tv_data(3, 5, 1);
  const auto p = make_problem(data, entropy_kernel());
  const Vector inside = Vector::Constant(5, 0.2);
  EXPECT_EQ(lagrangian(p, Vector::Constant(5, 0.3), Vector::Zero(4)), kInfinity);
  EXPECT_EQ(lagrangian(p, inside, Vector::Constant(4, 1.0)), -kInfinity);
  EXPECT_TRUE(std::isfinite(lagrangian(p, inside, Vector::Constant(4, 0.05))));
}

TEST(PdDistance, ZeroAtCoincidentPoints) {
  std::mt19937_64 rng(3);
  auto A = std::make_shared<const DenseOperator>(testing_support::random_matrix(rng, 3, 5));
  auto C = std::make_shared<const DenseOperator>(testing_support::random_matrix(rng, 2, 5));
  const auto h = least_squares(C, random_vector(rng, 2), 1.0);
  const Vector x = random_simplex(rng, 5), z = random_vector(rng, 3);
  for (auto kind : {PdDistanceKind::DPlus, PdDistanceKind::DMinus, PdDistanceKind::DPcv,
                    PdDistanceKind::DDcv, PdDistanceKind::DPd3o}) {
    PrimalDualDistance d{kind, 0.3, 0.2, entropy_kernel(), euclidean_kernel(), h, A};
    EXPECT_NEAR(pd_distance(d, x, z, x, z), 0.0, 1e-14);
  }
}

TEST(PdDistance, MinusWithZeroOperator) {
  std::mt19937_64 rng(4);
  auto A = std::make_shared<const DenseOperator>(RowMajorMatrix::Zero(3, 4));
  const auto d = euclid_distance(PdDistanceKind::DMinus, 0.5, 2.0, A);
  const Vector x = random_vector(rng, 4), xp = random_vector(rng, 4);
  const Vector z = random_vector(rng, 3), zp = random_vector(rng, 3);
  const double expected = 0.5 * (x - xp).squaredNorm() / 2.0 + 0.5 * (z - zp).squaredNorm() / 0.5;
  EXPECT_NEAR(pd_distance(d, x, z, xp, zp), expected, 1e-13);
}

TEST(PdDistance, NonnegativeUnderConditions) {
  std::mt19937_64 rng(5);
  const RowMajorMatrix a = testing_support::random_matrix(rng, 4, 6);
  auto A = std::make_shared<const DenseOperator>(a);
  auto C = std::make_shared<const DenseOperator>(testing_support::random_matrix(rng, 3, 6));
  const double norm = norm_spectral(*A, 1e-12, 100000).bound;
  const double L = squared_spectral_norm(*C);
  const auto h = least_squares(C, random_vector(rng, 3), L);
  const double tau = 0.5 / L, sigma = 0.5 / (tau * norm * norm);  // sigma tau ||A||^2 + tau L = 1
  for (auto kind : {PdDistanceKind::DPlus, PdDistanceKind::DMinus, PdDistanceKind::DPcv,
                    PdDistanceKind::DDcv, PdDistanceKind::DPd3o}) {
    const auto d = euclid_distance(kind, sigma, tau, A, h);
    for (int t = 0; t < 1000; ++t) {
      const Vector x = random_vector(rng, 6), xp = random_vector(rng, 6);
      const Vector z = random_vector(rng, 4), zp = random_vector(rng, 4);
      EXPECT_GE(pd_distance(d, x, z, xp, zp), -1e-10);
    }
  }
}

TEST(PdDistance, Pd3oHalfSquaredNormIdentity) {
  std::mt19937_64 rng(6);
  const RowMajorMatrix a = testing_support::random_matrix(rng, 4, 7);
  auto A = std::make_shared<const DenseOperator>(a);
  const double norm = norm_spectral(*A, 1e-12, 100000).bound;
  for (double product : {0.5, 1.0}) {
    const double tau = 0.7, sigma = product / (tau * norm * norm);
    const auto d = euclid_distance(PdDistanceKind::DPd3o, sigma, tau, A);
    for (int t = 0; t < 1000; ++t) {
      const Vector x = random_vector(rng, 7), xp = random_vector(rng, 7);
      const Vector y = random_vector(rng, 7), yp = random_vector(rng, 7);
      const Vector z = random_vector(rng, 4), zp = random_vector(rng, 4);
      const double value = pd3o_distance(d, x, y, z, xp, yp, zp);
      const Vector atdz = a.transpose() * (z - zp);
      const Vector v = (x - xp) / std::sqrt(tau) - std::sqrt(tau) * (y - yp) - std::sqrt(tau) * atdz;
      const double slack = 0.5 * ((z - zp).squaredNorm() / sigma - tau * atdz.squaredNorm());
      EXPECT_GE(value, -1e-10);
      EXPECT_GE(slack, -1e-10);
      EXPECT_NEAR(value, 0.5 * v.squaredNorm() + slack, 1e-10 * (1.0 + value));
    }
  }
}

TEST(PdDistance, Pd3oEqualsHalfSquaredNormWhenTight) {
  // A = c Q with Q orthogonal and sigma tau c^2 = 1 makes (1/sigma)||dz||^2 = tau ||A^T dz||^2.
  std::mt19937_64 rng(7);
  const Eigen::Index n = 5;
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(testing_support::random_matrix(rng, n, n));
  const double c = 1.7;
  const RowMajorMatrix a = c * Eigen::MatrixXd(qr.householderQ());
  auto A = std::make_shared<const DenseOperator>(a);
  const double tau = 0.4, sigma = 1.0 / (tau * c * c);
  const auto d = euclid_distance(PdDistanceKind::DPd3o, sigma, tau, A);
  for (int t = 0; t < 1000; ++t) {
    const Vector x = random_vector(rng, n), xp = random_vector(rng, n);
    const Vector y = random_vector(rng, n), yp = random_vector(rng, n);
    const Vector z = random_vector(rng, n), zp = random_vector(rng, n);
    const Vector v = (x - xp) / std::sqrt(tau) - std::sqrt(tau) * (y - yp) -
                     std::sqrt(tau) * (a.transpose() * (z - zp));
    EXPECT_NEAR(pd3o_distance(d, x, y, z, xp, yp, zp), 0.5 * v.squaredNorm(), 1e-10);
  }
}

TEST(MeritL1, Examples) {
  RowMajorMatrix a(2, 2);
  a << 1, 2, -1, 1;
  auto A = std::make_shared<const DenseOperator>(a);
  MeritL1Inequality m{2.0, 3.0, A, Vector{{1.0, 0.5}}};
  EXPECT_EQ(merit_l1(m, Vector::Zero(2), Vector::Zero(2)), 0.0);
  const Vector feasible{{0.2, 0.1}};  // Ax = (0.4, -0.1) <= b
  EXPECT_NEAR(merit_l1(m, feasible, Vector::Zero(2)), feasible.lpNorm<1>(), 1e-15);
  EXPECT_THROW(merit_l1(m, feasible, Vector{{-0.1, 0.0}}), DomainError);
}

TEST(MeritL1, VanishesAtInteriorOptimum) {
  // minimize |x| s.t. -x <= -1: vertex enumeration gives x* = 1, z* = 1 (|A^T z*| = 1).
  auto A = std::make_shared<const DenseOperator>(RowMajorMatrix::Constant(1, 1, -1.0));
  const Vector b = Vector::Constant(1, -1.0);
  double best = kInfinity, arg = 0.0;
  for (int i = -3000; i <= 3000; ++i) {
    const double x = i * 1e-3;
    if (-x <= -1.0 && std::abs(x) < best) best = std::abs(x), arg = x;
  }
  ASSERT_EQ(arg, 1.0);
  for (double kappa : {1.5, 4.0}) {
    for (double lam : {1.5, 4.0}) {
      MeritL1Inequality m{kappa, lam, A, b};
      EXPECT_NEAR(merit_l1(m, Vector::Constant(1, 1.0), Vector::Constant(1, 1.0)), 0.0, 1e-15);
      std::mt19937_64 rng(8);
      std::uniform_real_distribution<double> ux(-5, 5), uz(0, 5);
      for (int t = 0; t < 1000; ++t) {
        EXPECT_GE(merit_l1(m, Vector::Constant(1, ux(rng)), Vector::Constant(1, uz(rng))), -1e-10);
      }
    }
  }
}

TEST(MeritEquality, PrimalPartAndOptionalDual) {
  auto A = std::make_shared<const DenseOperator>(DenseOperator::identity(2));
  MeritEqualityPenalty m{2.0, [](const Vector& x) { return 0.5 * x.squaredNorm(); }, A,
                         Vector{{1.0, 0.0}}, {}};
  const Vector x{{1.0, 1.0}}, z{{0.5, -0.5}};
  const auto v = merit_equality(m, x, z);
  EXPECT_NEAR(v.primal_part, 1.0 + 2.0 * 1.0, 1e-15);
  EXPECT_FALSE(v.dual_part.has_value());
  EXPECT_FALSE(v.total().has_value());
  // (1/2)||.||^2 is self-conjugate.
  m.fh_conjugate = [](const Vector& y) { return 0.5 * y.squaredNorm(); };
  const auto w = merit_equality(m, x, z);
  ASSERT_TRUE(w.dual_part.has_value());
  EXPECT_NEAR(*w.dual_part, 0.5 + 0.25, 1e-15);
  // At the solution x* = b, z* = -b the merit vanishes.
  const auto opt = merit_equality(m, Vector{{1.0, 0.0}}, Vector{{-1.0, 0.0}});
  EXPECT_NEAR(*opt.total(), 0.0, 1e-15);
}

TEST(Certificates, CvOneStepOnSmallQp) {
  const auto qp = testing_support::small_qp(11, 3, 5);
  const double tau = 0.5, sigma = 0.5 / (tau * qp.op_norm * qp.op_norm);
  std::mt19937_64 rng(9);
  for (Algorithm alg : {Algorithm::CVPrimal, Algorithm::CVDual}) {
    auto st = initial_state(qp.problem, random_vector(rng, 5), random_vector(rng, 3),
                            StepSizes{sigma, tau});
    for (int k = 0; k < 100; ++k) {
      const auto next = step(alg, qp.problem, st, {sigma, tau}, {});
      for (int t = 0; t < 10; ++t) {
        const double margin = one_step_margin(qp.problem, alg, {sigma, tau}, st, next,
                                              random_vector(rng, 5), random_vector(rng, 3));
        EXPECT_GE(margin, -1e-8);
      }
      st = next;
    }
  }
}

TEST(Certificates, ErgodicBoundSingleStepAndNegativeControl) {
  const auto qp = testing_support::small_qp(12, 3, 5);
  const double tau = 0.5, sigma = 0.5 / (tau * qp.op_norm * qp.op_norm);
  const SaddlePoint saddle{qp.x_star, qp.z_star};
  const Vector x0 = Vector::Ones(5), z0 = Vector::Zero(3);
  SolverConfig cfg{Algorithm::CVPrimal, {sigma, tau}, {}};
  DiagnosticsConfig diag;
  diag.log_every = 1;
  diag.saddle = saddle;
  const auto r = run(qp.problem, cfg, x0, z0, StoppingRule{50}, diag);
  std::vector<ErgodicSample> history;
  for (const auto& rec : r.records) {
    if (rec.k > 0) history.push_back({rec.k, rec.weight_sum, *rec.gap});
  }
  const auto bound = ErgodicBound::from(qp.problem, Algorithm::CVPrimal, {sigma, tau}, 1.0, saddle,
                                        x0, z0);
  EXPECT_TRUE(ergodic_gap_bound_check({history.front()}, bound));
  EXPECT_TRUE(ergodic_gap_bound_check(history, bound));
  auto corrupted = history;
  corrupted[3].gap = 10.0 * bound.value(static_cast<double>(corrupted[3].k), 0.0);
  EXPECT_FALSE(ergodic_gap_bound_check(corrupted, bound));
}

TEST(Kkt, SmallQpSolutionHasZeroResidual) {
  const auto qp = testing_support::small_qp();
  EXPECT_LE(kkt_residual(qp.problem, qp.x_star, qp.z_star).max(), 1e-12);
  EXPECT_GT(kkt_residual(qp.problem, qp.x_star + Vector::Constant(4, 0.1), qp.z_star).max(), 1e-3);
}
