#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <memory>
#include <random>

#include "bregman/errors.hpp"

namespace bregman {

using Vector = Eigen::VectorXd;
using RowMajorMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Norm with respect to which a kernel is 1-strongly convex.
enum class NormTag { Euclidean, L1 };

/**
 * Matrix-free linear map A : R^cols -> R^rows.
 *
 * Implementations provide the raw products; the public entry points check
 * dimensions. Instances are immutable after construction and may be shared
 * across threads.
 */
class LinearOperator {
 public:
  virtual ~LinearOperator() = default;

  virtual Eigen::Index rows() const = 0;
  virtual Eigen::Index cols() const = 0;

  Vector apply(const Vector& x) const {
    check_length("LinearOperator::apply", cols(), x.size());
    Vector y(rows());
    apply_into(x, y);
    return y;
  }

  Vector adjoint(const Vector& z) const {
    check_length("LinearOperator::adjoint", rows(), z.size());
    Vector y(cols());
    adjoint_into(z, y);
    return y;
  }

 protected:
  // out is pre-sized; in has been length-checked.
  virtual void apply_into(const Vector& in, Vector& out) const = 0;
  virtual void adjoint_into(const Vector& in, Vector& out) const = 0;

  static void check_length(const char* context, Eigen::Index expected, Eigen::Index actual) {
    if (expected != actual) {
      throw DimensionError(context, static_cast<std::size_t>(expected),
                           static_cast<std::size_t>(actual));
    }
  }
};

/// Explicit matrix stored row-major.
class DenseOperator final : public LinearOperator {
 public:
  explicit DenseOperator(RowMajorMatrix entries) : entries_(std::move(entries)) {
    if (entries_.rows() < 1 || entries_.cols() < 1) {
      throw ConfigError("DenseOperator: matrix must be non-empty");
    }
  }

  static DenseOperator identity(Eigen::Index n) {
    return DenseOperator(RowMajorMatrix::Identity(n, n));
  }

  Eigen::Index rows() const override { return entries_.rows(); }
  Eigen::Index cols() const override { return entries_.cols(); }
  const RowMajorMatrix& entries() const noexcept { return entries_; }

 protected:
  void apply_into(const Vector& in, Vector& out) const override { out.noalias() = entries_ * in; }
  void adjoint_into(const Vector& in, Vector& out) const override {
    out.noalias() = entries_.transpose() * in;
  }

 private:
  RowMajorMatrix entries_;
};

/// Forward difference (Ax)_i = x_{i+1} - x_i, shape (n-1) x n. Never materialized.
class DifferenceOperator final : public LinearOperator {
 public:
  explicit DifferenceOperator(Eigen::Index n) : n_(n) {
    if (n < 2) throw ConfigError("DifferenceOperator: n must be at least 2");
  }

  Eigen::Index rows() const override { return n_ - 1; }
  Eigen::Index cols() const override { return n_; }

  /// ||A||_2 = 2 cos(pi / (2n)) < 2.
  static constexpr double spectral_norm_upper_bound() noexcept { return 2.0; }

 protected:
  void apply_into(const Vector& in, Vector& out) const override {
    out = in.tail(n_ - 1) - in.head(n_ - 1);
  }
  void adjoint_into(const Vector& in, Vector& out) const override {
    const Eigen::Index m = n_ - 1;
    out[0] = -in[0];
    out.segment(1, m - 1) = in.head(m - 1) - in.tail(m - 1);
    out[n_ - 1] = in[m - 1];
  }

 private:
  Eigen::Index n_;
};

/// ||A||_{1,2} = sup ||Av|| / ||v||_1 = largest Euclidean column norm.
inline double norm_1_2(const LinearOperator& op) {
  Vector e = Vector::Zero(op.cols());
  double best_sq = 0.0;
  for (Eigen::Index j = 0; j < op.cols(); ++j) {
    e[j] = 1.0;
    best_sq = std::max(best_sq, op.apply(e).squaredNorm());
    e[j] = 0.0;
  }
  return std::sqrt(best_sq);
}

struct SpectralNormEstimate {
  double estimate = 0.0;  // power-iteration value, a lower bound on ||A||_2
  double bound = 0.0;     // (1 + tol) * estimate, the value stepsize rules should use
  int iterations = 0;
};

/**
 * Power iteration on A^T A for the spectral norm.
 *
 * The start vector is drawn from a fixed-seed generator so repeated calls are
 * reproducible. Stops when successive estimates agree to relative tolerance
 * `tol`; throws ConvergenceError (carrying the last estimate) otherwise.
 */
inline SpectralNormEstimate norm_spectral(const LinearOperator& op, double tol, int max_iters) {
  if (!(tol > 0.0)) throw ConfigError("norm_spectral: tol must be positive");
  std::mt19937_64 gen(0x5eedULL);
  std::uniform_real_distribution<double> unif(0.5, 1.5);
  Vector v(op.cols());
  for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = unif(gen) * ((i % 2 == 0) ? 1.0 : -1.0);
  v.normalize();

  double previous = 0.0;
  for (int it = 1; it <= max_iters; ++it) {
    const Vector av = op.apply(v);
    const double estimate = av.norm();
    if (estimate == 0.0) return {0.0, 0.0, it};
    if (it > 1 && std::abs(estimate - previous) <= tol * estimate) {
      return {estimate, (1.0 + tol) * estimate, it};
    }
    previous = estimate;
    v = op.adjoint(av);
    v.normalize();
  }
  throw ConvergenceError("norm_spectral: no convergence after " + std::to_string(max_iters) +
                             " iterations",
                         previous);
}

/// L1 = max_{i,j} |(C^T C)_{ij}|, the l1-norm smoothness constant of (1/2)||Cx - b||^2.
inline double lipschitz_l1(const DenseOperator& c) {
  // Column blocks of C^T C, so paper-scale n never materializes an n x n Gram matrix.
  const Eigen::MatrixXd cm = c.entries();
  constexpr Eigen::Index kBlock = 256;
  double best = 0.0;
  for (Eigen::Index j0 = 0; j0 < cm.cols(); j0 += kBlock) {
    const Eigen::Index width = std::min(kBlock, cm.cols() - j0);
    const Eigen::MatrixXd block = cm.transpose() * cm.middleCols(j0, width);
    best = std::max(best, block.cwiseAbs().maxCoeff());
  }
  return best;
}

}  // namespace bregman
