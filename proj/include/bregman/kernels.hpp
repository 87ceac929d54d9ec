#pragma once

#include <cmath>
#include <memory>
#include <string>
#include <string_view>

#include "bregman/errors.hpp"
#include "bregman/linear_operator.hpp"

namespace bregman {

/**
 * Convex kernel phi generating the Bregman distance
 *   d(x, y) = phi(x) - phi(y) - <grad phi(y), x - y>,
 * defined on dom(phi) x int(dom(phi)). Every kernel is 1-strongly convex with
 * respect to the norm reported by strong_convexity_norm().
 */
class BregmanKernel {
 public:
  virtual ~BregmanKernel() = default;

  virtual std::string_view name() const = 0;
  virtual NormTag strong_convexity_norm() const = 0;

  virtual double value(const Vector& x) const = 0;
  virtual Vector gradient(const Vector& x) const = 0;

  /// Index of the first coordinate outside dom(phi), or -1.
  virtual Eigen::Index domain_violation(const Vector& x) const = 0;
  /// Index of the first coordinate outside int(dom(phi)), or -1.
  virtual Eigen::Index interior_violation(const Vector& x) const = 0;

  bool domain_contains(const Vector& x) const { return domain_violation(x) < 0; }
  bool interior_contains(const Vector& x) const { return interior_violation(x) < 0; }

  /// Distance without domain checks. Overrides use a cancellation-free form.
  virtual double unchecked_distance(const Vector& x, const Vector& y) const {
    return value(x) - value(y) - gradient(y).dot(x - y);
  }
};

/// phi(x) = (1/2)||x||^2; d(x, y) = (1/2)||x - y||^2.
class SquaredEuclideanKernel final : public BregmanKernel {
 public:
  std::string_view name() const override { return "squared-euclidean"; }
  NormTag strong_convexity_norm() const override { return NormTag::Euclidean; }

  double value(const Vector& x) const override { return 0.5 * x.squaredNorm(); }
  Vector gradient(const Vector& x) const override { return x; }

  Eigen::Index domain_violation(const Vector& x) const override { return first_nonfinite(x); }
  Eigen::Index interior_violation(const Vector& x) const override { return first_nonfinite(x); }

  double unchecked_distance(const Vector& x, const Vector& y) const override {
    return 0.5 * (x - y).squaredNorm();
  }

 private:
  static Eigen::Index first_nonfinite(const Vector& x) {
    for (Eigen::Index i = 0; i < x.size(); ++i) {
      if (!std::isfinite(x[i])) return i;
    }
    return -1;
  }
};

/**
 * phi(x) = sum_i x_i log x_i (negative entropy), dom = R^n_+.
 * d(x, y) = sum_i (x_i log(x_i / y_i) - x_i + y_i), with 0 log 0 = 0.
 * 1-strongly convex w.r.t. the l1 norm on the simplex (Pinsker).
 */
class RelativeEntropyKernel final : public BregmanKernel {
 public:
  /// Coordinates at or below this value are treated as exact zeros (x log x = 0).
  static constexpr double kPositivityFloor = 1e-300;

  std::string_view name() const override { return "relative-entropy"; }
  NormTag strong_convexity_norm() const override { return NormTag::L1; }

  double value(const Vector& x) const override {
    double s = 0.0;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
      if (x[i] > kPositivityFloor) s += x[i] * std::log(x[i]);
    }
    return s;
  }

  Vector gradient(const Vector& x) const override {
    return x.array().log().matrix() + Vector::Ones(x.size());
  }

  Eigen::Index domain_violation(const Vector& x) const override {
    for (Eigen::Index i = 0; i < x.size(); ++i) {
      if (!(x[i] >= 0.0) || !std::isfinite(x[i])) return i;
    }
    return -1;
  }

  Eigen::Index interior_violation(const Vector& x) const override {
    for (Eigen::Index i = 0; i < x.size(); ++i) {
      if (!(x[i] > 0.0) || !std::isfinite(x[i])) return i;
    }
    return -1;
  }

  double unchecked_distance(const Vector& x, const Vector& y) const override {
    double s = 0.0;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
      if (x[i] <= kPositivityFloor) {
        s += y[i];
        continue;
      }
      const double u = (x[i] - y[i]) / y[i];
      if (std::abs(u) < 0.5) {
        // y (r log r - r + 1) with r = 1 + u; avoids cancellation near x = y.
        s += y[i] * ((1.0 + u) * std::log1p(u) - u);
      } else {
        s += x[i] * std::log(x[i] / y[i]) - x[i] + y[i];
      }
    }
    return s;
  }
};

/// Checked Bregman distance: x must lie in dom(phi), y in int(dom(phi)).
inline double distance(const BregmanKernel& kernel, const Vector& x, const Vector& y) {
  if (x.size() != y.size()) {
    throw DimensionError("distance", static_cast<std::size_t>(y.size()),
                         static_cast<std::size_t>(x.size()));
  }
  if (const auto i = kernel.domain_violation(x); i >= 0) {
    throw DomainError("x", static_cast<std::size_t>(i), x[i],
                      std::string("outside dom of ") + std::string(kernel.name()));
  }
  if (const auto i = kernel.interior_violation(y); i >= 0) {
    throw DomainError("y", static_cast<std::size_t>(i), y[i],
                      std::string("outside interior of dom of ") + std::string(kernel.name()));
  }
  return kernel.unchecked_distance(x, y);
}

inline std::shared_ptr<const BregmanKernel> euclidean_kernel() {
  return std::make_shared<const SquaredEuclideanKernel>();
}

inline std::shared_ptr<const BregmanKernel> entropy_kernel() {
  return std::make_shared<const RelativeEntropyKernel>();
}

}  // namespace bregman
