#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "bregman/errors.hpp"
#include "bregman/kernels.hpp"
#include "bregman/linear_operator.hpp"

namespace bregman {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

// Closed-form proximal primitives.

/**
 * Entropy-kernel prox of the indicator of {x | 1^T x = 1}:
 *   x_i = y_i exp(-a_i) / sum_j y_j exp(-a_j).
 * Evaluated in the log domain (shift by the max exponent) so large |a| cannot
 * overflow; the output is strictly positive and sums to one.
 */
inline Vector prox_entropy_simplex(const Vector& y, const Vector& a) {
  if (y.size() != a.size()) {
    throw DimensionError("prox_entropy_simplex", static_cast<std::size_t>(y.size()),
                         static_cast<std::size_t>(a.size()));
  }
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    if (!(y[i] > 0.0)) throw DomainError("y", static_cast<std::size_t>(i), y[i], "must be > 0");
  }
  Vector m = y.array().log().matrix() - a;
  m.array() -= m.maxCoeff();
  Vector x = m.array().exp().matrix();
  const double total = x.sum();  // >= 1: the max term contributes exp(0)
  x /= total;
  // exp underflow of very negative exponents would leave exact zeros.
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    x[i] = std::max(x[i], std::numeric_limits<double>::min());
  }
  return x;
}

/// Entropy-kernel prox of f = 0: x_i = y_i exp(-a_i).
inline Vector prox_entropy_free(const Vector& y, const Vector& a) {
  return (y.array() * (-a.array()).exp()).matrix();
}

/// Euclidean projection onto the probability simplex {x >= 0, 1^T x = 1}.
inline Vector project_simplex(const Vector& v) {
  std::vector<double> sorted(v.data(), v.data() + v.size());
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  double running = 0.0;
  double shift = 0.0;
  for (std::size_t k = 0; k < sorted.size(); ++k) {
    running += sorted[k];
    const double candidate = (running - 1.0) / static_cast<double>(k + 1);
    if (sorted[k] - candidate > 0.0) shift = candidate;
  }
  return (v.array() - shift).max(0.0).matrix();
}

/// Projection onto the box [-lam, lam]^m (Euclidean prox of the l-infinity ball indicator).
inline Vector prox_linf_box(const Vector& z, double lam) {
  return z.cwiseMax(-lam).cwiseMin(lam);
}

/// Euclidean prox of sigma * g^* with g = indicator of {b}, i.e. g^*(z) = <b, z>.
inline Vector prox_affine_conjugate(const Vector& z, const Vector& b, double sigma) {
  if (z.size() != b.size()) {
    throw DimensionError("prox_affine_conjugate", static_cast<std::size_t>(b.size()),
                         static_cast<std::size_t>(z.size()));
  }
  return z - sigma * b;
}

/**
 * A closed convex function together with its Bregman proximal operator for a
 * fixed kernel:
 *   prox(y, a, t) = argmin_x { t f(x) + <a, x> + d(x, y) }.
 * `value` returns +inf outside dom f. `subdiff_distance(x, v)` is the
 * infinity-norm distance from v to the subdifferential of f at x, used by
 * optimality certificates; it may be left empty.
 */
class ProxOperator {
 public:
  using Map = std::function<Vector(const Vector& y, const Vector& a, double t)>;
  using Value = std::function<double(const Vector& x)>;
  using SubdiffDistance = std::function<double(const Vector& x, const Vector& v)>;

  ProxOperator(std::string name, std::shared_ptr<const BregmanKernel> kernel, Eigen::Index dim,
               Map map, Value value, SubdiffDistance subdiff = {})
      : name_(std::move(name)),
        kernel_(std::move(kernel)),
        dim_(dim),
        map_(std::move(map)),
        value_(std::move(value)),
        subdiff_(std::move(subdiff)) {}

  const std::string& name() const noexcept { return name_; }
  const BregmanKernel& kernel() const noexcept { return *kernel_; }
  const std::shared_ptr<const BregmanKernel>& kernel_ptr() const noexcept { return kernel_; }
  Eigen::Index dimension() const noexcept { return dim_; }

  Vector operator()(const Vector& y, const Vector& a, double t) const {
    check(y, "prox center");
    check(a, "prox shift");
    if (const auto i = kernel_->interior_violation(y); i >= 0) {
      throw DomainError("y", static_cast<std::size_t>(i), y[i],
                        name_ + ": prox center outside kernel interior");
    }
    Vector out = map_(y, a, t);
    if (const auto i = kernel_->interior_violation(out); i >= 0) {
      throw DomainError("prox output", static_cast<std::size_t>(i), out[i],
                        name_ + ": result left the kernel interior");
    }
    return out;
  }

  double value(const Vector& x) const {
    check(x, "value argument");
    return value_(x);
  }

  bool has_subdiff_distance() const noexcept { return static_cast<bool>(subdiff_); }

  double subdiff_distance(const Vector& x, const Vector& v) const {
    if (!subdiff_) throw ConfigError(name_ + ": no subdifferential distance available");
    return subdiff_(x, v);
  }

 private:
  void check(const Vector& v, const char* what) const {
    if (v.size() != dim_) {
      throw DimensionError(name_ + " " + what, static_cast<std::size_t>(dim_),
                           static_cast<std::size_t>(v.size()));
    }
  }

  std::string name_;
  std::shared_ptr<const BregmanKernel> kernel_;
  Eigen::Index dim_;
  Map map_;
  Value value_;
  SubdiffDistance subdiff_;
};

/// Differentiable convex term h with its relative-smoothness constant.
struct SmoothTerm {
  std::function<double(const Vector&)> value;
  std::function<Vector(const Vector&)> gradient;
  /// L with h(x) - h(x') - <grad h(x'), x - x'> <= L d_p(x, x').
  double rel_smoothness = 0.0;
  /// Optional exact form of the linearization remainder (see `remainder`).
  std::function<double(const Vector&, const Vector&)> exact_remainder;

  /// h(x) - h(xp) - <grad h(xp), x - xp>.
  double remainder(const Vector& x, const Vector& xp) const {
    if (exact_remainder) return exact_remainder(x, xp);
    return value(x) - value(xp) - gradient(xp).dot(x - xp);
  }
};

/// h(x) = (1/2)||Cx - b||^2 with the given smoothness constant.
inline SmoothTerm least_squares(std::shared_ptr<const DenseOperator> c, Vector b,
                                double rel_smoothness) {
  if (c->rows() != b.size()) {
    throw DimensionError("least_squares", static_cast<std::size_t>(c->rows()),
                         static_cast<std::size_t>(b.size()));
  }
  auto shared_b = std::make_shared<const Vector>(std::move(b));
  SmoothTerm h;
  h.value = [c, shared_b](const Vector& x) { return 0.5 * (c->apply(x) - *shared_b).squaredNorm(); };
  h.gradient = [c, shared_b](const Vector& x) { return c->adjoint(c->apply(x) - *shared_b); };
  h.exact_remainder = [c](const Vector& x, const Vector& xp) {
    return 0.5 * c->apply(x - xp).squaredNorm();
  };
  h.rel_smoothness = rel_smoothness;
  return h;
}

// Function factories.

namespace detail {

inline constexpr double kSimplexSumTol = 1e-9;

inline bool on_simplex(const Vector& x) {
  return (x.array() >= 0.0).all() && std::abs(x.sum() - 1.0) <= kSimplexSumTol;
}

/// inf-norm distance from v to the normal cone of the simplex at x.
inline double simplex_normal_cone_distance(const Vector& x, const Vector& v) {
  // v must equal nu on supp(x) and be <= nu elsewhere; the optimal nu is the
  // midpoint of max(support max, off-support max) and the support min.
  double sup_max = -kInfinity, sup_min = kInfinity, off_max = -kInfinity;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    if (x[i] > 0.0) {
      sup_max = std::max(sup_max, v[i]);
      sup_min = std::min(sup_min, v[i]);
    } else {
      off_max = std::max(off_max, v[i]);
    }
  }
  if (sup_min == kInfinity) return kInfinity;  // empty support: not on the simplex
  return 0.5 * (std::max(sup_max, off_max) - sup_min);
}

}  // namespace detail

/**
 * Indicator of the probability simplex.
 *
 * With the entropy kernel this is the indicator of {1^T x = 1}, the kernel
 * domain supplying x >= 0; the prox is the normalized exponential update.
 * With the Euclidean kernel the prox is the simplex projection of y - a.
 */
inline ProxOperator simplex_indicator(Eigen::Index n, std::shared_ptr<const BregmanKernel> kernel) {
  ProxOperator::Map map;
  if (kernel->strong_convexity_norm() == NormTag::L1) {
    map = [](const Vector& y, const Vector& a, double) { return prox_entropy_simplex(y, a); };
  } else {
    map = [](const Vector& y, const Vector& a, double) { return project_simplex(y - a); };
  }
  return ProxOperator(
      "simplex-indicator", std::move(kernel), n, std::move(map),
      [](const Vector& x) { return detail::on_simplex(x) ? 0.0 : kInfinity; },
      detail::simplex_normal_cone_distance);
}

/// f = 0 under the given kernel.
inline ProxOperator zero_function(Eigen::Index n, std::shared_ptr<const BregmanKernel> kernel) {
  ProxOperator::Map map;
  if (kernel->strong_convexity_norm() == NormTag::L1) {
    map = [](const Vector& y, const Vector& a, double) { return prox_entropy_free(y, a); };
  } else {
    map = [](const Vector& y, const Vector& a, double) -> Vector { return y - a; };
  }
  return ProxOperator(
      "zero", std::move(kernel), n, std::move(map), [](const Vector&) { return 0.0; },
      [](const Vector&, const Vector& v) { return v.cwiseAbs().maxCoeff(); });
}

/// Indicator of the l-infinity ball of radius lam: the conjugate of lam ||.||_1.
inline ProxOperator linf_ball_indicator(Eigen::Index m, double lam) {
  if (!(lam > 0.0)) throw ConfigError("linf_ball_indicator: radius must be positive");
  return ProxOperator(
      "linf-ball-indicator", euclidean_kernel(), m,
      [lam](const Vector& y, const Vector& a, double) { return prox_linf_box(y - a, lam); },
      [lam](const Vector& z) {
        return z.cwiseAbs().maxCoeff() <= lam * (1.0 + 1e-12) ? 0.0 : kInfinity;
      },
      [lam](const Vector& z, const Vector& v) {
        double worst = 0.0;
        for (Eigen::Index i = 0; i < z.size(); ++i) {
          double r;
          if (z[i] >= lam) {
            r = std::max(0.0, -v[i]);
          } else if (z[i] <= -lam) {
            r = std::max(0.0, v[i]);
          } else {
            r = std::abs(v[i]);
          }
          worst = std::max(worst, r);
        }
        return worst;
      });
}

/// g^*(z) = <b, z>, the conjugate of the indicator of {b}.
inline ProxOperator affine_conjugate(Vector b) {
  const Eigen::Index m = b.size();
  auto shared_b = std::make_shared<const Vector>(std::move(b));
  return ProxOperator(
      "affine-conjugate", euclidean_kernel(), m,
      [shared_b](const Vector& y, const Vector& a, double t) {
        return prox_affine_conjugate(y - a, *shared_b, t);
      },
      [shared_b](const Vector& z) { return shared_b->dot(z); },
      [shared_b](const Vector&, const Vector& v) { return (v - *shared_b).cwiseAbs().maxCoeff(); });
}

/// g^* = indicator of {0}, the conjugate of g = 0.
inline ProxOperator zero_point_indicator(Eigen::Index m) {
  return ProxOperator(
      "zero-point-indicator", euclidean_kernel(), m,
      [m](const Vector&, const Vector&, double) -> Vector { return Vector::Zero(m); },
      [](const Vector& z) { return z.isZero(0.0) ? 0.0 : kInfinity; },
      [](const Vector&, const Vector&) { return 0.0; });
}

/// g^*(z) = (1/2)||z||^2, the conjugate of g = (1/2)||.||^2.
inline ProxOperator half_squared_norm(Eigen::Index m) {
  return ProxOperator(
      "half-squared-norm", euclidean_kernel(), m,
      [](const Vector& y, const Vector& a, double t) -> Vector { return (y - a) / (1.0 + t); },
      [](const Vector& z) { return 0.5 * z.squaredNorm(); },
      [](const Vector& z, const Vector& v) { return (v - z).cwiseAbs().maxCoeff(); });
}

// Optimality certificate for a Bregman prox evaluation.

struct ProxOptimalityResult {
  bool holds = true;
  std::optional<std::size_t> first_violation;  // index into the competitor list
  double min_margin = kInfinity;              // smallest (lhs - rhs) seen
};

/**
 * Checks, for every competitor x,
 *   t f(x) + <a, x> >= t f(xh) + <a, xh> + d(xh, y) + d(x, xh) - d(x, y) - 1e-9,
 * where xh is the claimed prox output. The additive slack absorbs rounding.
 */
inline ProxOptimalityResult check_prox_optimality(const Vector& prox_out, const Vector& y,
                                                  const Vector& a, double t,
                                                  const std::function<double(const Vector&)>& f_value,
                                                  const BregmanKernel& kernel,
                                                  std::span<const Vector> competitors) {
  constexpr double kSlack = 1e-9;
  const auto scaled_f = [&](const Vector& x) {
    const double fx = f_value(x);
    return t == 0.0 ? 0.0 : t * fx;
  };
  const double base = scaled_f(prox_out) + a.dot(prox_out) + distance(kernel, prox_out, y);
  ProxOptimalityResult result;
  for (std::size_t k = 0; k < competitors.size(); ++k) {
    const Vector& x = competitors[k];
    const double lhs = scaled_f(x) + a.dot(x);
    if (lhs == kInfinity) continue;
    const double rhs = base + distance(kernel, x, prox_out) - distance(kernel, x, y);
    const double margin = lhs - rhs;
    result.min_margin = std::min(result.min_margin, margin);
    if (margin < -kSlack && result.holds) {
      result.holds = false;
      result.first_violation = k;
    }
  }
  return result;
}

}  // namespace bregman
