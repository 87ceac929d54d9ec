#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <memory>
#include <optional>
#include <vector>

#include "bregman/errors.hpp"
#include "bregman/kernels.hpp"
#include "bregman/problem.hpp"

namespace bregman {

/// A (claimed) saddle point of the Lagrangian.
struct SaddlePoint {
  Vector x;
  Vector z;
};

// ---------------------------------------------------------------------------
// Lagrangian

/// L(x, z) = f(x) + h(x) + <z, Ax> - g^*(z).
struct LagrangianSpec {
  std::function<double(const Vector&)> f_value;
  std::function<double(const Vector&)> h_value;
  std::function<double(const Vector&)> gstar_value;
  std::shared_ptr<const LinearOperator> A;

  static LagrangianSpec from(const CompositeProblem& p) {
    return {[&f = p.f](const Vector& x) { return f.value(x); },
            [&p](const Vector& x) { return p.h_value(x); },
            [&g = p.gstar](const Vector& z) { return g.value(z); }, p.A};
  }
};

/// +inf when x is outside dom(f + h); -inf when z is outside dom g^*; finite otherwise.
inline double lagrangian(const LagrangianSpec& spec, const Vector& x, const Vector& z) {
  const double primal = spec.f_value(x) + (spec.h_value ? spec.h_value(x) : 0.0);
  if (primal == kInfinity || std::isnan(primal)) return kInfinity;
  const double conj = spec.gstar_value(z);
  if (conj == kInfinity) return -kInfinity;
  return primal + z.dot(spec.A->apply(x)) - conj;
}

inline double lagrangian(const CompositeProblem& p, const Vector& x, const Vector& z) {
  return lagrangian(LagrangianSpec::from(p), x, z);
}

// ---------------------------------------------------------------------------
// Primal-dual distances

enum class PdDistanceKind { DPlus, DMinus, DPcv, DDcv, DPd3o };

/**
 * Bregman distances on the product space generated by
 *   phi_{+/-}(x, z) = phi_p(x)/tau + phi_d(z)/sigma +/- <z, Ax>,
 *   phi_{dcv} = phi_+ - h,  phi_{pcv} = phi_- - h,
 * and the PD3O distance (which carries an extra y = grad h(x) block).
 */
struct PrimalDualDistance {
  PdDistanceKind kind = PdDistanceKind::DMinus;
  double sigma = 1.0;
  double tau = 1.0;
  std::shared_ptr<const BregmanKernel> primal_kernel;
  std::shared_ptr<const BregmanKernel> dual_kernel;
  std::optional<SmoothTerm> h;
  std::shared_ptr<const LinearOperator> A;

  static PrimalDualDistance from(const CompositeProblem& p, PdDistanceKind kind, StepSizes s) {
    return {kind, s.sigma, s.tau, p.f.kernel_ptr(), p.gstar.kernel_ptr(), p.h, p.A};
  }
};

/**
 * d_pd3o(x, y, z; x', y', z') = d_p(x,x')/tau + d_d(z,z')/sigma + tau/2 ||y - y'||^2
 *   - <y - y', x - x'> - <z - z', A(x - x')> + tau <z - z', A(y - y')>.
 */
inline double pd3o_distance(const PrimalDualDistance& d, const Vector& x, const Vector& y,
                            const Vector& z, const Vector& xp, const Vector& yp,
                            const Vector& zp) {
  const Vector dx = x - xp;
  const Vector dy = y - yp;
  const Vector dz = z - zp;
  return distance(*d.primal_kernel, x, xp) / d.tau + distance(*d.dual_kernel, z, zp) / d.sigma +
         0.5 * d.tau * dy.squaredNorm() - dy.dot(dx) - dz.dot(d.A->apply(dx)) +
         d.tau * dz.dot(d.A->apply(dy));
}

inline double pd_distance(const PrimalDualDistance& d, const Vector& x, const Vector& z,
                          const Vector& xp, const Vector& zp) {
  const auto h_grad = [&d](const Vector& v) -> Vector {
    return d.h ? d.h->gradient(v) : Vector::Zero(v.size());
  };
  if (d.kind == PdDistanceKind::DPd3o) {
    return pd3o_distance(d, x, h_grad(x), z, xp, h_grad(xp), zp);
  }
  const double base = distance(*d.primal_kernel, x, xp) / d.tau +
                      distance(*d.dual_kernel, z, zp) / d.sigma;
  const double cross = (z - zp).dot(d.A->apply(x - xp));
  const double h_rem = d.h ? d.h->remainder(x, xp) : 0.0;
  switch (d.kind) {
    case PdDistanceKind::DPlus: return base + cross;
    case PdDistanceKind::DMinus: return base - cross;
    case PdDistanceKind::DDcv: return base + cross - h_rem;
    case PdDistanceKind::DPcv: return base - cross - h_rem;
    case PdDistanceKind::DPd3o: break;
  }
  throw ConfigError("pd_distance: unknown variant");
}

// ---------------------------------------------------------------------------
// Closed-form merit functions

/// Merit for  minimize ||x||_1 s.t. Ax <= b, with X = kappa-ball (inf norm), Z = lam-ball.
struct MeritL1Inequality {
  double kappa = 1.0;
  double lam = 1.0;
  std::shared_ptr<const LinearOperator> A;
  Vector b;
};

/**
 * eta(x, z) = ||x||_1 + lam sum max{0, (Ax - b)_i} + b^T z
 *             + kappa sum max{0, |(A^T z)_i| - 1},   z >= 0.
 */
inline double merit_l1(const MeritL1Inequality& m, const Vector& x, const Vector& z) {
  for (Eigen::Index i = 0; i < z.size(); ++i) {
    if (z[i] < 0.0) {
      throw DomainError("z", static_cast<std::size_t>(i), z[i], "merit_l1 requires z >= 0");
    }
  }
  const Vector residual = m.A->apply(x) - m.b;
  const Vector atz = m.A->adjoint(z);
  return x.lpNorm<1>() + m.lam * residual.cwiseMax(0.0).sum() + m.b.dot(z) +
         m.kappa * (atz.cwiseAbs().array() - 1.0).max(0.0).sum();
}

/// Merit for  minimize f(x) + h(x) s.t. Ax = b, with Z = {||z|| <= gamma}.
struct MeritEqualityPenalty {
  double gamma = 1.0;
  std::function<double(const Vector&)> fh_value;
  std::shared_ptr<const LinearOperator> A;
  Vector b;
  /// (f + h)^*, when the caller can evaluate it.
  std::function<double(const Vector&)> fh_conjugate;
};

struct MeritEqualityValue {
  double primal_part = 0.0;            // f(x) + h(x) + gamma ||Ax - b||
  std::optional<double> dual_part;     // b^T z + (f+h)^*(-A^T z), if evaluable
  std::optional<double> total() const {
    if (!dual_part) return std::nullopt;
    return primal_part + *dual_part;
  }
};

inline MeritEqualityValue merit_equality(const MeritEqualityPenalty& m, const Vector& x,
                                         const Vector& z) {
  MeritEqualityValue v;
  v.primal_part = m.fh_value(x) + m.gamma * (m.A->apply(x) - m.b).norm();
  if (m.fh_conjugate) v.dual_part = m.b.dot(z) + m.fh_conjugate(-m.A->adjoint(z));
  return v;
}

// ---------------------------------------------------------------------------
// Convergence certificates

/// Distance-to-saddle quantity that each solver keeps nonincreasing.
struct SaddleMeasure {
  Algorithm algorithm;
  StepSizes steps;   // fixed-step solvers
  double beta = 1.0; // line search
};

/**
 * CV primal: d_-(x*, z*; x, z);  CV dual: d_+(x*, z*; x, z);
 * PD3O: d_pd3o(x*, grad h(x*), z*; x, grad h(x), z);
 * line search: d_p(x*, x) + ||z* - z||^2 / (2 beta).
 */
inline double saddle_distance(const CompositeProblem& p, const SaddleMeasure& m,
                              const SaddlePoint& s, const Vector& x, const Vector& z) {
  switch (m.algorithm) {
    case Algorithm::CVPrimal:
      return pd_distance(PrimalDualDistance::from(p, PdDistanceKind::DMinus, m.steps), s.x, s.z,
                         x, z);
    case Algorithm::CVDual:
      return pd_distance(PrimalDualDistance::from(p, PdDistanceKind::DPlus, m.steps), s.x, s.z,
                         x, z);
    case Algorithm::PD3O:
      return pd_distance(PrimalDualDistance::from(p, PdDistanceKind::DPd3o, m.steps), s.x, s.z,
                         x, z);
    case Algorithm::LineSearch:
      return distance(p.f.kernel(), s.x, x) + (s.z - z).squaredNorm() / (2.0 * m.beta);
  }
  throw ConfigError("saddle_distance: unknown algorithm");
}

/**
 * Margin (rhs - lhs) of the one-iteration inequality of the fixed-step CV solvers
 *   L(x+, z) - L(x, z+) <= d(x,z; xk,zk) - d(x,z; x+,z+) - d~(x+,z+; xk,zk),
 * with (d, d~) = (d_-, d_pcv) for the primal and (d_+, d_dcv) for the dual variant.
 */
inline double one_step_margin(const CompositeProblem& p, Algorithm algorithm, StepSizes s,
                              const SolverState& before, const SolverState& after,
                              const Vector& x, const Vector& z) {
  const double lhs = lagrangian(p, after.x, z) - lagrangian(p, x, after.z);
  double rhs = 0.0;
  switch (algorithm) {
    case Algorithm::CVPrimal: {
      const auto d = PrimalDualDistance::from(p, PdDistanceKind::DMinus, s);
      const auto dt = PrimalDualDistance::from(p, PdDistanceKind::DPcv, s);
      rhs = pd_distance(d, x, z, before.x, before.z) - pd_distance(d, x, z, after.x, after.z) -
            pd_distance(dt, after.x, after.z, before.x, before.z);
      break;
    }
    case Algorithm::CVDual: {
      const auto d = PrimalDualDistance::from(p, PdDistanceKind::DPlus, s);
      const auto dt = PrimalDualDistance::from(p, PdDistanceKind::DDcv, s);
      rhs = pd_distance(d, x, z, before.x, before.z) - pd_distance(d, x, z, after.x, after.z) -
            pd_distance(dt, after.x, after.z, before.x, before.z);
      break;
    }
    case Algorithm::PD3O:
    case Algorithm::LineSearch:
      throw ConfigError("one_step_margin: only defined for the fixed-step Condat-Vu solvers");
  }
  return rhs - lhs;
}

/**
 * Margin (rhs - lhs) of the line-search one-iteration inequality
 *   L(x+, z) - L(x, zbar+) <= (d_p(x, xk) - d_p(x, x+) - (1 - delta^2) d_p(x+, xk)) / tau_k
 *                           + (||z - zk||^2 - ||z - z+||^2 - ||zbar+ - zk||^2) / (2 sigma_k),
 * where L(x, z) = f(x) + h(x) + <z, Ax - b>.
 */
inline double line_search_step_margin(const CompositeProblem& p, double delta,
                                      const SolverState& before, const SolverState& after,
                                      const Vector& x, const Vector& z) {
  const BregmanKernel& k = p.f.kernel();
  const double lhs = lagrangian(p, after.x, z) - lagrangian(p, x, after.z_bar);
  const double rhs =
      (distance(k, x, before.x) - distance(k, x, after.x) -
       (1.0 - delta * delta) * distance(k, after.x, before.x)) /
          after.tau +
      ((z - before.z).squaredNorm() - (z - after.z).squaredNorm() -
       (after.z_bar - before.z).squaredNorm()) /
          (2.0 * after.sigma);
  return rhs - lhs;
}

/// Ingredients of the ergodic O(1/k) bounds.
struct ErgodicBound {
  Algorithm algorithm;
  StepSizes steps;            // fixed-step solvers
  double beta = 1.0;          // line search
  double primal_initial = 0;  // d_p(x*, x0)
  double dual_initial = 0;    // d_d(z*, z0)

  static ErgodicBound from(const CompositeProblem& p, Algorithm algorithm, StepSizes steps,
                           double beta, const SaddlePoint& saddle, const Vector& x0,
                           const Vector& z0) {
    return {algorithm, steps, beta, distance(p.f.kernel(), saddle.x, x0),
            distance(p.gstar.kernel(), saddle.z, z0)};
  }

  /**
   * CV:   (2/k)(d_p/tau + d_d/sigma)
   * PD3O: (3/k)(2 d_p/tau + d_d/sigma)
   * LS:   (d_p + ||z* - z0||^2 / (2 beta)) / sum_i tau_{i-1}
   * `weight_sum` is k for fixed-step solvers and sum tau_{i-1} for the line search.
   */
  double value(double k, double weight_sum) const {
    const double dp = primal_initial;
    const double dd = dual_initial;
    switch (algorithm) {
      case Algorithm::CVPrimal:
      case Algorithm::CVDual: return (2.0 / k) * (dp / steps.tau + dd / steps.sigma);
      case Algorithm::PD3O: return (3.0 / k) * (2.0 * dp / steps.tau + dd / steps.sigma);
      case Algorithm::LineSearch: return (dp + dd / beta) / weight_sum;
    }
    return kInfinity;
  }
};

/// One logged point of an ergodic-gap history.
struct ErgodicSample {
  std::int64_t k = 0;
  double weight_sum = 0.0;
  double gap = 0.0;  // L(x_avg, z*) - L(x*, z_avg)
};

/// True iff every sample satisfies its bound with 1e-8 additive slack.
inline bool ergodic_gap_bound_check(const std::vector<ErgodicSample>& history,
                                    const ErgodicBound& bound) {
  constexpr double kSlack = 1e-8;
  return std::all_of(history.begin(), history.end(), [&](const ErgodicSample& s) {
    return s.k >= 1 &&
           s.gap <= bound.value(static_cast<double>(s.k), s.weight_sum) + kSlack;
  });
}

// ---------------------------------------------------------------------------
// KKT residual

struct KktResidual {
  double primal = 0.0;       // dist(-(grad h(x) + A^T z), subdiff f(x))
  double dual = 0.0;         // dist(Ax, subdiff g^*(z))
  double feasibility = 0.0;  // domain violation of x and z
  double max() const { return std::max({primal, dual, feasibility}); }
};

/// Infinity-norm residual of 0 in subdiff f(x) + grad h(x) + A^T z, 0 in subdiff g^*(z) - Ax.
inline KktResidual kkt_residual(const CompositeProblem& p, const Vector& x, const Vector& z) {
  KktResidual r;
  r.primal = p.f.subdiff_distance(x, -(p.h_gradient(x) + p.A->adjoint(z)));
  r.dual = p.gstar.subdiff_distance(z, p.A->apply(x));
  double infeasible = 0.0;
  if (p.f.value(x) == kInfinity) infeasible = kInfinity;
  if (p.gstar.value(z) == kInfinity) infeasible = kInfinity;
  if (p.f.name() == "simplex-indicator") {
    infeasible = std::max({0.0, std::abs(x.sum() - 1.0), -x.minCoeff()});
  }
  r.feasibility = infeasible;
  return r;
}

}  // namespace bregman
