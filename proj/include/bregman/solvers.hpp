#pragma once

#include <cmath>
#include <limits>
#include <string>

#include "bregman/errors.hpp"
#include "bregman/kernels.hpp"
#include "bregman/problem.hpp"

namespace bregman {

/**
 * Stepsize conditions for the fixed-step solvers:
 *   Condat-Vu (primal or dual):  sigma tau ||A||^2 + tau L <= 1
 *   PD3O:                        sigma tau ||A||^2 <= 1  and  tau L <= 1
 * `op_norm` and `L` must be measured in the norm the primal kernel is
 * strongly convex in (||A||_{1,2} and L1 for entropy, ||A||_2 and L2 for
 * Euclidean). The comparison admits only a few ulps of rounding, so
 * parameters chosen to satisfy a condition with equality still pass.
 */
inline bool validate_stepsizes(Algorithm algorithm, StepSizes s, double op_norm, double L) {
  constexpr double kRounding = 4.0 * std::numeric_limits<double>::epsilon();
  if (!(s.sigma > 0.0) || !(s.tau > 0.0)) return false;
  const double coupling = s.sigma * s.tau * op_norm * op_norm;
  switch (algorithm) {
    case Algorithm::CVPrimal:
    case Algorithm::CVDual: return coupling + s.tau * L <= 1.0 + kRounding;
    case Algorithm::PD3O: return coupling <= 1.0 + kRounding && s.tau * L <= 1.0 + kRounding;
    case Algorithm::LineSearch: break;
  }
  throw ConfigError("validate_stepsizes: the line search has no fixed stepsize condition");
}

/// Lower bound on every stepsize the line search accepts.
inline double line_search_tau_min(const LineSearchConfig& cfg, double L, double op_norm) {
  const double a2 = op_norm * op_norm;
  double floor;
  if (a2 == 0.0) {
    floor = (L == 0.0) ? std::numeric_limits<double>::infinity()
                       : cfg.delta * cfg.delta / (2.0 * L);
  } else {
    floor = (-L + std::sqrt(L * L + 4.0 * cfg.delta * cfg.delta * cfg.beta * a2)) /
            (4.0 * cfg.beta * a2);
  }
  return std::min(cfg.tau_init, floor);
}

inline void require_pd3o_kernel(const CompositeProblem& p) {
  if (p.f.kernel().strong_convexity_norm() != NormTag::Euclidean) {
    throw ConfigError(
        "pd3o: the primal kernel must be strongly convex w.r.t. the Euclidean norm (got '" +
        std::string(p.f.kernel().name()) + "')");
  }
}

inline void require_line_search_problem(const CompositeProblem& p) {
  if (!p.b) throw ConfigError("line search: problem has no equality right-hand side b");
  if (p.gstar.kernel().strong_convexity_norm() != NormTag::Euclidean) {
    throw ConfigError("line search: the dual kernel must be squared Euclidean");
  }
}

namespace detail {

template <class Fn>
auto tag_iteration(std::int64_t iteration, Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const DomainError& e) {
    throw StepError(iteration, e.what());
  }
}

inline void advance_fixed(SolverState& next, const SolverState& st, StepSizes s) {
  next.x_sum = st.x_sum + next.x;
  next.z_sum = st.z_sum + next.z;
  next.weight_sum = st.weight_sum + 1.0;
  next.k = st.k + 1;
  next.sigma = s.sigma;
  next.tau = s.tau;
}

}  // namespace detail

/// x+ = prox_{tau f}(x, tau (A^T z + grad h(x))); z+ = prox_{sigma g*}(z, -sigma A(2x+ - x)).
inline SolverState cv_primal_step(const CompositeProblem& p, const SolverState& st, StepSizes s) {
  return detail::tag_iteration(st.k + 1, [&] {
    SolverState next;
    const Vector shift = s.tau * (p.A->adjoint(st.z) + p.h_gradient(st.x));
    next.x = p.f(st.x, shift, s.tau);
    next.z = p.gstar(st.z, -s.sigma * p.A->apply(2.0 * next.x - st.x), s.sigma);
    next.z_prev = st.z;
    next.z_bar = next.z;
    detail::advance_fixed(next, st, s);
    return next;
  });
}

/// z+ = prox_{sigma g*}(z, -sigma A x); x+ = prox_{tau f}(x, tau A^T(2z+ - z) + tau grad h(x)).
inline SolverState cv_dual_step(const CompositeProblem& p, const SolverState& st, StepSizes s) {
  return detail::tag_iteration(st.k + 1, [&] {
    SolverState next;
    next.z = p.gstar(st.z, -s.sigma * p.A->apply(st.x), s.sigma);
    const Vector shift = s.tau * (p.A->adjoint(2.0 * next.z - st.z) + p.h_gradient(st.x));
    next.x = p.f(st.x, shift, s.tau);
    next.z_prev = st.z;
    next.z_bar = next.z;
    detail::advance_fixed(next, st, s);
    return next;
  });
}

/**
 * Primal Condat-Vu with the gradient correction tau (grad h(x) - grad h(x+))
 * inside the dual extrapolation. Requires a Euclidean primal kernel.
 */
inline SolverState pd3o_step(const CompositeProblem& p, const SolverState& st, StepSizes s) {
  require_pd3o_kernel(p);
  return detail::tag_iteration(st.k + 1, [&] {
    SolverState next;
    const Vector grad = p.h_gradient(st.x);
    next.x = p.f(st.x, s.tau * (p.A->adjoint(st.z) + grad), s.tau);
    Vector extrapolated = 2.0 * next.x - st.x;
    if (p.h) extrapolated += s.tau * (grad - p.h_gradient(next.x));
    next.z = p.gstar(st.z, -s.sigma * p.A->apply(extrapolated), s.sigma);
    next.z_prev = st.z;
    next.z_bar = next.z;
    detail::advance_fixed(next, st, s);
    return next;
  });
}

/**
 * One iteration of the dual Condat-Vu method with backtracking, for
 * g = indicator of {b}. Trials theta = theta_bar / 2^i scale both stepsizes
 * (their ratio stays beta, so only tau is carried); a trial is accepted when
 *   <z+ - zbar, A(x+ - x)> + h(x+) - h(x) - <grad h(x), x+ - x>
 *     <= delta^2 / tau_k d_p(x+, x) + 1 / (2 sigma_k) ||zbar - z+||^2.
 * st.tau holds the previous primal stepsize (tau_{-1} at k = 0).
 */
inline SolverState ls_step(const CompositeProblem& p, const SolverState& st,
                           const LineSearchConfig& cfg) {
  require_line_search_problem(p);
  return detail::tag_iteration(st.k + 1, [&] {
    const Vector grad = p.h_gradient(st.x);
    const Vector dz = st.z - st.z_prev;
    const double delta_sq = cfg.delta * cfg.delta;
    double theta = cfg.theta_bar;
    for (int i = 0;; ++i, theta *= 0.5) {
      const double tau_k = theta * st.tau;
      // sigma_k = theta sigma_{k-1} = beta tau_k; the product form keeps the ratio exact.
      const double sigma_k = cfg.beta * tau_k;
      Vector z_bar = st.z + theta * dz;
      Vector x_next = p.f(st.x, tau_k * (p.A->adjoint(z_bar) + grad), tau_k);
      Vector z_next = prox_affine_conjugate(st.z + sigma_k * p.A->apply(x_next), *p.b, sigma_k);

      bool accept = !cfg.backtrack;
      double lhs = 0.0, rhs = 0.0;
      if (!accept) {
        const Vector step = x_next - st.x;
        lhs = (z_next - z_bar).dot(p.A->apply(step)) + p.h_remainder(x_next, st.x);
        rhs = delta_sq / tau_k * p.f.kernel().unchecked_distance(x_next, st.x) +
              (z_bar - z_next).squaredNorm() / (2.0 * sigma_k);
        accept = lhs <= rhs;
      }
      if (accept) {
        SolverState next;
        next.x_sum = st.x_sum + tau_k * x_next;
        next.z_sum = st.z_sum + tau_k * z_bar;
        next.weight_sum = st.weight_sum + tau_k;
        next.x = std::move(x_next);
        next.z = std::move(z_next);
        next.z_prev = st.z;
        next.z_bar = std::move(z_bar);
        next.k = st.k + 1;
        next.sigma = sigma_k;
        next.tau = tau_k;
        next.theta = theta;
        next.backtracks = i;
        return next;
      }
      if (i >= cfg.max_backtracks) throw BacktrackError(theta, lhs, rhs);
    }
  });
}

/// Dispatch one step of `algorithm`.
inline SolverState step(Algorithm algorithm, const CompositeProblem& p, const SolverState& st,
                        StepSizes s, const LineSearchConfig& cfg) {
  switch (algorithm) {
    case Algorithm::CVPrimal: return cv_primal_step(p, st, s);
    case Algorithm::CVDual: return cv_dual_step(p, st, s);
    case Algorithm::PD3O: return pd3o_step(p, st, s);
    case Algorithm::LineSearch: return ls_step(p, st, cfg);
  }
  throw ConfigError("unknown algorithm");
}

}  // namespace bregman
