#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string_view>
#include <utility>

#include "bregman/errors.hpp"
#include "bregman/linear_operator.hpp"
#include "bregman/prox.hpp"

namespace bregman {

enum class Algorithm { CVPrimal, CVDual, PD3O, LineSearch };

constexpr std::string_view to_string(Algorithm a) noexcept {
  switch (a) {
    case Algorithm::CVPrimal: return "cv-primal";
    case Algorithm::CVDual: return "cv-dual";
    case Algorithm::PD3O: return "pd3o";
    case Algorithm::LineSearch: return "line-search";
  }
  return "unknown";
}

/**
 * minimize f(x) + g(Ax) + h(x), described through the prox of f (primal
 * kernel), the prox of g^* (dual kernel), an optional smooth h and A.
 * `b` is set only for equality-constrained problems (g = indicator of {b}).
 */
struct CompositeProblem {
  ProxOperator f;
  ProxOperator gstar;
  std::optional<SmoothTerm> h;
  std::shared_ptr<const LinearOperator> A;
  std::optional<Vector> b;
  /// Reported objective psi(x); defaults to nothing (records then hold NaN).
  std::function<double(const Vector&)> objective;

  Eigen::Index primal_dim() const { return A->cols(); }
  Eigen::Index dual_dim() const { return A->rows(); }

  double h_value(const Vector& x) const { return h ? h->value(x) : 0.0; }
  Vector h_gradient(const Vector& x) const {
    return h ? h->gradient(x) : Vector::Zero(x.size());
  }
  double h_remainder(const Vector& x, const Vector& xp) const {
    return h ? h->remainder(x, xp) : 0.0;
  }
  double smoothness() const { return h ? h->rel_smoothness : 0.0; }

  void validate() const {
    if (!A) throw ConfigError("CompositeProblem: operator A is missing");
    if (f.dimension() != A->cols()) {
      throw DimensionError("CompositeProblem f vs cols(A)", static_cast<std::size_t>(A->cols()),
                           static_cast<std::size_t>(f.dimension()));
    }
    if (gstar.dimension() != A->rows()) {
      throw DimensionError("CompositeProblem g* vs rows(A)", static_cast<std::size_t>(A->rows()),
                           static_cast<std::size_t>(gstar.dimension()));
    }
    if (b && b->size() != A->rows()) {
      throw DimensionError("CompositeProblem b vs rows(A)", static_cast<std::size_t>(A->rows()),
                           static_cast<std::size_t>(b->size()));
    }
  }
};

struct StepSizes {
  double sigma = 0.0;  // dual
  double tau = 0.0;    // primal
};

struct LineSearchConfig {
  double tau_init = 0.0;    // tau_{-1}
  double beta = 1.0;        // sigma_{-1} / tau_{-1}, kept fixed
  double theta_bar = 1.2;   // first trial of theta_k, >= 1
  double delta = 0.99;      // in (0, 1]
  int max_backtracks = 60;
  /// When false the first trial is accepted without testing the condition.
  bool backtrack = true;

  void validate() const {
    if (!(tau_init > 0.0)) throw ConfigError("line search: tau_init must be positive");
    if (!(beta > 0.0)) throw ConfigError("line search: beta must be positive");
    if (!(theta_bar >= 1.0)) throw ConfigError("line search: theta_bar must be >= 1");
    if (!(delta > 0.0 && delta <= 1.0)) throw ConfigError("line search: delta must be in (0, 1]");
    if (max_backtracks < 0) throw ConfigError("line search: max_backtracks must be >= 0");
  }
};

/// Iterates and ergodic accumulators of a running solver.
struct SolverState {
  Vector x;
  Vector z;
  Vector z_prev;  // z^(k-1); line search only
  Vector z_bar;   // last extrapolated dual point; line search only

  // Weighted sums for ergodic averages. Fixed-step solvers use weight 1 and
  // sum z; the line search uses weight tau_{k} for iterate k+1 and sums z_bar.
  Vector x_sum;
  Vector z_sum;
  double weight_sum = 0.0;

  std::int64_t k = 0;
  double sigma = 0.0;
  double tau = 0.0;
  double theta = 1.0;  // last accepted theta (line search)
  int backtracks = 0;  // rejected trials in the last step (line search)

  Vector x_avg() const { return weight_sum > 0.0 ? Vector(x_sum / weight_sum) : x; }
  Vector z_avg() const { return weight_sum > 0.0 ? Vector(z_sum / weight_sum) : z; }
};

/// State at k = 0. For the line search, z^(-1) = z^(0) and (sigma, tau) hold (beta tau_{-1}, tau_{-1}).
inline SolverState initial_state(const CompositeProblem& p, const Vector& x0, const Vector& z0,
                                 StepSizes steps) {
  p.validate();
  if (x0.size() != p.primal_dim()) {
    throw DimensionError("initial x", static_cast<std::size_t>(p.primal_dim()),
                         static_cast<std::size_t>(x0.size()));
  }
  if (z0.size() != p.dual_dim()) {
    throw DimensionError("initial z", static_cast<std::size_t>(p.dual_dim()),
                         static_cast<std::size_t>(z0.size()));
  }
  if (const auto i = p.f.kernel().interior_violation(x0); i >= 0) {
    throw DomainError("x0", static_cast<std::size_t>(i), x0[i], "outside primal kernel interior");
  }
  if (const auto i = p.gstar.kernel().interior_violation(z0); i >= 0) {
    throw DomainError("z0", static_cast<std::size_t>(i), z0[i], "outside dual kernel interior");
  }
  SolverState s;
  s.x = x0;
  s.z = z0;
  s.z_prev = z0;
  s.z_bar = z0;
  s.x_sum = Vector::Zero(x0.size());
  s.z_sum = Vector::Zero(z0.size());
  s.sigma = steps.sigma;
  s.tau = steps.tau;
  return s;
}

inline SolverState initial_state(const CompositeProblem& p, const Vector& x0, const Vector& z0,
                                 const LineSearchConfig& cfg) {
  cfg.validate();
  return initial_state(p, x0, z0, StepSizes{cfg.beta * cfg.tau_init, cfg.tau_init});
}

}  // namespace bregman
