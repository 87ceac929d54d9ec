#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <exception>
#include <functional>
#include <limits>
#include <optional>
#include <vector>

#include "bregman/errors.hpp"
#include "bregman/merit.hpp"
#include "bregman/problem.hpp"
#include "bregman/solvers.hpp"

namespace bregman {

struct StoppingRule {
  std::int64_t max_iters = 1000;
  /// Seconds of wall time measured by the run's clock; <= 0 disables it.
  double wall_budget = 0.0;
  /// Stop when |psi(x+) - psi(x)| <= rel_objective_change * max(1, |psi(x)|); <= 0 disables it.
  double rel_objective_change = 0.0;
};

/// Seconds since an arbitrary origin. The default measures the steady clock.
using Clock = std::function<double()>;

inline Clock steady_clock_seconds() {
  return [] {
    using namespace std::chrono;
    return duration<double>(steady_clock::now().time_since_epoch()).count();
  };
}

/// A clock that never advances, for reproducible traces.
inline Clock frozen_clock() {
  return [] { return 0.0; };
}

struct ConvergenceRecord {
  std::int64_t k = 0;
  double objective = std::numeric_limits<double>::quiet_NaN();      // psi(x^k)
  double objective_avg = std::numeric_limits<double>::quiet_NaN();  // psi(x_avg^k)
  double sigma = 0.0;
  double tau = 0.0;
  double wall_time = 0.0;
  int backtracks = 0;
  double weight_sum = 0.0;
  // Filled when a reference saddle point is supplied.
  std::optional<double> gap;              // L(x_avg, z*) - L(x*, z_avg)
  std::optional<double> saddle_distance;  // see saddle_distance()
};

struct DiagnosticsConfig {
  /// Emit a record every `log_every` iterations (and at k = 0); 0 disables logging.
  std::int64_t log_every = 1;
  std::optional<SaddlePoint> saddle;
  Clock clock;
  /// Called after every step with the new state.
  std::function<void(const SolverState&)> observer;
};

struct SolverConfig {
  Algorithm algorithm = Algorithm::CVPrimal;
  StepSizes steps;              // fixed-step solvers
  LineSearchConfig line_search; // line search
};

struct RunResult {
  SolverState state;  // last valid state
  std::vector<ConvergenceRecord> records;
  std::exception_ptr error;  // set when a step failed

  bool ok() const noexcept { return !error; }
  void rethrow() const {
    if (error) std::rethrow_exception(error);
  }
};

namespace detail {

inline ConvergenceRecord make_record(const CompositeProblem& p, const SolverConfig& cfg,
                                     const SolverState& st, double elapsed,
                                     const std::optional<SaddlePoint>& saddle) {
  ConvergenceRecord r;
  r.k = st.k;
  if (p.objective) {
    r.objective = p.objective(st.x);
    r.objective_avg = p.objective(st.x_avg());
  }
  r.sigma = st.sigma;
  r.tau = st.tau;
  r.wall_time = elapsed;
  r.backtracks = st.backtracks;
  r.weight_sum = st.weight_sum;
  if (saddle) {
    if (st.k > 0) {
      r.gap = lagrangian(p, st.x_avg(), saddle->z) - lagrangian(p, saddle->x, st.z_avg());
    }
    const SaddleMeasure m{cfg.algorithm, cfg.steps, cfg.line_search.beta};
    r.saddle_distance = saddle_distance(p, m, *saddle, st.x, st.z);
  }
  return r;
}

}  // namespace detail

/// Initial state for `cfg`, validating the configuration.
inline SolverState initial_state(const CompositeProblem& p, const SolverConfig& cfg,
                                 const Vector& x0, const Vector& z0) {
  if (cfg.algorithm == Algorithm::LineSearch) {
    require_line_search_problem(p);
    return initial_state(p, x0, z0, cfg.line_search);
  }
  if (cfg.algorithm == Algorithm::PD3O) require_pd3o_kernel(p);
  if (!(cfg.steps.sigma > 0.0) || !(cfg.steps.tau > 0.0)) {
    throw ConfigError("stepsizes must be positive");
  }
  return initial_state(p, x0, z0, cfg.steps);
}

/**
 * Iterate from `start` until the stopping rule fires. A failing step stops
 * the run; the error is stored in the result next to the last valid state.
 */
inline RunResult run(const CompositeProblem& p, const SolverConfig& cfg, SolverState start,
                     const StoppingRule& stop, const DiagnosticsConfig& diag = {}) {
  const Clock clock = diag.clock ? diag.clock : steady_clock_seconds();
  const double t0 = clock();
  RunResult out;
  out.state = std::move(start);
  const std::int64_t k0 = out.state.k;
  if (stop.max_iters <= 0) return out;

  const auto log = [&](const SolverState& st) {
    if (diag.log_every > 0 && st.k % diag.log_every == 0) {
      out.records.push_back(detail::make_record(p, cfg, st, clock() - t0, diag.saddle));
    }
  };

  log(out.state);
  double previous = p.objective ? p.objective(out.state.x) : 0.0;
  while (out.state.k - k0 < stop.max_iters) {
    try {
      SolverState next = step(cfg.algorithm, p, out.state, cfg.steps, cfg.line_search);
      out.state = std::move(next);
    } catch (...) {
      out.error = std::current_exception();
      return out;
    }
    if (diag.observer) diag.observer(out.state);
    log(out.state);
    if (stop.wall_budget > 0.0 && clock() - t0 >= stop.wall_budget) break;
    if (stop.rel_objective_change > 0.0 && p.objective) {
      const double current = p.objective(out.state.x);
      const bool small = std::abs(current - previous) <=
                         stop.rel_objective_change * std::max(1.0, std::abs(previous));
      previous = current;
      if (small) break;
    }
  }
  return out;
}

inline RunResult run(const CompositeProblem& p, const SolverConfig& cfg, const Vector& x0,
                     const Vector& z0, const StoppingRule& stop,
                     const DiagnosticsConfig& diag = {}) {
  return run(p, cfg, initial_state(p, cfg, x0, z0), stop, diag);
}

}  // namespace bregman
