#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <memory>
#include <numbers>
#include <optional>
#include <ostream>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Eigenvalues>

#include "bregman/driver.hpp"
#include "bregman/errors.hpp"
#include "bregman/kernels.hpp"
#include "bregman/linear_operator.hpp"
#include "bregman/merit.hpp"
#include "bregman/problem.hpp"
#include "bregman/prox.hpp"
#include "bregman/solvers.hpp"

namespace bregman {

/**
 * Standard normal samples: mt19937_64 seeded with `seed`, 53-bit uniforms
 * u = (word >> 11) * 2^-53, Box-Muller on (1 - u1, u2) returning the cosine
 * sample first and the sine sample on the next call.
 */
class GaussianStream {
 public:
  explicit GaussianStream(std::uint64_t seed) : engine_(seed) {}

  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double operator()() {
    if (cached_) {
      cached_ = false;
      return spare_;
    }
    const double u1 = 1.0 - uniform();  // (0, 1]
    const double u2 = uniform();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    spare_ = radius * std::sin(angle);
    cached_ = true;
    return radius * std::cos(angle);
  }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool cached_ = false;
};

struct ExperimentConfig {
  Eigen::Index m = 50;
  Eigen::Index n = 500;
  double lam = 0.1;
  std::uint64_t seed = 0;
  std::int64_t iters = 20000;
  std::int64_t log_every = 100;
  double delta = 0.99;
  double theta_bar = 1.2;
  /// Rows of the equality constraint in the equality benchmark.
  Eigen::Index p = 10;
  std::string output_path;

  void validate() const {
    if (m < 1) throw ConfigError("m must be >= 1");
    if (n < 2) throw ConfigError("n must be >= 2");
    if (!(lam > 0.0)) throw ConfigError("lam must be positive");
    if (iters < 0) throw ConfigError("iters must be >= 0");
    if (log_every < 1) throw ConfigError("log-every must be >= 1");
    if (!(delta > 0.0 && delta <= 1.0)) throw ConfigError("delta must be in (0, 1]");
    if (!(theta_bar >= 1.0)) throw ConfigError("theta-bar must be >= 1");
  }

  void validate_equality() const {
    validate();
    if (p < 1 || p >= n) throw ConfigError("p must satisfy 1 <= p < n");
  }
};

/// Data of  minimize lam ||Ax||_1 + (1/2)||Cx - d||^2  over the probability simplex.
struct ExperimentData {
  std::shared_ptr<const DenseOperator> C;
  Vector d;
  double lam = 0.1;
  double L1 = 0.0;  // max |(C^T C)_ij|
  double L2 = 0.0;  // ||C||_2^2
};

/// Largest eigenvalue of C C^T (or C^T C, whichever is smaller).
inline double squared_spectral_norm(const DenseOperator& c) {
  const RowMajorMatrix& e = c.entries();
  const Eigen::MatrixXd gram =
      e.rows() <= e.cols() ? Eigen::MatrixXd(e * e.transpose()) : Eigen::MatrixXd(e.transpose() * e);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(gram, Eigen::EigenvaluesOnly);
  return solver.eigenvalues().maxCoeff();
}

/// Wrap given C and d (test hook; generate_data draws them at random).
inline ExperimentData make_data(RowMajorMatrix C, Vector d, double lam) {
  if (C.rows() != d.size()) {
    throw DimensionError("experiment data d vs rows(C)", static_cast<std::size_t>(C.rows()),
                         static_cast<std::size_t>(d.size()));
  }
  ExperimentData data;
  data.C = std::make_shared<const DenseOperator>(std::move(C));
  data.d = std::move(d);
  data.lam = lam;
  data.L1 = lipschitz_l1(*data.C);
  data.L2 = squared_spectral_norm(*data.C);
  return data;
}

inline RowMajorMatrix gaussian_matrix(GaussianStream& g, Eigen::Index rows, Eigen::Index cols) {
  RowMajorMatrix out(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < cols; ++j) out(i, j) = g();
  }
  return out;
}

inline Vector gaussian_vector(GaussianStream& g, Eigen::Index size) {
  Vector out(size);
  for (Eigen::Index i = 0; i < size; ++i) out[i] = g();
  return out;
}

/// C (row-major, m x n) then d (m), all standard normal from one stream.
inline ExperimentData generate_data(const ExperimentConfig& cfg) {
  cfg.validate();
  GaussianStream g(cfg.seed);
  RowMajorMatrix C = gaussian_matrix(g, cfg.m, cfg.n);
  Vector d = gaussian_vector(g, cfg.m);
  return make_data(std::move(C), std::move(d), cfg.lam);
}

/// psi(x) = lam ||Ax||_1 + (1/2)||Cx - d||^2 with A the difference operator.
inline double tv_objective(const ExperimentData& data, const Vector& x) {
  const Eigen::Index n = x.size();
  const double tv = (x.tail(n - 1) - x.head(n - 1)).lpNorm<1>();
  return data.lam * tv + 0.5 * (data.C->apply(x) - data.d).squaredNorm();
}

/**
 * The experiment as a composite problem: f = simplex indicator, g* = indicator
 * of the lam-box, h = least squares, A = difference operator. With the entropy
 * kernel h carries L1 as its constant, with the Euclidean kernel L2.
 */
inline CompositeProblem make_problem(const ExperimentData& data,
                                     std::shared_ptr<const BregmanKernel> kernel) {
  const Eigen::Index n = data.C->cols();
  const double L =
      kernel->strong_convexity_norm() == NormTag::L1 ? data.L1 : data.L2;
  auto shared = std::make_shared<const ExperimentData>(data);
  CompositeProblem p{simplex_indicator(n, std::move(kernel)),
                     linf_ball_indicator(n - 1, data.lam),
                     least_squares(data.C, data.d, L),
                     std::make_shared<const DifferenceOperator>(n),
                     std::nullopt,
                     [shared](const Vector& x) { return tv_objective(*shared, x); }};
  p.validate();
  return p;
}

/// Stepsizes with equality in the fixed-step conditions.
inline StepSizes cv_entropy_steps(const ExperimentData& data) {
  return {data.L1 / 2.0, 1.0 / (2.0 * data.L1)};
}

inline StepSizes pd3o_euclidean_steps(const ExperimentData& data) {
  return {data.L2 / 4.0, 1.0 / data.L2};
}

/// CV stepsizes for ||A||_2 <= 2 and L2: sigma tau 4 + tau L2 = 1/2 + 1/2.
inline StepSizes cv_euclidean_steps(const ExperimentData& data) {
  return {data.L2 / 4.0, 1.0 / (2.0 * data.L2)};
}

/// Equality-constrained variant:  minimize (1/2)||Cx - d||^2  s.t.  Ex = Ex_hat, x in the simplex.
struct EqualityData {
  ExperimentData base;
  std::shared_ptr<const DenseOperator> E;
  Vector rhs;    // E x_hat
  Vector x_hat;  // interior point of the simplex
  double norm_1_2 = 0.0;     // max column norm of E
  double norm_2_bound = 0.0; // inflated power-iteration estimate of ||E||_2
};

/// Stream layout: C, d as in generate_data, then E (row-major, p x n), then n uniforms for x_hat.
inline EqualityData generate_equality_data(const ExperimentConfig& cfg) {
  cfg.validate_equality();
  GaussianStream g(cfg.seed);
  RowMajorMatrix C = gaussian_matrix(g, cfg.m, cfg.n);
  Vector d = gaussian_vector(g, cfg.m);
  EqualityData out;
  out.base = make_data(std::move(C), std::move(d), cfg.lam);
  out.E = std::make_shared<const DenseOperator>(gaussian_matrix(g, cfg.p, cfg.n));
  out.x_hat = Vector(cfg.n);
  for (Eigen::Index i = 0; i < cfg.n; ++i) out.x_hat[i] = 0.5 + g.uniform();
  out.x_hat /= out.x_hat.sum();
  out.rhs = out.E->apply(out.x_hat);
  out.norm_1_2 = norm_1_2(*out.E);
  out.norm_2_bound = norm_spectral(*out.E, 1e-10, 100000).bound;
  return out;
}

inline CompositeProblem make_equality_problem(const EqualityData& data,
                                              std::shared_ptr<const BregmanKernel> kernel) {
  const Eigen::Index n = data.E->cols();
  const double L =
      kernel->strong_convexity_norm() == NormTag::L1 ? data.base.L1 : data.base.L2;
  auto h = least_squares(data.base.C, data.base.d, L);
  CompositeProblem p{simplex_indicator(n, std::move(kernel)),
                     affine_conjugate(data.rhs),
                     h,
                     data.E,
                     data.rhs,
                     [h](const Vector& x) { return h.value(x); }};
  p.validate();
  return p;
}

/// beta = L1^2 and the fixed-step tau solving beta ||E||^2 tau^2 + L1 tau = 1 (entropy kernel).
inline StepSizes equality_cv_steps(const EqualityData& data) {
  const double L = data.base.L1;
  const double beta = L * L;
  const double a2 = data.norm_1_2 * data.norm_1_2;
  const double tau = 2.0 / (L + std::sqrt(L * L + 4.0 * beta * a2));
  return {beta * tau, tau};
}

inline LineSearchConfig equality_line_search(const EqualityData& data, const ExperimentConfig& cfg) {
  LineSearchConfig ls;
  ls.beta = data.base.L1 * data.base.L1;
  ls.tau_init = equality_cv_steps(data).tau;
  ls.theta_bar = cfg.theta_bar;
  ls.delta = cfg.delta;
  return ls;
}

/// PD3O stepsizes for the Euclidean equality problem.
inline StepSizes equality_pd3o_steps(const EqualityData& data) {
  const double a2 = data.norm_2_bound * data.norm_2_bound;
  return {data.base.L2 / a2, 1.0 / data.base.L2};
}

// ---------------------------------------------------------------------------
// Reference solution

struct ReferenceSolution {
  Vector x_star;
  Vector z_star;
  double psi_star = 0.0;
  double kkt_residual = 0.0;
  std::int64_t iterations = 0;
};

struct ReferenceOptions {
  Algorithm algorithm = Algorithm::PD3O;
  StepSizes steps;
  std::int64_t budget = 100000;
  std::int64_t polish_window = 1000;
  double polish_tol = 1e-12;
  std::int64_t max_polish_windows = 1000;
  double kkt_tol = 1e-9;
};

/**
 * Run `opts.budget` iterations, then keep going in windows of
 * `polish_window` until the objective moves by less than `polish_tol`
 * across a window. The result must pass the KKT gate.
 */
inline ReferenceSolution compute_reference(const CompositeProblem& p, const Vector& x0,
                                           const Vector& z0, const ReferenceOptions& opts) {
  if (opts.budget < 100000) throw ConfigError("reference: budget must be at least 100000");
  if (!p.objective) throw ConfigError("reference: problem has no objective");
  SolverConfig cfg{opts.algorithm, opts.steps, {}};
  DiagnosticsConfig diag;
  diag.log_every = 0;
  RunResult r = run(p, cfg, x0, z0, StoppingRule{opts.budget}, diag);
  r.rethrow();
  double last = p.objective(r.state.x);
  for (std::int64_t w = 0; w < opts.max_polish_windows; ++w) {
    r = run(p, cfg, std::move(r.state), StoppingRule{opts.polish_window}, diag);
    r.rethrow();
    const double now = p.objective(r.state.x);
    const bool settled = std::abs(now - last) < opts.polish_tol;
    last = now;
    if (settled) break;
  }
  ReferenceSolution ref;
  ref.x_star = r.state.x;
  ref.z_star = r.state.z;
  ref.psi_star = last;
  ref.iterations = r.state.k;
  ref.kkt_residual = kkt_residual(p, ref.x_star, ref.z_star).max();
  if (!(ref.kkt_residual <= opts.kkt_tol)) {
    throw ReferenceError("reference: KKT residual above threshold; increase the budget",
                         ref.kkt_residual);
  }
  return ref;
}

inline ReferenceSolution compute_reference(const ExperimentData& data, std::int64_t budget,
                                           Algorithm algorithm = Algorithm::PD3O) {
  const CompositeProblem p = make_problem(data, euclidean_kernel());
  const Eigen::Index n = data.C->cols();
  ReferenceOptions opts;
  opts.algorithm = algorithm;
  opts.budget = budget;
  opts.steps = algorithm == Algorithm::PD3O ? pd3o_euclidean_steps(data) : cv_euclidean_steps(data);
  return compute_reference(p, Vector::Constant(n, 1.0 / n), Vector::Zero(n - 1), opts);
}

inline ReferenceSolution compute_reference(const EqualityData& data, std::int64_t budget) {
  const CompositeProblem p = make_equality_problem(data, euclidean_kernel());
  ReferenceOptions opts;
  opts.budget = budget;
  opts.steps = equality_pd3o_steps(data);
  return compute_reference(p, data.x_hat, Vector::Zero(data.E->rows()), opts);
}

// ---------------------------------------------------------------------------
// Benchmarks

struct TracePoint {
  std::int64_t k = 0;
  double time = 0.0;
  double rel_error = 0.0;
};

struct Trace {
  std::vector<TracePoint> points;
  std::vector<int> backtracks;  // per iteration, line search only

  /// First logged k from which the relative error stays <= threshold, if any.
  std::optional<std::int64_t> reaches(double threshold) const {
    std::optional<std::int64_t> from;
    for (const auto& pt : points) {
      if (pt.rel_error <= threshold) {
        if (!from) from = pt.k;
      } else {
        from.reset();
      }
    }
    return from;
  }
};

struct BenchmarkResult {
  std::optional<Trace> cv;
  std::optional<Trace> ls;
  std::optional<Trace> pd;
  double psi_star = 0.0;
};

namespace detail {

inline Trace trace_run(const CompositeProblem& p, const SolverConfig& cfg, SolverState start,
                       const ExperimentConfig& ecfg, double psi_star, const Clock& clock) {
  Trace t;
  DiagnosticsConfig diag;
  diag.log_every = ecfg.log_every;
  diag.clock = clock;
  if (cfg.algorithm == Algorithm::LineSearch) {
    diag.observer = [&t](const SolverState& st) { t.backtracks.push_back(st.backtracks); };
  }
  const RunResult r = run(p, cfg, std::move(start), StoppingRule{ecfg.iters}, diag);
  r.rethrow();
  if (ecfg.iters == 0) return t;
  for (const auto& rec : r.records) {
    t.points.push_back({rec.k, rec.wall_time, std::abs(rec.objective - psi_star) / psi_star});
  }
  return t;
}

}  // namespace detail

/// Entropy CV primal and Euclidean PD3O on the generated instance.
inline BenchmarkResult run_benchmark(const ExperimentConfig& cfg, const ExperimentData& data,
                                     double psi_star, const Clock& clock = {}) {
  const Eigen::Index n = data.C->cols();
  const Vector x0 = Vector::Constant(n, 1.0 / n);
  const Vector z0 = Vector::Zero(n - 1);
  BenchmarkResult out;
  out.psi_star = psi_star;

  const CompositeProblem cv_problem = make_problem(data, entropy_kernel());
  const StepSizes cv_steps = cv_entropy_steps(data);
  if (!validate_stepsizes(Algorithm::CVPrimal, cv_steps, std::sqrt(2.0), data.L1)) {
    throw ConfigError("internal: CV stepsizes violate their condition");
  }
  SolverConfig cv{Algorithm::CVPrimal, cv_steps, {}};
  out.cv = detail::trace_run(cv_problem, cv, initial_state(cv_problem, cv, x0, z0), cfg,
                             psi_star, clock);

  const CompositeProblem pd_problem = make_problem(data, euclidean_kernel());
  const StepSizes pd_steps = pd3o_euclidean_steps(data);
  if (!validate_stepsizes(Algorithm::PD3O, pd_steps, DifferenceOperator::spectral_norm_upper_bound(),
                          data.L2)) {
    throw ConfigError("internal: PD3O stepsizes violate their condition");
  }
  SolverConfig pd{Algorithm::PD3O, pd_steps, {}};
  out.pd = detail::trace_run(pd_problem, pd, initial_state(pd_problem, pd, x0, z0), cfg,
                             psi_star, clock);
  return out;
}

/// Fixed-step CV dual (cv columns) and the line search (ls columns) on the equality instance.
inline BenchmarkResult run_equality_benchmark(const ExperimentConfig& cfg, const EqualityData& data,
                                              double psi_star, const Clock& clock = {}) {
  const CompositeProblem p = make_equality_problem(data, entropy_kernel());
  const Vector z0 = Vector::Zero(data.E->rows());
  BenchmarkResult out;
  out.psi_star = psi_star;

  const StepSizes steps = equality_cv_steps(data);
  if (!validate_stepsizes(Algorithm::CVDual, steps, data.norm_1_2, data.base.L1)) {
    throw ConfigError("internal: CV stepsizes violate their condition");
  }
  SolverConfig cv{Algorithm::CVDual, steps, {}};
  out.cv = detail::trace_run(p, cv, initial_state(p, cv, data.x_hat, z0), cfg, psi_star, clock);

  SolverConfig ls{Algorithm::LineSearch, {}, equality_line_search(data, cfg)};
  out.ls = detail::trace_run(p, ls, initial_state(p, ls, data.x_hat, z0), cfg, psi_star, clock);
  return out;
}

// ---------------------------------------------------------------------------
// CSV output

inline constexpr const char* kCsvHeader = "cviter,cvtime,cvobj,lsiter,lstime,lsobj,pditer,pdtime,pdobj";

namespace detail {

inline void csv_cells(std::string& line, const std::optional<Trace>& t, std::size_t row) {
  char buf[64];
  if (t && row < t->points.size()) {
    const TracePoint& pt = t->points[row];
    std::snprintf(buf, sizeof buf, "%lld,%.6f,%.17g", static_cast<long long>(pt.k), pt.time,
                  pt.rel_error);
    line += buf;
  } else {
    line += ",,";
  }
}

}  // namespace detail

inline void write_csv(std::ostream& os, const BenchmarkResult& r) {
  os << kCsvHeader << '\n';
  std::size_t rows = 0;
  for (const auto* t : {&r.cv, &r.ls, &r.pd}) {
    if (*t) rows = std::max(rows, (*t)->points.size());
  }
  for (std::size_t row = 0; row < rows; ++row) {
    std::string line;
    detail::csv_cells(line, r.cv, row);
    line += ',';
    detail::csv_cells(line, r.ls, row);
    line += ',';
    detail::csv_cells(line, r.pd, row);
    os << line << '\n';
  }
}

inline void write_csv(const std::string& path, const BenchmarkResult& r) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw ConfigError("cannot open output file '" + path + "'");
  write_csv(os, r);
  if (!os.flush()) throw ConfigError("failed writing '" + path + "'");
}

}  // namespace bregman
