// Benchmark driver for the simplex-constrained total-variation least-squares experiment.
#include <algorithm>
#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "bregman/bregman.hpp"
#include "bregman/reference_io.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;

struct Options {
  bregman::ExperimentConfig cfg;
  std::string ref_path;
  std::int64_t budget = 100000;
  std::string clock = "wall";
};

void add_instance_flags(CLI::App* app, Options& o) {
  app->add_option("--m", o.cfg.m, "rows of C")->capture_default_str();
  app->add_option("--n", o.cfg.n, "dimension of x")->capture_default_str();
  app->add_option("--lam", o.cfg.lam, "weight of the total-variation term")->capture_default_str();
  app->add_option("--seed", o.cfg.seed, "instance seed")->capture_default_str();
}

void add_run_flags(CLI::App* app, Options& o) {
  add_instance_flags(app, o);
  app->add_option("--iters", o.cfg.iters, "iterations per solver")->capture_default_str();
  app->add_option("--log-every", o.cfg.log_every, "CSV row spacing in iterations")
      ->capture_default_str();
  app->add_option("--out", o.cfg.output_path, "CSV output path")->required();
  app->add_option("--ref", o.ref_path, "reference JSON (computed when omitted)");
  app->add_option("--budget", o.budget, "reference iterations when --ref is omitted")
      ->capture_default_str();
  app->add_option("--clock", o.clock, "time column source: wall or none")
      ->check(CLI::IsMember({"wall", "none"}))
      ->capture_default_str();
}

bregman::Clock make_clock(const Options& o) {
  return o.clock == "none" ? bregman::frozen_clock() : bregman::steady_clock_seconds();
}

bregman::ReferenceSolution obtain_reference(const Options& o, const bregman::ExperimentData& data) {
  if (o.ref_path.empty()) return bregman::compute_reference(data, o.budget);
  bregman::ReferenceProvenance prov;
  auto ref = bregman::load_reference(o.ref_path, &prov);
  if (prov.seed != o.cfg.seed || prov.m != o.cfg.m || prov.n != o.cfg.n || prov.lam != o.cfg.lam) {
    throw bregman::ConfigError("reference file was computed for a different instance");
  }
  return ref;
}

int cmd_run(const Options& o) {
  const auto data = bregman::generate_data(o.cfg);
  const auto ref = obtain_reference(o, data);
  const auto result = bregman::run_benchmark(o.cfg, data, ref.psi_star, make_clock(o));
  bregman::write_csv(o.cfg.output_path, result);
  std::fprintf(stderr, "psi* = %.12g (kkt %.2e)\n", ref.psi_star, ref.kkt_residual);
  return kExitOk;
}

int cmd_equality(const Options& o) {
  const auto data = bregman::generate_equality_data(o.cfg);
  const auto ref = bregman::compute_reference(data, o.budget);
  const auto result = bregman::run_equality_benchmark(o.cfg, data, ref.psi_star, make_clock(o));
  bregman::write_csv(o.cfg.output_path, result);
  std::vector<int> bt = result.ls->backtracks;
  double median = 0.0;
  if (!bt.empty()) {
    std::nth_element(bt.begin(), bt.begin() + bt.size() / 2, bt.end());
    median = bt[bt.size() / 2];
  }
  std::fprintf(stderr, "psi* = %.12g (kkt %.2e), median backtracks %.0f\n", ref.psi_star,
               ref.kkt_residual, median);
  return kExitOk;
}

int cmd_reference(const Options& o, const std::string& out) {
  const auto data = bregman::generate_data(o.cfg);
  const auto ref = bregman::compute_reference(data, o.budget);
  bregman::save_reference(out, ref, {o.cfg.seed, o.cfg.m, o.cfg.n, o.cfg.lam});
  std::fprintf(stderr, "psi* = %.12g after %lld iterations (kkt %.2e)\n", ref.psi_star,
               static_cast<long long>(ref.iterations), ref.kkt_residual);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bregman primal-dual benchmark"};
  app.require_subcommand(1);
  Options o;

  auto* run = app.add_subcommand("run", "CV primal (entropy) and PD3O on the generated instance");
  add_run_flags(run, o);

  auto* eq = app.add_subcommand("equality", "fixed-step and line-search CV dual, equality instance");
  add_run_flags(eq, o);
  eq->add_option("--theta-bar", o.cfg.theta_bar, "first line-search trial factor")
      ->capture_default_str();
  eq->add_option("--delta", o.cfg.delta, "line-search acceptance parameter")->capture_default_str();
  eq->add_option("--p", o.cfg.p, "rows of the equality constraint")->capture_default_str();

  std::string ref_out;
  auto* ref = app.add_subcommand("reference", "compute and store the reference solution");
  add_instance_flags(ref, o);
  ref->add_option("--budget", o.budget, "iterations before polishing")->capture_default_str();
  ref->add_option("--out", ref_out, "JSON output path")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    o.cfg.validate();
    if (*run) return cmd_run(o);
    if (*eq) {
      o.cfg.validate_equality();
      return cmd_equality(o);
    }
    return cmd_reference(o, ref_out);
  } catch (const bregman::ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const bregman::DimensionError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const bregman::Error& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return kExitNumerical;
  }
}
