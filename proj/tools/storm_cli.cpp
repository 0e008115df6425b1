// Experiment driver: replicated trust-region runs over an epsilon grid,
// radius-walk validation, bound rechecks, and constant printouts.

#include <cstdio>
#include <exception>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "storm/config.hpp"
#include "storm/csv.hpp"
#include "storm/errors.hpp"
#include "storm/harness.hpp"
#include "storm/oracle.hpp"
#include "storm/stats.hpp"
#include "storm/walk.hpp"

namespace {

using namespace storm;

struct Flags {
  std::string config_path;
  std::string problem = "quadratic";
  int dim = 2;
  double sigma = 0.0, sigma_g = 0.0, cond = 10.0;
  int data_n = 2000, batch = 32;
  std::uint64_t problem_seed = 1;
  double gamma = 2.0, eta1 = 0.1, eta2 = 0.05;
  double delta0 = 1.0, delta_max = 64.0;
  double kappa_fcd = 0.5, kappa_ef = 10.0, kappa_eg = 10.0, kappa_bhm = 1.0;
  double eps_f = 0.0;
  std::int64_t max_iters = 100000;
  double alpha = 0.9, beta = 0.95;
  double nu = -1.0, zeta = -1.0;
  bool exact = false;
  std::string rule = "chebyshev";
  double budget_cap = std::numeric_limits<double>::infinity();
  double failure_prob = 0.0, corruption_offset = 0.0;
  std::vector<double> epsilons;
  int reps = 1;
  std::uint64_t seed = 0;
  std::string out = "out";
  bool trace = false;
  int threads = 1;
};

void add_plan_flags(CLI::App* cmd, Flags& f) {
  cmd->add_option("--config", f.config_path, "flat key=value plan file; flags override");
  cmd->add_option("--problem", f.problem, "quadratic | rosenbrock | logistic");
  cmd->add_option("--dim", f.dim, "problem dimension");
  cmd->add_option("--sigma", f.sigma, "value noise scale");
  cmd->add_option("--sigma-g", f.sigma_g, "gradient noise scale");
  cmd->add_option("--cond", f.cond, "quadratic condition number");
  cmd->add_option("--data-n", f.data_n, "logistic dataset size");
  cmd->add_option("--batch", f.batch, "logistic minibatch size");
  cmd->add_option("--problem-seed", f.problem_seed, "dataset generation seed");
  cmd->add_option("--gamma", f.gamma, "radius growth factor");
  cmd->add_option("--eta1", f.eta1, "acceptance threshold on rho");
  cmd->add_option("--eta2", f.eta2, "acceptance threshold on |g|/delta");
  cmd->add_option("--delta0", f.delta0, "initial radius");
  cmd->add_option("--delta-max", f.delta_max, "radius cap");
  cmd->add_option("--kappa-fcd", f.kappa_fcd, "Cauchy decrease fraction");
  cmd->add_option("--kappa-ef", f.kappa_ef, "model value accuracy scale");
  cmd->add_option("--kappa-eg", f.kappa_eg, "model gradient accuracy scale");
  cmd->add_option("--kappa-bhm", f.kappa_bhm, "model hessian norm cap");
  cmd->add_option("--eps-f", f.eps_f, "estimate accuracy scale");
  cmd->add_option("--max-iters", f.max_iters, "iteration cap per run");
  cmd->add_option("--alpha", f.alpha, "model accuracy probability");
  cmd->add_option("--beta", f.beta, "estimate accuracy probability");
  cmd->add_option("--nu", f.nu, "potential weight (negative: default)");
  cmd->add_option("--zeta", f.zeta, "radius threshold scale (negative: default)");
  cmd->add_flag("--exact", f.exact, "noiseless oracle, no sampling");
  cmd->add_option("--rule", f.rule, "sample-size rule: chebyshev | bernstein");
  cmd->add_option("--budget-cap", f.budget_cap, "max oracle draws per build");
  cmd->add_option("--failure-prob", f.failure_prob, "per-query corruption probability");
  cmd->add_option("--corruption-offset", f.corruption_offset, "additive corruption size");
  cmd->add_option("--epsilon", f.epsilons, "accuracy targets, comma separated or repeatable, descending")
      ->delimiter(',');
  cmd->add_option("--reps", f.reps, "replications per epsilon");
  cmd->add_option("--seed", f.seed, "master seed");
  cmd->add_option("--out", f.out, "output directory");
  cmd->add_flag("--trace", f.trace, "write per-iteration traces.csv");
  cmd->add_option("--threads", f.threads, "worker threads");
}

ExperimentPlan build_plan(const CLI::App* cmd, const Flags& f) {
  ExperimentPlan plan;
  if (cmd->count("--config")) plan = read_plan(f.config_path);
  auto on = [cmd](const char* name) { return cmd->count(name) > 0; };
  if (on("--problem")) plan.problem.name = f.problem;
  if (on("--dim")) plan.problem.dim = f.dim;
  if (on("--sigma")) plan.problem.sigma = f.sigma;
  if (on("--sigma-g")) plan.problem.sigma_g = f.sigma_g;
  if (on("--cond")) plan.problem.cond = f.cond;
  if (on("--data-n")) plan.problem.data_n = f.data_n;
  if (on("--batch")) plan.problem.batch = f.batch;
  if (on("--problem-seed")) plan.problem.seed = f.problem_seed;
  if (on("--gamma")) plan.config.gamma = f.gamma;
  if (on("--eta1")) plan.config.eta1 = f.eta1;
  if (on("--eta2")) plan.config.eta2 = f.eta2;
  if (on("--delta0")) plan.config.delta0 = f.delta0;
  if (on("--delta-max")) plan.config.delta_max = f.delta_max;
  if (on("--kappa-fcd")) plan.config.kappa_fcd = f.kappa_fcd;
  if (on("--kappa-ef")) plan.config.kappa_ef = f.kappa_ef;
  if (on("--kappa-eg")) plan.config.kappa_eg = f.kappa_eg;
  if (on("--kappa-bhm")) plan.config.kappa_bhm = f.kappa_bhm;
  if (on("--eps-f")) plan.config.eps_f = f.eps_f;
  if (on("--max-iters")) plan.config.max_iters = f.max_iters;
  if (on("--alpha")) plan.alpha = f.alpha;
  if (on("--beta")) plan.beta = f.beta;
  if (on("--nu")) plan.potential.nu = f.nu;
  if (on("--zeta")) plan.potential.zeta = f.zeta;
  if (on("--exact")) plan.oracle.exact = f.exact;
  if (on("--rule")) {
    if (f.rule == "chebyshev") {
      plan.oracle.rule = SampleRule::chebyshev;
    } else if (f.rule == "bernstein") {
      plan.oracle.rule = SampleRule::bernstein;
    } else {
      throw ConfigError("rule must be chebyshev or bernstein");
    }
  }
  if (on("--budget-cap")) plan.oracle.budget_cap = f.budget_cap;
  if (on("--failure-prob")) plan.oracle.failure_prob = f.failure_prob;
  if (on("--corruption-offset")) plan.oracle.corruption_offset = f.corruption_offset;
  if (on("--epsilon")) plan.epsilon_grid = f.epsilons;
  if (on("--reps")) plan.replications = f.reps;
  if (on("--seed")) plan.master_seed = f.seed;
  if (on("--out")) plan.output_dir = f.out;
  if (on("--trace")) plan.trace = f.trace;
  if (on("--threads")) plan.threads = f.threads;
  return plan;
}

void print_stats(const SummaryStats& stats) {
  std::printf("%-10s %5s %8s %12s %12s %12s %14s %s\n", "epsilon", "n", "timeout", "mean_T",
              "median_T", "sem", "bound", "ok");
  for (const EpsilonSummary& es : stats.per_epsilon) {
    std::printf("%-10g %5d %8d %12.4g %12.4g %12.4g %14.6g %s%s\n", es.epsilon, es.n, es.timeouts,
                es.mean_t, es.median_t, es.sem_t, es.bound_user_nu,
                es.bound_pass ? "pass" : "FAIL", es.censored ? " (censored)" : "");
  }
  if (stats.slope) {
    std::printf("complexity slope: %.4f (stderr %.4f)\n", stats.slope->slope,
                stats.slope->slope_stderr);
  } else {
    std::printf("complexity slope: not reported (needs >= 3 well-measured epsilons)\n");
  }
  if (!stats.drift_bins.empty()) {
    std::printf("%-12s %-12s %8s %14s %14s %s\n", "delta_lo", "delta_hi", "count", "mean_v",
                "target", "ok");
    for (const DriftBin& bin : stats.drift_bins) {
      std::printf("%-12.5g %-12.5g %8lld %14.6g %14.6g %s\n", bin.delta_lo, bin.delta_hi,
                  static_cast<long long>(bin.count), bin.mean_v, bin.target,
                  bin.count >= 200 ? (bin.pass ? "pass" : "FAIL") : "(thin)");
    }
  }
  std::printf("interarrivals: count=%zu mean=%.5g bound=%.5g %s\n",
              stats.interarrival_pooled.count, stats.interarrival_pooled.mean,
              stats.interarrival_bound, stats.interarrival_pass ? "pass" : "FAIL");
  std::printf("violations: cauchy=%lld guarantee=%lld decrease=%lld box_exits=%lld\n",
              static_cast<long long>(stats.cauchy_violations),
              static_cast<long long>(stats.guarantee_violations),
              static_cast<long long>(stats.decrease_violations),
              static_cast<long long>(stats.box_exits));
  std::printf("overall: %s\n", stats.all_pass() ? "PASS" : "FAIL");
}

int cmd_run(const CLI::App* cmd, const Flags& f) {
  const ExperimentPlan plan = build_plan(cmd, f);
  const PlanOutcome outcome = run_plan(plan);
  print_stats(outcome.stats);
  std::printf("artifacts in %s\n", plan.output_dir.c_str());
  return outcome.stats.all_pass() ? 0 : 1;
}

int cmd_renewal(double p, long long steps, double lambda, double delta0, double delta_eps,
                double delta_max, std::uint64_t seed) {
  WalkConfig cfg;
  cfg.p = p;
  cfg.lambda = lambda;
  cfg.delta0 = delta0;
  cfg.delta_eps = delta_eps;
  cfg.delta_max = delta_max;
  cfg.seed = seed;
  const std::vector<double> trace = simulate_walk(cfg, steps);
  const RenewalTrace renewal = measure_interarrivals(trace, cfg.delta_eps);
  const InterarrivalStats stats = interarrival_stats(trace, renewal, cfg.delta_eps);
  const double bound = theoretical_interarrival_bound(p);
  const double limit = bound + 3.0 * stats.pooled.sem();
  const bool pass = stats.pooled.count == 0 || stats.pooled.mean <= limit;
  std::printf("steps=%lld renewals=%zu\n", steps, stats.pooled.count);
  std::printf("mean tau            %.6f (sem %.2g)\n", stats.pooled.mean, stats.pooled.sem());
  std::printf("  from threshold    %.6f (n=%zu)\n", stats.from_threshold.mean,
              stats.from_threshold.count);
  std::printf("  from above        %.6f (n=%zu)\n", stats.from_above.mean,
              stats.from_above.count);
  std::printf("lag-1 autocorr      %.4f\n", stats.lag1);
  std::printf("bound p/(2p-1)      %.6f  (+3 sem: %.6f)\n", bound, limit);
  std::printf("overall: %s\n", pass ? "PASS" : "FAIL");
  return pass ? 0 : 1;
}

int cmd_validate(const std::string& dir) {
  const std::filesystem::path out(dir);
  const ExperimentPlan plan = read_plan(out / "plan.cfg");
  const std::vector<RunRow> rows = read_runs_csv(out / "runs.csv");
  SummaryStats stats = read_summary_csv(out / "summary.csv");

  // Rebuild the per-epsilon table from the raw rows; keep only delta0 (not
  // recoverable from runs.csv) from the stored summary.
  std::vector<EpsilonSummary> rebuilt;
  for (std::size_t i = 0; i < plan.epsilon_grid.size(); ++i) {
    EpsilonSummary es;
    es.epsilon = plan.epsilon_grid[i];
    for (const EpsilonSummary& old : stats.per_epsilon) {
      if (old.epsilon == es.epsilon) es.delta0_used = old.delta0_used;
    }
    std::vector<double> finished, censored;
    for (const RunRow& row : rows) {
      if (row.epsilon != es.epsilon) continue;
      censored.push_back(row.t_eps);
      if (row.timeout) {
        ++es.timeouts;
      } else {
        finished.push_back(row.t_eps);
      }
    }
    es.n = static_cast<int>(finished.size());
    es.censored = es.timeouts > 0;
    if (!finished.empty()) {
      const Summary s = summarize(finished);
      es.mean_t = s.mean;
      es.median_t = s.median;
      es.std_t = s.stddev;
      es.sem_t = s.sem();
    }
    if (!censored.empty()) {
      const Summary s = summarize(censored);
      es.mean_censored = s.mean;
      es.sem_censored = s.sem();
    }
    rebuilt.push_back(es);
  }
  stats.per_epsilon = rebuilt;

  const BoundReport report = validate_bound(stats, plan);
  std::printf("nu default %.8f, plan %.8f; phi0 %.6g / %.6g\n", report.nu_default, report.nu_user,
              report.phi0_default_nu, report.phi0_user_nu);
  std::printf("%-10s %12s %12s %16s %16s %s\n", "epsilon", "mean_T", "sem", "bound(default)",
              "bound(plan)", "ok");
  bool pass = report.pass;
  for (const BoundRow& row : report.rows) {
    std::printf("%-10g %12.4g %12.4g %16.6g %16.6g %s\n", row.epsilon, row.mean_t, row.sem_t,
                row.bound_default_nu, row.bound_user_nu, row.pass ? "pass" : "FAIL");
  }
  pass = pass && stats.interarrival_pass && stats.cauchy_violations == 0 &&
         stats.guarantee_violations == 0 && stats.decrease_violations == 0;
  std::printf("interarrivals: mean=%.5g bound=%.5g %s\n", stats.interarrival_pooled.mean,
              stats.interarrival_bound, stats.interarrival_pass ? "pass" : "FAIL");
  std::printf("violations: cauchy=%lld guarantee=%lld decrease=%lld\n",
              static_cast<long long>(stats.cauchy_violations),
              static_cast<long long>(stats.guarantee_violations),
              static_cast<long long>(stats.decrease_violations));
  std::printf("overall: %s\n", pass ? "PASS" : "FAIL");
  return pass ? 0 : 1;
}

int cmd_constants(const CLI::App* cmd, const Flags& f) {
  const ExperimentPlan plan = build_plan(cmd, f);
  plan.config.validate();
  const TestProblem problem = plan.problem.materialize();
  const DriftConstants dc = drift_constants(plan.config, problem.lipschitz);
  const double nu = plan.potential.nu_or_default(plan.config);
  const double zeta = plan.potential.zeta_or_default(plan.config);
  std::printf("problem %s: dim=%d L=%.6g f(x0)=%.6g\n", plan.problem.name.c_str(),
              plan.problem.dim, problem.lipschitz, problem.f(problem.x0));
  std::printf("theta      %s\n", format_double(dc.theta).c_str());
  std::printf("zeta       %s\n", format_double(dc.zeta).c_str());
  std::printf("c1         %s\n", format_double(dc.c1).c_str());
  std::printf("c2         %s\n", format_double(dc.c2).c_str());
  std::printf("c3         %s\n", format_double(dc.c3).c_str());
  std::printf("beta_min   %s\n", format_double(dc.beta_min).c_str());
  std::printf("ratio_rhs  %s\n", format_double(dc.ratio_rhs).c_str());
  std::printf("nu         %s\n", format_double(nu).c_str());
  std::printf("zeta(pot)  %s\n", format_double(zeta).c_str());
  std::printf("ball condition kappa_ef >= L/2 + kappa_eg: %s\n",
              ball_condition_sufficient(plan.config.kappa_ef, plan.config.kappa_eg,
                                        problem.lipschitz)
                  ? "holds"
                  : "not guaranteed");
  const double a = plan.effective_alpha(), b = plan.effective_beta();
  const bool ok = dc.feasible(a, b);
  std::printf("alpha=%g beta=%g -> %s\n", a, b, ok ? "feasible" : "infeasible");
  if (b > 0.5 && b >= dc.beta_min && b <= 1.0) {
    std::printf("alpha_min(beta) %s\n", format_double(dc.alpha_min_for(b)).c_str());
  }
  for (double eps : plan.epsilon_grid) {
    std::printf("epsilon %-10g delta_eps %s\n", eps, format_double(eps / zeta).c_str());
  }
  return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"stochastic trust-region experiment driver"};
  app.require_subcommand(1);
  Flags flags;

  CLI::App* run = app.add_subcommand("run", "run a replicated experiment plan");
  add_plan_flags(run, flags);

  CLI::App* renewal = app.add_subcommand("renewal", "validate the radius-walk renewal bounds");
  double p = 0.75, lambda = 0.6931471805599453, delta0 = 1.0, delta_eps = 1.0, delta_max = 1024.0;
  long long steps = 1000000;
  std::uint64_t walk_seed = 0;
  renewal->add_option("--p", p, "up-step probability");
  renewal->add_option("--steps", steps, "walk length");
  renewal->add_option("--lambda", lambda, "log step ratio");
  renewal->add_option("--delta0", delta0, "start radius");
  renewal->add_option("--delta-eps", delta_eps, "renewal threshold");
  renewal->add_option("--delta-max", delta_max, "radius cap");
  renewal->add_option("--seed", walk_seed, "walk seed");

  CLI::App* validate = app.add_subcommand("validate", "recheck bounds from existing artifacts");
  std::string dir = "out";
  validate->add_option("dir,--out", dir, "artifact directory with plan.cfg and runs.csv");

  CLI::App* constants = app.add_subcommand("constants", "print the drift constants for a config");
  add_plan_flags(constants, flags);

  CLI11_PARSE(app, argc, argv);
  try {
    if (run->parsed()) return cmd_run(run, flags);
    if (renewal->parsed()) {
      return cmd_renewal(p, steps, lambda, delta0, delta_eps, delta_max, walk_seed);
    }
    if (validate->parsed()) return cmd_validate(dir);
    if (constants->parsed()) return cmd_constants(constants, flags);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 2;
}
