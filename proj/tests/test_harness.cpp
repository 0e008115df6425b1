#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "storm/errors.hpp"
#include "storm/harness.hpp"

using namespace storm;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& tag) {
  const fs::path p = fs::temp_directory_path() / ("storm_test_" + tag);
  fs::remove_all(p);
  return p;
}

std::vector<std::string> read_lines(const fs::path& p) {
  std::ifstream is(p);
  REQUIRE(is.good());
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(is, line)) lines.push_back(line);
  return lines;
}

// A line with the trailing column removed; runs.csv ends with wall time.
std::string drop_last_field(const std::string& line) {
  const auto pos = line.rfind(',');
  return pos == std::string::npos ? line : line.substr(0, pos);
}

ExperimentPlan small_noisy_plan(const std::string& dir_tag) {
  ExperimentPlan plan;
  plan.problem.name = "quadratic";
  plan.problem.dim = 2;
  plan.problem.cond = 10.0;
  plan.problem.sigma = 0.05;
  plan.problem.sigma_g = 0.05;
  plan.config.eps_f = 1e-5;
  plan.alpha = 0.9;
  plan.beta = 0.9999995;
  plan.epsilon_grid = {1e-2};
  plan.replications = 3;
  plan.master_seed = 7;
  plan.output_dir = fresh_dir(dir_tag).string();
  return plan;
}

}  // namespace

TEST_CASE("stopping-time ceiling: frozen value, scaling, and domain") {
  // alpha = beta = 1 makes the prefactor 1; theta = 1/16000 at kappa_ef = 10:
  // 20*2*10*16000/0.01 + 20*1*10/0.1 + 1 = 640002001.
  CHECK(theoretical_complexity_bound(1.0, 1.0, 2.0, 10.0, 10.0, 1.0, 0.1) ==
        doctest::Approx(640002001.0).epsilon(1e-12));

  // Small epsilon is dominated by the epsilon^-2 term.
  const double b1 = theoretical_complexity_bound(0.9, 0.95, 2.0, 10.0, 10.0, 1.0, 1e-6);
  const double b2 = theoretical_complexity_bound(0.9, 0.95, 2.0, 10.0, 10.0, 1.0, 5e-7);
  CHECK(b2 / b1 == doctest::Approx(4.0).epsilon(1e-3));

  // Probability prefactor ab / (2ab - 1).
  const double base = theoretical_complexity_bound(1.0, 1.0, 2.0, 10.0, 10.0, 1.0, 0.1);
  const double scaled = theoretical_complexity_bound(0.9, 0.9, 2.0, 10.0, 10.0, 1.0, 0.1);
  CHECK(scaled / base == doctest::Approx((0.81 / 0.62)).epsilon(1e-12));

  CHECK_THROWS_AS(theoretical_complexity_bound(1.0, 0.5, 2.0, 10.0, 10.0, 1.0, 0.1),
                  std::domain_error);
  CHECK_THROWS_AS(theoretical_complexity_bound(0.5, 0.9, 2.0, 10.0, 10.0, 1.0, 0.1),
                  std::domain_error);
  CHECK_THROWS_AS(theoretical_complexity_bound(1.0, 1.0, 2.0, 10.0, 10.0, 1.0, 0.0),
                  std::domain_error);
  CHECK_THROWS_AS(theoretical_complexity_bound(1.0, 1.0, -1.0, 10.0, 10.0, 1.0, 0.1),
                  std::domain_error);
}

TEST_CASE("plan validation rejects malformed and unsatisfiable plans") {
  ExperimentPlan plan = small_noisy_plan("validate");
  CHECK_NOTHROW(plan.validate());

  SUBCASE("accuracy pair below the drift threshold") {
    plan.beta = 0.9;  // far under the minimal estimate probability
    try {
      plan.validate();
      FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
      const std::string what = e.what();
      CHECK(what.find("alpha=0.9") != std::string::npos);
      CHECK(what.find("beta=0.9") != std::string::npos);
      CHECK(what.find("infeasible") != std::string::npos);
    }
  }
  SUBCASE("exact oracles lift the accuracy pair to certainty") {
    plan.beta = 0.9;
    plan.oracle.exact = true;
    CHECK_NOTHROW(plan.validate());
  }
  SUBCASE("epsilon grid must be strictly descending and positive") {
    plan.epsilon_grid = {1e-3, 1e-2};
    CHECK_THROWS_AS(plan.validate(), ConfigError);
    plan.epsilon_grid = {1e-2, 1e-2};
    CHECK_THROWS_AS(plan.validate(), ConfigError);
    plan.epsilon_grid = {1e-2, 0.0};
    CHECK_THROWS_AS(plan.validate(), ConfigError);
    plan.epsilon_grid = {};
    CHECK_THROWS_AS(plan.validate(), ConfigError);
  }
  SUBCASE("problem-level mistakes") {
    plan.problem.name = "banana";
    CHECK_THROWS_AS(plan.validate(), ConfigError);
    plan.problem.name = "rosenbrock";
    plan.problem.dim = 3;
    CHECK_THROWS_AS(plan.validate(), ConfigError);
    plan.problem = ProblemSpec{};
    plan.problem.name = "logistic";
    plan.problem.data_n = 32;
    plan.problem.batch = 64;
    CHECK_THROWS_AS(plan.validate(), ConfigError);
  }
  SUBCASE("replication and thread counts") {
    plan.replications = 0;
    CHECK_THROWS_AS(plan.validate(), ConfigError);
    plan.replications = 1;
    plan.threads = 0;
    CHECK_THROWS_AS(plan.validate(), ConfigError);
  }
  SUBCASE("a failing plan writes nothing") {
    plan.epsilon_grid = {};
    CHECK_THROWS_AS(run_plan(plan), ConfigError);
    CHECK_FALSE(fs::exists(plan.output_dir));
  }
}

TEST_CASE("plan files round trip byte for byte") {
  ExperimentPlan plan;
  plan.problem.name = "logistic";
  plan.problem.dim = 5;
  plan.problem.sigma = 0.3;
  plan.problem.sigma_g = 0.2;
  plan.problem.cond = 25.0;
  plan.problem.data_n = 500;
  plan.problem.batch = 16;
  plan.problem.seed = 9;
  plan.config.gamma = 1.5;
  plan.config.eta2 = 0.04;
  plan.config.delta0 = 0.5;
  plan.config.delta_max = 32.0;
  plan.config.eps_f = 1e-4;
  plan.config.max_iters = 5000;
  plan.potential.nu = 0.999;
  plan.potential.zeta = 250.0;
  plan.alpha = 0.91;
  plan.beta = 0.99999;
  plan.oracle.rule = SampleRule::bernstein;
  plan.oracle.budget_cap = 1e6;
  plan.oracle.failure_prob = 0.02;
  plan.oracle.corruption_offset = 1e6;
  plan.epsilon_grid = {1e-2, 3.3e-3, 1e-3};
  plan.replications = 7;
  plan.master_seed = 99;
  plan.output_dir = "some/dir";
  plan.trace = true;
  plan.threads = 2;

  const fs::path dir = fresh_dir("plan_rt");
  fs::create_directories(dir);
  const fs::path a = dir / "a.cfg", b = dir / "b.cfg";
  write_plan(plan, a);
  const ExperimentPlan back = read_plan(a);
  write_plan(back, b);
  CHECK(read_lines(a) == read_lines(b));

  CHECK(back.problem.name == plan.problem.name);
  CHECK(back.problem.dim == plan.problem.dim);
  CHECK(back.problem.sigma == plan.problem.sigma);
  CHECK(back.problem.data_n == plan.problem.data_n);
  CHECK(back.problem.batch == plan.problem.batch);
  CHECK(back.problem.seed == plan.problem.seed);
  CHECK(back.config.gamma == plan.config.gamma);
  CHECK(back.config.eta2 == plan.config.eta2);
  CHECK(back.config.eps_f == plan.config.eps_f);
  CHECK(back.config.max_iters == plan.config.max_iters);
  CHECK(back.potential.nu == plan.potential.nu);
  CHECK(back.potential.zeta == plan.potential.zeta);
  CHECK(back.alpha == plan.alpha);
  CHECK(back.beta == plan.beta);
  CHECK((back.oracle.rule == SampleRule::bernstein));
  CHECK(back.oracle.budget_cap == plan.oracle.budget_cap);
  CHECK(back.oracle.failure_prob == plan.oracle.failure_prob);
  CHECK(back.oracle.corruption_offset == plan.oracle.corruption_offset);
  CHECK(back.epsilon_grid == plan.epsilon_grid);
  CHECK(back.replications == plan.replications);
  CHECK(back.master_seed == plan.master_seed);
  CHECK(back.trace == plan.trace);
  CHECK(back.threads == plan.threads);

  // Comments are ignored; unknown keys are not.
  {
    std::ofstream os(dir / "weird.cfg");
    os << "# comment\nreps=3\nbogus_key=1\n";
  }
  CHECK_THROWS_AS(read_plan(dir / "weird.cfg"), ConfigError);
  fs::remove_all(dir);
}

TEST_CASE("runs csv preserves doubles exactly") {
  std::vector<RunRow> rows(2);
  rows[0].epsilon = 0.1;
  rows[0].rep = 3;
  rows[0].t_eps = 12345.0;
  rows[0].timeout = true;
  rows[0].f_final = 1.0 / 3.0;
  rows[0].grad_norm_final = 1e-300;
  rows[0].value_samples = 9.007199254740993e15;
  rows[0].grad_samples = 42.0;
  rows[0].wall_ns = 123456789;
  rows[1].epsilon = 2.5e-4;
  rows[1].f_final = -0.0;
  rows[1].grad_norm_final = 1e300;

  const fs::path dir = fresh_dir("runs_rt");
  fs::create_directories(dir);
  write_runs_csv(rows, dir / "runs.csv");
  const auto back = read_runs_csv(dir / "runs.csv");
  REQUIRE(back.size() == 2);
  CHECK(back[0].epsilon == rows[0].epsilon);
  CHECK(back[0].rep == rows[0].rep);
  CHECK(back[0].t_eps == rows[0].t_eps);
  CHECK(back[0].timeout == rows[0].timeout);
  CHECK(back[0].f_final == rows[0].f_final);
  CHECK(back[0].grad_norm_final == rows[0].grad_norm_final);
  CHECK(back[0].value_samples == rows[0].value_samples);
  CHECK(back[0].wall_ns == rows[0].wall_ns);
  CHECK(back[1].grad_norm_final == 1e300);
  CHECK(std::signbit(back[1].f_final));
  fs::remove_all(dir);
}

TEST_CASE("a full plan run is reproducible except for wall-clock columns") {
  ExperimentPlan plan = small_noisy_plan("repro_a");
  const PlanOutcome first = run_plan(plan);
  const fs::path dir_a = plan.output_dir;
  plan.output_dir = fresh_dir("repro_b").string();
  const PlanOutcome second = run_plan(plan);
  const fs::path dir_b = plan.output_dir;

  CHECK(fs::exists(dir_a / "runs.csv"));
  CHECK(fs::exists(dir_a / "summary.csv"));
  CHECK(fs::exists(dir_a / "plan.cfg"));
  CHECK_FALSE(fs::exists(dir_a / "traces.csv"));

  const auto lines_a = read_lines(dir_a / "runs.csv");
  const auto lines_b = read_lines(dir_b / "runs.csv");
  REQUIRE(lines_a.size() == lines_b.size());
  REQUIRE(lines_a.size() == 4);  // header + 1 epsilon * 3 reps
  for (std::size_t i = 0; i < lines_a.size(); ++i) {
    CHECK(drop_last_field(lines_a[i]) == drop_last_field(lines_b[i]));
  }

  REQUIRE(first.stats.per_epsilon.size() == 1);
  CHECK(first.stats.per_epsilon[0].mean_t == second.stats.per_epsilon[0].mean_t);
  CHECK(first.stats.per_epsilon[0].n == 3);
  CHECK(first.stats.per_epsilon[0].timeouts == 0);
  CHECK_FALSE(first.stats.slope.has_value());  // one epsilon cannot fit a line

  // Every replication stopped and stayed within the iteration budget.
  for (const RunRow& row : first.rows) {
    CHECK_FALSE(row.timeout);
    CHECK(row.grad_norm_final <= 1e-2);
    CHECK(row.value_samples > 0.0);
    CHECK(row.grad_samples > 0.0);
  }

  fs::remove_all(dir_a);
  fs::remove_all(dir_b);
}

TEST_CASE("tracing adds a per-iteration file with the documented header") {
  ExperimentPlan plan = small_noisy_plan("trace");
  plan.replications = 1;
  plan.trace = true;
  run_plan(plan);
  const auto lines = read_lines(fs::path(plan.output_dir) / "traces.csv");
  REQUIRE(lines.size() >= 2);
  CHECK(lines[0] ==
        "epsilon,rep,k,delta,rho,success,model_decrease,f_true,grad_norm_true,phi,v_k,i_k,j_k");
  fs::remove_all(plan.output_dir);
}

TEST_CASE("summary csv round trips the aggregate statistics") {
  ExperimentPlan plan = small_noisy_plan("summary_rt");
  const PlanOutcome outcome = run_plan(plan);
  const SummaryStats back = read_summary_csv(fs::path(plan.output_dir) / "summary.csv");

  REQUIRE(back.per_epsilon.size() == outcome.stats.per_epsilon.size());
  const EpsilonSummary& a = outcome.stats.per_epsilon[0];
  const EpsilonSummary& b = back.per_epsilon[0];
  CHECK(b.epsilon == a.epsilon);
  CHECK(b.n == a.n);
  CHECK(b.timeouts == a.timeouts);
  CHECK(b.mean_t == a.mean_t);
  CHECK(b.median_t == a.median_t);
  CHECK(b.sem_t == a.sem_t);
  CHECK(b.mean_censored == a.mean_censored);
  CHECK(b.delta0_used == a.delta0_used);
  CHECK(b.bound_user_nu == a.bound_user_nu);
  CHECK(b.bound_pass == a.bound_pass);
  CHECK(back.slope.has_value() == outcome.stats.slope.has_value());
  CHECK(back.interarrival_pooled.count == outcome.stats.interarrival_pooled.count);
  CHECK(back.interarrival_pooled.mean == outcome.stats.interarrival_pooled.mean);
  CHECK(back.interarrival_bound == outcome.stats.interarrival_bound);
  CHECK(back.cauchy_violations == outcome.stats.cauchy_violations);
  CHECK(back.guarantee_violations == outcome.stats.guarantee_violations);
  CHECK(back.drift_bins.size() == outcome.stats.drift_bins.size());
  for (std::size_t i = 0; i < back.drift_bins.size(); ++i) {
    CHECK(back.drift_bins[i].count == outcome.stats.drift_bins[i].count);
    CHECK(back.drift_bins[i].mean_v == outcome.stats.drift_bins[i].mean_v);
    CHECK(back.drift_bins[i].target == outcome.stats.drift_bins[i].target);
  }
  fs::remove_all(plan.output_dir);
}

TEST_CASE("bound validation matches the per-epsilon summaries") {
  ExperimentPlan plan = small_noisy_plan("bound");
  const PlanOutcome outcome = run_plan(plan);
  const BoundReport report = validate_bound(outcome.stats, plan);

  REQUIRE(report.rows.size() == 1);
  CHECK(report.rows[0].epsilon == 1e-2);
  CHECK(report.rows[0].bound_user_nu == outcome.stats.per_epsilon[0].bound_user_nu);
  CHECK(report.rows[0].bound_default_nu == outcome.stats.per_epsilon[0].bound_default_nu);
  CHECK(report.rows[0].pass == outcome.stats.per_epsilon[0].bound_pass);
  CHECK(report.pass);
  CHECK(report.nu_default > 0.0);
  CHECK(report.nu_default < 1.0);
  CHECK(report.nu_user == report.nu_default);  // plan leaves nu at the default
  CHECK(report.phi0_user_nu > 0.0);

  // A run this short sits far below its epsilon^-2 ceiling.
  CHECK(outcome.stats.per_epsilon[0].mean_censored < report.rows[0].bound_user_nu);
  fs::remove_all(plan.output_dir);
}
