#pragma once

#include <cstdint>
#include <filesystem>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "storm/config.hpp"
#include "storm/oracle.hpp"
#include "storm/problems.hpp"
#include "storm/stats.hpp"
#include "storm/walk.hpp"

namespace storm {

/// Which benchmark to build and its noise parameters.
struct ProblemSpec {
  std::string name = "quadratic";  // quadratic | rosenbrock | logistic
  int dim = 2;
  double sigma = 0.0;
  double sigma_g = 0.0;
  double cond = 10.0;       // quadratic only
  int data_n = 2000;        // logistic only: dataset size
  int batch = 32;           // logistic only: minibatch size
  std::uint64_t seed = 1;   // logistic data generation

  TestProblem materialize() const;
  FiniteSumLogistic materialize_logistic() const;
};

struct OracleSpec {
  bool exact = false;  // noiseless first-order oracle; alpha/beta are treated as 1
  SampleRule rule = SampleRule::chebyshev;
  double budget_cap = std::numeric_limits<double>::infinity();
  double failure_prob = 0.0;       // per-query corruption probability
  double corruption_offset = 0.0;  // additive corruption magnitude
};

struct ExperimentPlan {
  ProblemSpec problem;
  StormConfig config;
  PotentialSpec potential;
  double alpha = 0.9;
  double beta = 0.95;
  OracleSpec oracle;
  std::vector<double> epsilon_grid;  // strictly positive, sorted descending
  int replications = 1;
  std::uint64_t master_seed = 0;
  std::string output_dir = "out";
  bool trace = false;
  int threads = 1;

  /// Throws ConfigError on malformed plans or unsatisfiable accuracy targets.
  void validate() const;
  /// alpha/beta after the exact-oracle override.
  double effective_alpha() const { return oracle.exact ? 1.0 : alpha; }
  double effective_beta() const { return oracle.exact ? 1.0 : beta; }
  AccuracyTargets targets() const;
};

/// One line of runs.csv.
struct RunRow {
  double epsilon = 0.0;
  int rep = 0;
  double t_eps = 0.0;  // censored at max_iters when timeout is set
  bool timeout = false;
  double f_final = 0.0;
  double grad_norm_final = 0.0;
  double value_samples = 0.0;
  double grad_samples = 0.0;
  std::int64_t wall_ns = 0;
};

struct EpsilonSummary {
  double epsilon = 0.0;
  int n = 0;
  int timeouts = 0;
  // Moments of T over non-timeout replications; censored marks a mean that is
  // only a lower bound because timeouts were excluded.
  double mean_t = std::numeric_limits<double>::quiet_NaN();
  double median_t = std::numeric_limits<double>::quiet_NaN();
  double std_t = std::numeric_limits<double>::quiet_NaN();
  double sem_t = std::numeric_limits<double>::quiet_NaN();
  bool censored = false;
  // Mean/SEM with timeouts included at max_iters: a lower bound on the true
  // mean, which is what the stopping-time ceiling is checked against.
  double mean_censored = std::numeric_limits<double>::quiet_NaN();
  double sem_censored = std::numeric_limits<double>::quiet_NaN();
  double delta0_used = 0.0;  // start radius after grid alignment for this epsilon
  double bound_default_nu = std::numeric_limits<double>::quiet_NaN();
  double bound_user_nu = std::numeric_limits<double>::quiet_NaN();
  bool bound_pass = true;  // mean_t <= resolved-nu bound + 3 sem
};

/// Pooled potential-drift evidence for one radius level.
struct DriftBin {
  double delta_lo = 0.0;
  double delta_hi = 0.0;
  std::int64_t count = 0;
  double mean_v = 0.0;
  double sem_v = 0.0;
  double target = 0.0;  // -theta * delta_lo^2, the weakest requirement in the bin
  bool pass = true;
};

struct SummaryStats {
  std::vector<EpsilonSummary> per_epsilon;
  /// log mean T vs log epsilon, over epsilons where >= 90% of replications
  /// finished; absent when fewer than 3 qualify.
  std::optional<LinearFit> slope;
  std::vector<DriftBin> drift_bins;  // only bins with >= 200 samples are judged
  bool drift_pass = true;
  Summary interarrival_pooled;  // tau over every renewal in every run
  double interarrival_bound = std::numeric_limits<double>::quiet_NaN();
  bool interarrival_pass = true;
  std::int64_t cauchy_violations = 0;
  std::int64_t guarantee_violations = 0;
  std::int64_t decrease_violations = 0;
  std::int64_t box_exits = 0;
  bool bounds_pass = true;  // every per-epsilon bound_pass

  bool all_pass() const {
    return drift_pass && interarrival_pass && bounds_pass && cauchy_violations == 0 &&
           guarantee_violations == 0 && decrease_violations == 0;
  }
};

struct PlanOutcome {
  std::vector<RunRow> rows;
  SummaryStats stats;
};

/// Runs every (epsilon, replication) cell of the plan on a small worker pool,
/// writes runs.csv / summary.csv / plan.cfg (and traces.csv when tracing) into
/// plan.output_dir, and returns the rows plus aggregated statistics.
PlanOutcome run_plan(const ExperimentPlan& plan);

/// Expected-stopping-time ceiling at accuracy epsilon. Throws
/// std::domain_error when alpha*beta <= 1/2.
double theoretical_complexity_bound(double alpha, double beta, double phi0, double kappa_ef,
                                    double kappa_eg, double delta0, double epsilon);

struct BoundRow {
  double epsilon = 0.0;
  double mean_t = std::numeric_limits<double>::quiet_NaN();
  double sem_t = std::numeric_limits<double>::quiet_NaN();
  double bound_default_nu = std::numeric_limits<double>::quiet_NaN();
  double bound_user_nu = std::numeric_limits<double>::quiet_NaN();
  bool pass = true;  // mean_t <= resolved-nu bound + 3 sem (vacuous without data)
};

struct BoundReport {
  double nu_default = 0.0;
  double nu_user = 0.0;  // resolved nu actually used by the runs
  double phi0_default_nu = 0.0;
  double phi0_user_nu = 0.0;
  std::vector<BoundRow> rows;
  bool pass = true;
};

/// Recomputes the per-epsilon stopping-time ceilings for the plan and flags
/// epsilons whose empirical mean exceeds the ceiling by more than 3 standard
/// errors. Reported at both the default weighting and the plan's weighting.
BoundReport validate_bound(const SummaryStats& stats, const ExperimentPlan& plan);

/// Flat key=value round trip; the same format the CLI accepts via --config.
void write_plan(const ExperimentPlan& plan, const std::filesystem::path& path);
ExperimentPlan read_plan(const std::filesystem::path& path);

void write_runs_csv(const std::vector<RunRow>& rows, const std::filesystem::path& path);
std::vector<RunRow> read_runs_csv(const std::filesystem::path& path);
void write_summary_csv(const SummaryStats& stats, const std::filesystem::path& path);
SummaryStats read_summary_csv(const std::filesystem::path& path);

}  // namespace storm
