#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <vector>

#include "storm/config.hpp"
#include "storm/model.hpp"
#include "storm/problems.hpp"
#include "storm/rng.hpp"

namespace storm {

struct CauchyStep {
  Eigen::VectorXd step;    // minimizer of the model along -gradient within the ball
  double decrease = 0.0;   // m(center) - m(center + step), >= 0
};

/// Exact minimizer of the quadratic model along its negative gradient inside
/// the radius ball. The decrease always dominates the classical bound
/// |g|/2 * min(|g|/|H|, radius). Throws NumericError on non-finite inputs.
CauchyStep cauchy_step(const QuadraticModel& model, double radius);

/// (f0 - fs) / model_decrease; -infinity when the model decrease is zero so a
/// degenerate step can never be accepted. Requires finite estimates and a
/// nonnegative model decrease.
double rho_ratio(double f0, double fs, double model_decrease);

struct StormState {
  Eigen::VectorXd x;
  double delta = 1.0;
  std::int64_t k = 0;
};

struct IterationRecord {
  std::int64_t k = 0;
  Eigen::VectorXd x_before, x_after;
  double delta = 0.0;  // radius the step was computed with
  double rho = 0.0;
  bool success = false;
  double model_decrease = 0.0;
  double grad_norm_model = 0.0;
  double f0 = 0.0, fs = 0.0;  // value estimates at x and x + s

  // Referee instrumentation; NaN / -1 when no referee was attached.
  double f_true_before = std::numeric_limits<double>::quiet_NaN();
  double f_true_after = std::numeric_limits<double>::quiet_NaN();
  double grad_norm_true = std::numeric_limits<double>::quiet_NaN();
  double phi_before = std::numeric_limits<double>::quiet_NaN();
  double phi_after = std::numeric_limits<double>::quiet_NaN();  // v_k = phi_after - phi_before
  int i_event = -1;  // model accuracy event
  int j_event = -1;  // estimate accuracy event
};

/// One trust-region update from (x, delta): acceptance needs rho >= eta1 and
/// |g| >= eta2 * delta; the radius grows by gamma (capped at delta_cap) on
/// success and shrinks by gamma otherwise. Mutates `state`, returns the core
/// record.
IterationRecord storm_iterate(StormState& state, const QuadraticModel& model,
                              const CauchyStep& cs, double f0, double fs, const StormConfig& cfg,
                              double delta_cap);

/// Model construction hook; implementations track their own oracle usage.
struct ModelSource {
  virtual ~ModelSource() = default;
  virtual QuadraticModel build(const Eigen::VectorXd& x, double radius, Rng& rng) = 0;
  virtual double value_samples() const { return 0.0; }
  virtual double grad_samples() const { return 0.0; }
};

/// Value-estimate hook for the acceptance ratio.
struct EstimateSource {
  virtual ~EstimateSource() = default;
  struct Pair {
    double f0 = 0.0, fs = 0.0;
    double n_per_point = 0.0;
  };
  virtual Pair build(const Eigen::VectorXd& x, const Eigen::VectorXd& x_step, double radius,
                     Rng& rng) = 0;
  virtual double value_samples() const { return 0.0; }
};

/// Classifies (model accuracy event, estimate accuracy event) for one
/// iteration; wired by the harness when a referee is available.
using EventClassifier = std::function<std::pair<bool, bool>(
    const QuadraticModel& model, const Eigen::VectorXd& x, const Eigen::VectorXd& s, double f0,
    double fs, double radius)>;

struct RunSpec {
  StormConfig config;
  PotentialSpec potential;
  double epsilon = 0.0;  // stop once the referee gradient norm falls to epsilon; 0 disables
  std::uint64_t seed = 0;
  bool record_trace = true;
  bool snap_delta0 = true;  // align delta0 (and the cap) with the epsilon/zeta radius grid
  EventClassifier classifier;
};

struct RunResult {
  StormState state;
  std::vector<IterationRecord> records;
  std::optional<std::int64_t> t_eps;
  bool timed_out = false;
  double value_samples = 0.0, grad_samples = 0.0;
  double delta0_used = 0.0, delta_max_used = 0.0;
  double delta_eps = 0.0;  // epsilon / zeta (0 when epsilon = 0)
  std::int64_t cauchy_violations = 0;
  // Instrumented sanity checks: accurate-and-small-radius iterations must
  // succeed; accurate successful iterations must decrease f at rate c2.
  std::int64_t guarantee_violations = 0;
  std::int64_t decrease_violations = 0;
  std::int64_t box_exits = 0;
  std::vector<double> delta_series;  // delta_0 .. delta_T for renewal analysis
};

/// Full driver. The referee (exact problem) is optional: without it the loop
/// runs to max_iters and the accuracy instrumentation stays unset. With it,
/// the loop stops at the first iterate whose true gradient norm is <= epsilon
/// and flags a timeout when max_iters arrives first; a timeout is a result,
/// not an exception.
RunResult run_storm(ModelSource& models, EstimateSource& estimates, const TestProblem* referee,
                    const Eigen::VectorXd& x0, const RunSpec& spec);

}  // namespace storm
