#pragma once

#include <cstdint>

namespace storm {

/// Trust-region algorithm parameters. Defaults follow the standard regime the
/// drift analysis is calibrated for (eta1 = 0.1, kappa_fcd = 1/2, gamma = 2).
struct StormConfig {
  double gamma = 2.0;       // radius growth/shrink ratio, > 1
  double eta1 = 0.1;        // acceptance threshold on rho
  double eta2 = 0.05;       // acceptance threshold on |g| / delta
  double delta0 = 1.0;      // initial radius
  double delta_max = 64.0;  // radius cap
  double kappa_fcd = 0.5;   // fraction of Cauchy decrease demanded of steps
  double kappa_ef = 10.0;   // model value accuracy scale (units of delta^2)
  double kappa_eg = 10.0;   // model gradient accuracy scale (units of delta)
  double kappa_bhm = 1.0;   // bound on model hessian norms, >= 1
  double eps_f = 0.0;       // estimate accuracy scale (units of delta^2)
  std::int64_t max_iters = 100000;

  void validate() const;  // throws ConfigError naming the violated constraint
};

/// Weights of the convex potential nu*f + (1-nu)*delta^2 and the scale zeta
/// that converts a gradient tolerance epsilon into the radius threshold
/// epsilon/zeta. Negative entries select the derived defaults
/// nu = 320/(320 + eta2) and zeta = 20*kappa_eg.
struct PotentialSpec {
  double nu = -1.0;
  double zeta = -1.0;

  double nu_or_default(const StormConfig& cfg) const;
  double zeta_or_default(const StormConfig& cfg) const;

  /// Checks the weight inequality
  ///   nu/(1-nu) >= max{4 gamma^2/(zeta c1), 4 gamma^2/(eta1 eta2 kappa_fcd),
  ///                    gamma^2/kappa_ef}  (c1 = 1/10)
  /// and zeta >= kappa_eg + max{eta2, kappa_bhm, 8 kappa_ef/(kappa_fcd (1-eta1))}.
  void validate(const StormConfig& cfg) const;
};

/// Potential nu*f + (1-nu)*delta^2; requires f >= 0 and nu in (0,1).
double potential_value(double f_value, double delta, double nu);

/// Constants of the expected-decrease analysis in the standard regime.
struct DriftConstants {
  double theta = 0.0;      // per-iteration potential drain rate, 1/(1600*kappa_eg)
  double zeta = 0.0;       // 20*kappa_eg
  double c1 = 0.1;         // fraction-of-decrease constant
  double c2 = 0.0;         // guaranteed decrease rate on accurate successes
  double c3 = 0.0;         // worst-case increase rate, 1 + 3L/(2*zeta)
  double beta_min = 0.0;   // minimal estimate-accuracy probability
  double ratio_rhs = 0.0;  // threshold for (ab - 1/2)/((1-a)(1-b))

  /// Smallest alpha making (alpha, beta) feasible at the given beta.
  double alpha_min_for(double beta) const;

  /// True iff ab > 1/2, beta >= beta_min, and the odds-ratio condition holds
  /// (vacuously when alpha or beta equals 1).
  bool feasible(double alpha, double beta) const;
};

/// Derives the drift constants, enforcing the regime preconditions
/// (eta1 = 0.1, kappa_fcd = 0.5, gamma <= 2, kappa_ef = kappa_eg >= 10,
/// eta2 > 0.03, kappa_bhm <= 12*kappa_ef). `lipschitz` is the gradient
/// Lipschitz constant of the objective on its domain of interest.
DriftConstants drift_constants(const StormConfig& cfg, double lipschitz);

}  // namespace storm
