#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <string>

namespace storm {

/// A benchmark objective with an exact referee (f, grad), box of interest,
/// curvature/level bounds on that box, and the noise scales its sampling
/// oracle should use.
struct TestProblem {
  std::string name;
  int dim = 1;
  std::function<double(const Eigen::VectorXd&)> f;
  std::function<Eigen::VectorXd(const Eigen::VectorXd&)> grad;
  double lipschitz = 1.0;  // gradient Lipschitz constant on the box
  double f_max = 0.0;      // upper bound of f over the box
  Eigen::VectorXd box_lo, box_hi;
  Eigen::VectorXd x0;
  double sigma = 0.0;    // value noise scale
  double sigma_g = 0.0;  // gradient noise scale (sqrt of a trace-covariance bound)
  std::uint64_t seed = 0;

  bool in_box(const Eigen::VectorXd& x) const;
};

/// f(x) = x'Dx/2 with eigenvalues spread linearly over [1, condition_number]
/// (so dim 2, cond 10 gives exactly {1, 10}). Nonnegative everywhere; box
/// [-2, 2]^dim; x0 = (1, ..., 1).
TestProblem make_noisy_quadratic(int dim, double condition_number, double sigma, double sigma_g,
                                 std::uint64_t seed);

/// Two-dimensional Rosenbrock 100(y - x^2)^2 + (1 - x)^2 on the box [-2, 2]^2
/// with a closed-form hessian-norm bound for the Lipschitz constant.
TestProblem make_noisy_rosenbrock(double sigma, double sigma_g, std::uint64_t seed);

/// Synthetic binary logistic regression dataset for the finite-sum oracle:
/// mean log-loss over n_samples rows plus a ridge term.
struct LogisticData {
  Eigen::MatrixXd features;  // n_samples x dim
  Eigen::VectorXd labels;    // +-1
  double ridge = 0.1;
  int subsample = 1;  // minibatch size per oracle draw
};

struct FiniteSumLogistic {
  TestProblem problem;
  LogisticData data;
};

FiniteSumLogistic make_finite_sum_logistic(int n_samples, int dim, int subsample_size,
                                           std::uint64_t seed, double ridge = 0.1);

/// Central-difference referee self-check: largest relative gradient error over
/// n_points random box points. Used by tests to keep f and grad consistent.
double max_grad_rel_error(const TestProblem& p, int n_points, std::uint64_t seed);

}  // namespace storm
