#include "storm/problems.hpp"

#include <cmath>

#include "storm/errors.hpp"
#include "storm/rng.hpp"

namespace storm {

bool TestProblem::in_box(const Eigen::VectorXd& x) const {
  for (int i = 0; i < dim; ++i) {
    if (x[i] < box_lo[i] || x[i] > box_hi[i]) return false;
  }
  return true;
}

TestProblem make_noisy_quadratic(int dim, double condition_number, double sigma, double sigma_g,
                                 std::uint64_t seed) {
  if (dim < 1) throw ConfigError("quadratic needs dim >= 1");
  if (!(condition_number >= 1.0)) throw ConfigError("condition number must be at least 1");
  if (sigma < 0.0 || sigma_g < 0.0) throw ConfigError("noise scales must be nonnegative");

  Eigen::VectorXd d(dim);
  for (int i = 0; i < dim; ++i) {
    d[i] = dim == 1 ? condition_number
                    : 1.0 + (condition_number - 1.0) * static_cast<double>(i) /
                                static_cast<double>(dim - 1);
  }

  TestProblem p;
  p.name = "quadratic";
  p.dim = dim;
  p.f = [d](const Eigen::VectorXd& x) { return 0.5 * x.dot(d.cwiseProduct(x)); };
  p.grad = [d](const Eigen::VectorXd& x) -> Eigen::VectorXd { return d.cwiseProduct(x); };
  p.lipschitz = condition_number;
  p.box_lo = Eigen::VectorXd::Constant(dim, -2.0);
  p.box_hi = Eigen::VectorXd::Constant(dim, 2.0);
  p.f_max = 0.5 * d.sum() * 4.0;  // f <= sum_i d_i * x_i^2 / 2 <= 2 * sum d_i on the box
  p.x0 = Eigen::VectorXd::Ones(dim);
  p.sigma = sigma;
  p.sigma_g = sigma_g;
  p.seed = seed;
  return p;
}

TestProblem make_noisy_rosenbrock(double sigma, double sigma_g, std::uint64_t seed) {
  if (sigma < 0.0 || sigma_g < 0.0) throw ConfigError("noise scales must be nonnegative");

  TestProblem p;
  p.name = "rosenbrock";
  p.dim = 2;
  p.f = [](const Eigen::VectorXd& x) {
    const double a = x[1] - x[0] * x[0];
    const double b = 1.0 - x[0];
    return 100.0 * a * a + b * b;
  };
  p.grad = [](const Eigen::VectorXd& x) -> Eigen::VectorXd {
    const double a = x[1] - x[0] * x[0];
    Eigen::VectorXd g(2);
    g[0] = -400.0 * x[0] * a - 2.0 * (1.0 - x[0]);
    g[1] = 200.0 * a;
    return g;
  };
  p.box_lo = Eigen::VectorXd::Constant(2, -2.0);
  p.box_hi = Eigen::VectorXd::Constant(2, 2.0);
  // Hessian entries on the box: |2 - 400 y + 1200 x^2| <= 5602, |400 x| <= 800,
  // 200. Row-sum bound for the symmetric hessian: max(5602 + 800, 800 + 200).
  p.lipschitz = 6402.0;
  // 100(y - x^2)^2 <= 100 * 36 and (1 - x)^2 <= 9 on the box.
  p.f_max = 3609.0;
  p.x0 = (Eigen::VectorXd(2) << -1.2, 1.0).finished();
  p.sigma = sigma;
  p.sigma_g = sigma_g;
  p.seed = seed;
  return p;
}

FiniteSumLogistic make_finite_sum_logistic(int n_samples, int dim, int subsample_size,
                                           std::uint64_t seed, double ridge) {
  if (n_samples < 1 || dim < 1) throw ConfigError("logistic needs n_samples >= 1 and dim >= 1");
  if (subsample_size < 1 || subsample_size > n_samples) {
    throw ConfigError("subsample size must lie in [1, n_samples]");
  }
  if (!(ridge >= 0.0)) throw ConfigError("ridge must be nonnegative");

  Rng rng = make_stream(seed, 0x1091ULL);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::bernoulli_distribution flip(0.1);

  LogisticData data;
  data.ridge = ridge;
  data.subsample = subsample_size;
  data.features.resize(n_samples, dim);
  data.labels.resize(n_samples);
  Eigen::VectorXd planted(dim);
  for (int j = 0; j < dim; ++j) planted[j] = normal(rng);
  planted.normalize();
  for (int i = 0; i < n_samples; ++i) {
    for (int j = 0; j < dim; ++j) data.features(i, j) = normal(rng);
    const double margin = data.features.row(i).dot(planted);
    double label = margin >= 0.0 ? 1.0 : -1.0;
    if (flip(rng)) label = -label;
    data.labels[i] = label;
  }

  const Eigen::MatrixXd a = data.features;
  const Eigen::VectorXd y = data.labels;
  auto loss = [a, y, ridge](const Eigen::VectorXd& w) {
    double s = 0.0;
    for (int i = 0; i < a.rows(); ++i) {
      const double m = -y[i] * a.row(i).dot(w);
      // log(1 + e^m) evaluated stably for large |m|.
      s += m > 0.0 ? m + std::log1p(std::exp(-m)) : std::log1p(std::exp(m));
    }
    return s / static_cast<double>(a.rows()) + 0.5 * ridge * w.squaredNorm();
  };
  auto loss_grad = [a, y, ridge](const Eigen::VectorXd& w) -> Eigen::VectorXd {
    Eigen::VectorXd g = Eigen::VectorXd::Zero(w.size());
    for (int i = 0; i < a.rows(); ++i) {
      const double m = -y[i] * a.row(i).dot(w);
      const double sig = 1.0 / (1.0 + std::exp(-m));
      g -= sig * y[i] * a.row(i).transpose();
    }
    return g / static_cast<double>(a.rows()) + ridge * w;
  };

  double max_row_sq = 0.0;
  for (int i = 0; i < n_samples; ++i) {
    max_row_sq = std::max(max_row_sq, a.row(i).squaredNorm());
  }

  FiniteSumLogistic out;
  out.data = std::move(data);
  auto& p = out.problem;
  p.name = "logistic";
  p.dim = dim;
  p.f = loss;
  p.grad = loss_grad;
  p.lipschitz = 0.25 * max_row_sq + ridge;
  p.box_lo = Eigen::VectorXd::Constant(dim, -4.0);
  p.box_hi = Eigen::VectorXd::Constant(dim, 4.0);
  // Per-row loss <= log 2 + |a_i . w| <= log 2 + ||a_i|| * 4 sqrt(dim) on the box.
  p.f_max = std::log(2.0) + std::sqrt(max_row_sq) * 4.0 * std::sqrt(static_cast<double>(dim)) +
            0.5 * ridge * 16.0 * static_cast<double>(dim);
  p.x0 = Eigen::VectorXd::Zero(dim);
  p.seed = seed;
  return out;
}

double max_grad_rel_error(const TestProblem& p, int n_points, std::uint64_t seed) {
  Rng rng = make_stream(seed, 0xfdULL);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  double worst = 0.0;
  for (int t = 0; t < n_points; ++t) {
    Eigen::VectorXd x(p.dim);
    for (int i = 0; i < p.dim; ++i) {
      x[i] = p.box_lo[i] + (p.box_hi[i] - p.box_lo[i]) * unit(rng);
    }
    const Eigen::VectorXd g = p.grad(x);
    Eigen::VectorXd fd(p.dim);
    for (int i = 0; i < p.dim; ++i) {
      const double h = 1e-5 * std::max(1.0, std::abs(x[i]));
      Eigen::VectorXd xp = x, xm = x;
      xp[i] += h;
      xm[i] -= h;
      fd[i] = (p.f(xp) - p.f(xm)) / (2.0 * h);
    }
    worst = std::max(worst, (fd - g).norm() / std::max(1.0, g.norm()));
  }
  return worst;
}

}  // namespace storm
