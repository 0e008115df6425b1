#include "storm/oracle.hpp"

#include <cmath>
#include <unordered_set>

#include "storm/errors.hpp"

namespace storm {

namespace {

constexpr double kLoopGuard = 1e7;  // largest n a draw-by-draw mean query will loop over

double checked_n(double n) {
  if (!(n >= 1.0) || n != std::floor(n)) throw ConfigError("mean query needs an integer n >= 1");
  return n;
}

// Draws required so a sample average of variance sigma2/n deviates by more
// than err with probability at most slack.
double needed_samples(SampleRule rule, double sigma2, double slack, double err) {
  if (sigma2 == 0.0) return 1.0;
  if (!(err > 0.0)) throw ConfigError("accuracy bound must be positive");
  switch (rule) {
    case SampleRule::chebyshev:
      return sigma2 / (slack * err * err);
    case SampleRule::bernstein:
      return 2.0 * sigma2 * std::log(2.0 / slack) / (err * err);
  }
  throw ConfigError("unknown sample rule");
}

// Ceiling with a relative snap so binary representation error in the inputs
// (e.g. 1 - 0.9) cannot inflate an exactly-integer requirement by one draw.
double clamped_count(double needed) {
  const double snapped = std::round(needed);
  const double n = std::abs(needed - snapped) <= 1e-9 * std::max(1.0, std::abs(needed))
                       ? snapped
                       : std::ceil(needed);
  return std::max(1.0, n);
}

}  // namespace

Eigen::VectorXd StochasticOracle::gradient(const Eigen::VectorXd&, Rng&) const {
  throw CapabilityError("oracle has no gradient sampler");
}

double StochasticOracle::value_mean(const Eigen::VectorXd& x, double n, Rng& rng) const {
  checked_n(n);
  if (n > kLoopGuard) {
    throw CapabilityError("mean query of " + std::to_string(n) +
                          " draws exceeds the loop guard for draw-by-draw oracles");
  }
  double s = 0.0;
  for (double i = 0.0; i < n; ++i) s += value(x, rng);
  return s / n;
}

Eigen::VectorXd StochasticOracle::gradient_mean(const Eigen::VectorXd& x, double n,
                                                Rng& rng) const {
  checked_n(n);
  if (n > kLoopGuard) {
    throw CapabilityError("mean query of " + std::to_string(n) +
                          " draws exceeds the loop guard for draw-by-draw oracles");
  }
  Eigen::VectorXd s = Eigen::VectorXd::Zero(x.size());
  for (double i = 0.0; i < n; ++i) s += gradient(x, rng);
  return s / n;
}

namespace {

class GaussianOracle final : public StochasticOracle {
 public:
  explicit GaussianOracle(const TestProblem& p) : problem_(p) {
    value_variance_bound = p.sigma * p.sigma;
    gradient_variance_bound = p.sigma_g * p.sigma_g;
  }

  double value(const Eigen::VectorXd& x, Rng& rng) const override {
    return value_mean(x, 1.0, rng);
  }

  Eigen::VectorXd gradient(const Eigen::VectorXd& x, Rng& rng) const override {
    return gradient_mean(x, 1.0, rng);
  }

  bool has_gradient() const override { return true; }

  // The average of n Gaussian draws is Gaussian with scale sigma/sqrt(n), so
  // one draw realizes the exact distribution for any n.
  double value_mean(const Eigen::VectorXd& x, double n, Rng& rng) const override {
    checked_n(n);
    double v = problem_.f(x);
    if (problem_.sigma > 0.0) {
      std::normal_distribution<double> z(0.0, problem_.sigma / std::sqrt(n));
      v += z(rng);
    }
    return v;
  }

  Eigen::VectorXd gradient_mean(const Eigen::VectorXd& x, double n, Rng& rng) const override {
    checked_n(n);
    Eigen::VectorXd g = problem_.grad(x);
    if (problem_.sigma_g > 0.0) {
      const double scale =
          problem_.sigma_g / std::sqrt(n * static_cast<double>(problem_.dim));
      std::normal_distribution<double> z(0.0, scale);
      for (int i = 0; i < problem_.dim; ++i) g[i] += z(rng);
    }
    return g;
  }

 private:
  TestProblem problem_;
};

class MinibatchOracle final : public StochasticOracle {
 public:
  MinibatchOracle(const TestProblem& p, const LogisticData& data) : data_(data) {
    estimate_variance_bounds(p);
  }

  double value(const Eigen::VectorXd& w, Rng& rng) const override {
    double s = 0.0;
    for (int i : draw_batch(rng)) s += row_loss(i, w);
    return s / static_cast<double>(data_.subsample) + 0.5 * data_.ridge * w.squaredNorm();
  }

  Eigen::VectorXd gradient(const Eigen::VectorXd& w, Rng& rng) const override {
    Eigen::VectorXd g = Eigen::VectorXd::Zero(w.size());
    for (int i : draw_batch(rng)) g += row_grad(i, w);
    return g / static_cast<double>(data_.subsample) + data_.ridge * w;
  }

  bool has_gradient() const override { return true; }

 private:
  std::vector<int> draw_batch(Rng& rng) const {
    // Floyd's algorithm: subsample distinct rows in O(subsample) draws.
    const int n = static_cast<int>(data_.labels.size());
    const int m = data_.subsample;
    std::unordered_set<int> chosen;
    std::vector<int> batch;
    batch.reserve(static_cast<std::size_t>(m));
    for (int j = n - m; j < n; ++j) {
      std::uniform_int_distribution<int> pick(0, j);
      const int t = pick(rng);
      if (chosen.insert(t).second) {
        batch.push_back(t);
      } else {
        chosen.insert(j);
        batch.push_back(j);
      }
    }
    return batch;
  }

  double row_loss(int i, const Eigen::VectorXd& w) const {
    const double m = -data_.labels[i] * data_.features.row(i).dot(w);
    return m > 0.0 ? m + std::log1p(std::exp(-m)) : std::log1p(std::exp(m));
  }

  Eigen::VectorXd row_grad(int i, const Eigen::VectorXd& w) const {
    const double m = -data_.labels[i] * data_.features.row(i).dot(w);
    const double sig = 1.0 / (1.0 + std::exp(-m));
    return (-sig * data_.labels[i]) * data_.features.row(i).transpose();
  }

  // One draw is a minibatch mean, so its variance is the without-replacement
  // population variance shrunk by the batch size. Probed at a few states and
  // padded; stored once at construction.
  void estimate_variance_bounds(const TestProblem& p) {
    const int n = static_cast<int>(data_.labels.size());
    const int m = data_.subsample;
    const double fpc = n > 1 ? static_cast<double>(n - m) / static_cast<double>(n - 1) : 0.0;
    Rng rng = make_stream(p.seed, 0xCAFEULL);
    std::normal_distribution<double> z(0.0, 1.0);
    double worst_v = 0.0, worst_g = 0.0;
    for (int probe = 0; probe < 5; ++probe) {
      Eigen::VectorXd w = Eigen::VectorXd::Zero(p.dim);
      if (probe > 0) {
        for (int i = 0; i < p.dim; ++i) w[i] = z(rng);
      }
      double mean_l = 0.0;
      Eigen::VectorXd mean_g = Eigen::VectorXd::Zero(p.dim);
      for (int i = 0; i < n; ++i) {
        mean_l += row_loss(i, w);
        mean_g += row_grad(i, w);
      }
      mean_l /= n;
      mean_g /= n;
      double var_l = 0.0, var_g = 0.0;
      for (int i = 0; i < n; ++i) {
        const double dl = row_loss(i, w) - mean_l;
        var_l += dl * dl;
        var_g += (row_grad(i, w) - mean_g).squaredNorm();
      }
      if (n > 1) {
        var_l /= n - 1;
        var_g /= n - 1;
      }
      worst_v = std::max(worst_v, var_l);
      worst_g = std::max(worst_g, var_g);
    }
    value_variance_bound = 1.5 * fpc * worst_v / static_cast<double>(m);
    gradient_variance_bound = 1.5 * fpc * worst_g / static_cast<double>(m);
  }

  LogisticData data_;
};

class CorruptedOracle final : public StochasticOracle {
 public:
  CorruptedOracle(std::shared_ptr<StochasticOracle> base, CorruptionSpec spec)
      : base_(std::move(base)), spec_(std::move(spec)) {
    value_variance_bound = base_->value_variance_bound;
    gradient_variance_bound = base_->gradient_variance_bound;
  }

  double value(const Eigen::VectorXd& x, Rng& rng) const override {
    return corrupt_value(x, base_->value(x, rng), rng);
  }
  double value_mean(const Eigen::VectorXd& x, double n, Rng& rng) const override {
    return corrupt_value(x, base_->value_mean(x, n, rng), rng);
  }
  Eigen::VectorXd gradient(const Eigen::VectorXd& x, Rng& rng) const override {
    return corrupt_gradient(x, base_->gradient(x, rng), rng);
  }
  Eigen::VectorXd gradient_mean(const Eigen::VectorXd& x, double n, Rng& rng) const override {
    return corrupt_gradient(x, base_->gradient_mean(x, n, rng), rng);
  }
  bool has_gradient() const override { return base_->has_gradient(); }

 private:
  bool fails(Rng& rng) const {
    if (spec_.failure_prob <= 0.0) return false;
    std::bernoulli_distribution fail(spec_.failure_prob);
    return fail(rng);
  }
  double corrupt_value(const Eigen::VectorXd& x, double clean, Rng& rng) const {
    if (!fails(rng) || !spec_.value_corruption) return clean;
    return spec_.value_corruption(x, clean, rng);
  }
  Eigen::VectorXd corrupt_gradient(const Eigen::VectorXd& x, Eigen::VectorXd clean,
                                   Rng& rng) const {
    if (!fails(rng) || !spec_.gradient_corruption) return clean;
    return spec_.gradient_corruption(x, clean, rng);
  }

  std::shared_ptr<StochasticOracle> base_;
  CorruptionSpec spec_;
};

}  // namespace

std::shared_ptr<StochasticOracle> make_gaussian_oracle(const TestProblem& problem) {
  return std::make_shared<GaussianOracle>(problem);
}

std::shared_ptr<StochasticOracle> make_minibatch_oracle(const TestProblem& problem,
                                                        const LogisticData& data) {
  return std::make_shared<MinibatchOracle>(problem, data);
}

CorruptionSpec CorruptionSpec::constant_offset(double failure_prob, double offset) {
  CorruptionSpec spec;
  spec.failure_prob = failure_prob;
  spec.value_corruption = [offset](const Eigen::VectorXd&, double clean, Rng&) {
    return clean + offset;
  };
  spec.gradient_corruption = [offset](const Eigen::VectorXd&, const Eigen::VectorXd& clean,
                                      Rng&) -> Eigen::VectorXd {
    Eigen::VectorXd g = clean;
    g[0] += offset;
    return g;
  };
  return spec;
}

std::shared_ptr<StochasticOracle> corrupt(std::shared_ptr<StochasticOracle> base,
                                          CorruptionSpec spec) {
  if (base == nullptr) throw ConfigError("corrupt() needs a base oracle");
  if (!(spec.failure_prob >= 0.0 && spec.failure_prob <= 1.0)) {
    throw ConfigError("failure_prob must lie in [0, 1]");
  }
  if (spec.failure_prob > 0.0 && !spec.value_corruption) {
    throw ConfigError("corruption with positive failure_prob needs a value generator");
  }
  return std::make_shared<CorruptedOracle>(std::move(base), std::move(spec));
}

void AccuracyTargets::validate() const {
  if (!(alpha > 0.0 && alpha <= 1.0)) throw ConfigError("alpha must lie in (0, 1]");
  if (!(beta > 0.0 && beta <= 1.0)) throw ConfigError("beta must lie in (0, 1]");
  if (!(kappa_ef > 0.0 && kappa_eg > 0.0)) throw ConfigError("kappas must be positive");
  if (!(eps_f >= 0.0)) throw ConfigError("eps_f must be nonnegative");
}

SaaModel build_saa_model(const StochasticOracle& oracle, const Eigen::VectorXd& center,
                         double radius, const AccuracyTargets& targets, const SaaOptions& opts,
                         Rng& rng) {
  targets.validate();
  if (!(radius > 0.0) || !std::isfinite(radius)) throw ConfigError("radius must be positive");
  if (!oracle.has_gradient()) throw CapabilityError("model construction needs gradient draws");

  const double slack = 1.0 - targets.alpha;
  SaaModel out;
  if (oracle.gradient_variance_bound == 0.0) {
    out.n_grad = 1.0;
  } else if (slack == 0.0) {
    throw InfeasibleError("alpha = 1 requires a noiseless gradient sampler");
  } else {
    out.n_grad = clamped_count(needed_samples(opts.rule, oracle.gradient_variance_bound, slack,
                                              targets.kappa_eg * radius));
  }
  if (oracle.value_variance_bound == 0.0) {
    out.n_value = 1.0;
  } else if (slack == 0.0) {
    throw InfeasibleError("alpha = 1 requires a noiseless value sampler");
  } else {
    out.n_value = clamped_count(needed_samples(opts.rule, oracle.value_variance_bound, slack,
                                               targets.kappa_ef * radius * radius));
  }
  const double required = out.n_grad + out.n_value;
  if (required > opts.budget_cap) {
    throw BudgetError("model build needs " + std::to_string(required) +
                          " draws, over the budget cap",
                      required, opts.budget_cap);
  }

  out.model.center = center;
  out.model.gradient = oracle.gradient_mean(center, out.n_grad, rng);
  out.model.value = oracle.value_mean(center, out.n_value, rng);
  return out;
}

Estimates build_estimates(const StochasticOracle& oracle, const Eigen::VectorXd& x,
                          const Eigen::VectorXd& x_step, double radius,
                          const AccuracyTargets& targets, const SaaOptions& opts, Rng& rng) {
  targets.validate();
  if (!(radius > 0.0) || !std::isfinite(radius)) throw ConfigError("radius must be positive");

  Estimates out;
  if (oracle.value_variance_bound == 0.0) {
    out.n_per_point = 1.0;
  } else if (targets.eps_f == 0.0) {
    throw InfeasibleError("eps_f = 0 with a noisy oracle admits no finite sample size");
  } else if (targets.beta == 1.0) {
    throw InfeasibleError("beta = 1 requires a noiseless value sampler");
  } else {
    // Each endpoint gets half of the failure budget so the joint event still
    // holds with probability at least beta.
    const double slack = 0.5 * (1.0 - targets.beta);
    out.n_per_point = clamped_count(needed_samples(opts.rule, oracle.value_variance_bound, slack,
                                                   targets.eps_f * radius * radius));
  }
  if (2.0 * out.n_per_point > opts.budget_cap) {
    throw BudgetError("estimates need " + std::to_string(2.0 * out.n_per_point) +
                          " draws, over the budget cap",
                      2.0 * out.n_per_point, opts.budget_cap);
  }
  out.f0 = oracle.value_mean(x, out.n_per_point, rng);
  out.fs = oracle.value_mean(x_step, out.n_per_point, rng);
  return out;
}

std::vector<Eigen::VectorXd> ball_sample(const Eigen::VectorXd& center, double radius) {
  const int dim = static_cast<int>(center.size());
  Rng rng = make_stream(0xba11ULL, static_cast<std::uint64_t>(dim));
  std::normal_distribution<double> z(0.0, 1.0);
  std::vector<Eigen::VectorXd> pts;
  pts.reserve(16);
  for (int i = 0; i < 16; ++i) {
    Eigen::VectorXd dir(dim);
    do {
      for (int j = 0; j < dim; ++j) dir[j] = z(rng);
    } while (dir.norm() == 0.0);
    dir.normalize();
    // Radii spread as the dim-th root so shells get even coverage, ending at
    // the boundary where model error peaks.
    const double r =
        radius * std::pow((static_cast<double>(i) + 1.0) / 16.0, 1.0 / static_cast<double>(dim));
    pts.push_back(center + r * dir);
  }
  return pts;
}

std::pair<bool, bool> classify_events(const QuadraticModel& model, const Eigen::VectorXd& x,
                                      const Eigen::VectorXd& s, double f0, double fs,
                                      double radius, const TestProblem& referee, double kappa_ef,
                                      double kappa_eg, double eps_f) {
  if (!(radius > 0.0)) throw ConfigError("radius must be positive");
  const double r2 = radius * radius;

  bool model_ok = (referee.grad(x) - model.gradient).norm() <= kappa_eg * radius;
  if (model_ok) {
    auto pts = ball_sample(x, radius);
    pts.push_back(x);
    pts.push_back(x + s);
    for (const auto& y : pts) {
      if (std::abs(referee.f(y) - model.value_at(y - x)) > kappa_ef * r2) {
        model_ok = false;
        break;
      }
    }
  }

  const bool est_ok = std::abs(f0 - referee.f(x)) <= eps_f * r2 &&
                      std::abs(fs - referee.f(x + s)) <= eps_f * r2;
  return {model_ok, est_ok};
}

QuadraticModel SaaModelSource::build(const Eigen::VectorXd& x, double radius, Rng& rng) {
  SaaModel m = build_saa_model(*oracle_, x, radius, targets_, opts_, rng);
  value_samples_ += m.n_value;
  grad_samples_ += m.n_grad;
  return std::move(m.model);
}

EstimateSource::Pair SaaEstimateSource::build(const Eigen::VectorXd& x,
                                              const Eigen::VectorXd& x_step, double radius,
                                              Rng& rng) {
  const Estimates e = build_estimates(*oracle_, x, x_step, radius, targets_, opts_, rng);
  value_samples_ += 2.0 * e.n_per_point;
  return {e.f0, e.fs, e.n_per_point};
}

QuadraticModel ExactModelSource::build(const Eigen::VectorXd& x, double, Rng&) {
  QuadraticModel m;
  m.center = x;
  m.value = problem_.f(x);
  m.gradient = problem_.grad(x);
  value_samples_ += 1.0;
  grad_samples_ += 1.0;
  return m;
}

EstimateSource::Pair ExactEstimateSource::build(const Eigen::VectorXd& x,
                                                const Eigen::VectorXd& x_step, double, Rng&) {
  value_samples_ += 2.0;
  return {problem_.f(x), problem_.f(x_step), 1.0};
}

}  // namespace storm
