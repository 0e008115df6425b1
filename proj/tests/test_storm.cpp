#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <limits>

#include "doctest.h"
#include "storm/errors.hpp"
#include "storm/oracle.hpp"
#include "storm/problems.hpp"
#include "storm/storm.hpp"

using namespace storm;

namespace {

QuadraticModel make_model(const Eigen::VectorXd& g, const Eigen::MatrixXd& h) {
  QuadraticModel m;
  m.center = Eigen::VectorXd::Zero(g.size());
  m.value = 0.0;
  m.gradient = g;
  if (h.size() > 0) m.hessian = h;
  return m;
}

// Independent check: densely enumerate step lengths along -g and return the
// best model decrease found.
double line_search_decrease(const QuadraticModel& m, double radius) {
  const Eigen::VectorXd dir = -m.gradient.normalized();
  double best = 0.0;
  const int n = 200000;
  for (int i = 0; i <= n; ++i) {
    const double t = radius * static_cast<double>(i) / static_cast<double>(n);
    best = std::max(best, m.value - m.value_at(t * dir));
  }
  return best;
}

double cauchy_bound(const QuadraticModel& m, double radius, double kappa_fcd) {
  const double g = m.gradient.norm();
  const double h = m.hessian_norm();
  const double reach = h > 0.0 ? std::min(g / h, radius) : radius;
  return 0.5 * kappa_fcd * g * reach;
}

}  // namespace

TEST_CASE("interior Cauchy point on a convex model") {
  Eigen::VectorXd g(2);
  g << 1.0, 0.0;
  const QuadraticModel m = make_model(g, Eigen::MatrixXd::Identity(2, 2));
  const CauchyStep cs = cauchy_step(m, 2.0);
  CHECK(cs.step[0] == doctest::Approx(-1.0).epsilon(1e-15));
  CHECK(cs.step[1] == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(cs.decrease == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(cs.decrease >= cauchy_bound(m, 2.0, 1.0));
  CHECK(cauchy_bound(m, 2.0, 0.5) == doctest::Approx(0.25).epsilon(1e-15));
}

TEST_CASE("boundary Cauchy point on a concave model") {
  Eigen::VectorXd g(2);
  g << 1.0, 0.0;
  const QuadraticModel m = make_model(g, -Eigen::MatrixXd::Identity(2, 2));
  const CauchyStep cs = cauchy_step(m, 1.0);
  CHECK(cs.step.norm() == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(cs.step[0] == doctest::Approx(-1.0).epsilon(1e-15));
  CHECK(cs.decrease == doctest::Approx(1.5).epsilon(1e-15));
}

TEST_CASE("zero gradient yields a zero step") {
  const QuadraticModel m = make_model(Eigen::VectorXd::Zero(3), Eigen::MatrixXd());
  const CauchyStep cs = cauchy_step(m, 1.0);
  CHECK(cs.step.norm() == 0.0);
  CHECK(cs.decrease == 0.0);
}

TEST_CASE("first-order models always step to the boundary") {
  Eigen::VectorXd g(3);
  g << 3.0, -4.0, 12.0;  // norm 13
  const QuadraticModel m = make_model(g, Eigen::MatrixXd());
  const CauchyStep cs = cauchy_step(m, 0.25);
  CHECK(cs.step.norm() == doctest::Approx(0.25).epsilon(1e-14));
  CHECK(cs.decrease == doctest::Approx(0.25 * 13.0).epsilon(1e-14));
}

TEST_CASE("Cauchy decrease matches exhaustive line search") {
  Rng rng = make_stream(1717);
  std::normal_distribution<double> z(0.0, 1.0);
  for (int trial = 0; trial < 40; ++trial) {
    Eigen::VectorXd g(2);
    g << z(rng), z(rng);
    if (g.norm() < 1e-3) continue;
    Eigen::MatrixXd a(2, 2);
    a << z(rng), z(rng), z(rng), z(rng);
    const Eigen::MatrixXd h = 0.5 * (a + a.transpose());
    const double radius = 0.25 + std::abs(z(rng));
    const QuadraticModel m = make_model(g, h);
    const CauchyStep cs = cauchy_step(m, radius);
    const double brute = line_search_decrease(m, radius);
    CHECK(cs.decrease >= brute - 1e-8 * (1.0 + brute));
    CHECK(cs.decrease >= cauchy_bound(m, radius, 1.0) * (1.0 - 1e-12));
    CHECK(cs.step.norm() <= radius * (1.0 + 1e-12));
  }
}

TEST_CASE("rho handles degenerate and invalid decreases") {
  CHECK(rho_ratio(1.0, 0.5, 0.25) == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(rho_ratio(1.0, 2.0, 0.0) == -std::numeric_limits<double>::infinity());
  CHECK_THROWS_AS(rho_ratio(1.0, 0.5, -0.1), NumericError);
  CHECK_THROWS_AS(rho_ratio(std::numeric_limits<double>::quiet_NaN(), 0.5, 0.1), NumericError);
}

TEST_CASE("iteration acceptance requires both rho and gradient tests") {
  StormConfig cfg;
  cfg.eta1 = 0.1;
  cfg.eta2 = 0.5;
  cfg.gamma = 2.0;

  Eigen::VectorXd g(2);
  g << 1.0, 0.0;
  QuadraticModel m = make_model(g, Eigen::MatrixXd());
  StormState state;
  state.x = Eigen::VectorXd::Zero(2);
  state.delta = 1.0;
  const CauchyStep cs = cauchy_step(m, state.delta);

  SUBCASE("success moves x and doubles the radius up to the cap") {
    // rho = (1 - 0) / decrease with f_s chosen to accept; |g| = 1 >= 0.5.
    const IterationRecord rec = storm_iterate(state, m, cs, 1.0, 0.0, cfg, 16.0);
    CHECK(rec.success);
    CHECK(state.delta == 2.0);
    CHECK((state.x - cs.step).norm() == 0.0);
    CHECK((rec.x_after - state.x).norm() == 0.0);
  }
  SUBCASE("the radius cap binds") {
    cfg.eta2 = 0.01;
    state.delta = 16.0;
    const CauchyStep wide = cauchy_step(m, state.delta);
    storm_iterate(state, m, wide, 100.0, 0.0, cfg, 16.0);
    CHECK(state.delta == 16.0);
  }
  SUBCASE("low rho rejects and halves the radius") {
    const IterationRecord rec = storm_iterate(state, m, cs, 0.0, 1.0, cfg, 16.0);
    CHECK_FALSE(rec.success);
    CHECK(state.delta == 0.5);
    CHECK(state.x.norm() == 0.0);
  }
  SUBCASE("small model gradient rejects even with good rho") {
    state.delta = 4.0;  // |g| = 1 < eta2 * delta = 2
    const CauchyStep wide = cauchy_step(m, state.delta);
    const IterationRecord rec = storm_iterate(state, m, wide, 100.0, 0.0, cfg, 16.0);
    CHECK_FALSE(rec.success);
    CHECK(state.delta == 2.0);
    CHECK(state.x.norm() == 0.0);
  }
}

TEST_CASE("noiseless run: monotone objective, exact Cauchy bound, fast finish") {
  const TestProblem problem = make_noisy_quadratic(2, 10.0, 0.0, 0.0, 3);
  ExactModelSource models(problem);
  ExactEstimateSource estimates(problem);
  RunSpec spec;
  spec.epsilon = 1e-4;
  spec.seed = 99;
  const RunResult res = run_storm(models, estimates, &problem, problem.x0, spec);

  REQUIRE(res.t_eps.has_value());
  CHECK(*res.t_eps < 200);
  CHECK_FALSE(res.timed_out);
  CHECK(res.cauchy_violations == 0);
  CHECK(res.guarantee_violations == 0);
  CHECK(res.decrease_violations == 0);
  for (std::size_t i = 0; i + 1 < res.records.size(); ++i) {
    CHECK(res.records[i + 1].f_true_before <= res.records[i].f_true_before * (1.0 + 1e-14));
  }
  // Final iterate actually meets the tolerance.
  CHECK(problem.grad(res.state.x).norm() <= 1e-4);
}

TEST_CASE("radius stays on the geometric grid inside (0, delta_max]") {
  const TestProblem problem = make_noisy_quadratic(3, 5.0, 0.05, 0.05, 4);
  auto oracle = make_gaussian_oracle(problem);
  AccuracyTargets targets;
  targets.alpha = 0.9;
  targets.beta = 0.9999995;
  targets.eps_f = 1e-5;
  SaaModelSource models(oracle, targets);
  SaaEstimateSource estimates(oracle, targets);
  RunSpec spec;
  spec.epsilon = 1e-3;
  spec.seed = 12;
  spec.config.eps_f = 1e-5;
  const RunResult res = run_storm(models, estimates, &problem, problem.x0, spec);

  REQUIRE(res.delta0_used > 0.0);
  const double log_gamma = std::log(spec.config.gamma);
  for (const IterationRecord& rec : res.records) {
    CHECK(rec.delta > 0.0);
    CHECK(rec.delta <= res.delta_max_used * (1.0 + 1e-12));
    const double j = std::log(rec.delta / res.delta0_used) / log_gamma;
    CHECK(std::abs(j - std::round(j)) < 1e-9);
  }
  // Start radius landed on the epsilon/zeta grid without moving much.
  const double j0 = std::log(res.delta0_used / res.delta_eps) / log_gamma;
  CHECK(std::abs(j0 - std::round(j0)) < 1e-9);
  CHECK(res.delta0_used <= spec.config.delta0 * spec.config.gamma);
  CHECK(res.delta0_used >= spec.config.delta0 / spec.config.gamma);
}

TEST_CASE("acceptance coupling: x and the radius move together") {
  const TestProblem problem = make_noisy_quadratic(3, 5.0, 0.05, 0.05, 4);
  auto oracle = make_gaussian_oracle(problem);
  AccuracyTargets targets;
  targets.alpha = 0.9;
  targets.beta = 0.9999995;
  targets.eps_f = 1e-5;
  SaaModelSource models(oracle, targets);
  SaaEstimateSource estimates(oracle, targets);
  RunSpec spec;
  spec.epsilon = 1e-3;
  spec.seed = 21;
  spec.config.eps_f = 1e-5;
  const RunResult res = run_storm(models, estimates, &problem, problem.x0, spec);

  REQUIRE(res.records.size() > 10);
  for (std::size_t i = 0; i < res.records.size(); ++i) {
    const IterationRecord& rec = res.records[i];
    const bool moved = (rec.x_after - rec.x_before).norm() > 0.0;
    CHECK(moved == rec.success);
    if (i + 1 < res.records.size()) {
      const double next = res.records[i + 1].delta;
      if (rec.success) {
        CHECK(next ==
              doctest::Approx(std::min(spec.config.gamma * rec.delta, res.delta_max_used))
                  .epsilon(1e-12));
      } else {
        CHECK(next == doctest::Approx(rec.delta / spec.config.gamma).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("runs are bitwise reproducible for a fixed seed") {
  const TestProblem problem = make_noisy_quadratic(3, 5.0, 0.1, 0.1, 4);
  auto oracle = make_gaussian_oracle(problem);
  AccuracyTargets targets;
  targets.alpha = 0.9;
  targets.beta = 0.9999995;
  targets.eps_f = 1e-5;
  RunSpec spec;
  spec.epsilon = 1e-2;
  spec.seed = 31;
  spec.config.eps_f = 1e-5;

  auto run_once = [&]() {
    SaaModelSource models(oracle, targets);
    SaaEstimateSource estimates(oracle, targets);
    return run_storm(models, estimates, &problem, problem.x0, spec);
  };
  const RunResult a = run_once();
  const RunResult b = run_once();
  REQUIRE(a.records.size() == b.records.size());
  CHECK(a.t_eps == b.t_eps);
  REQUIRE((a.state.x - b.state.x).norm() == 0.0);
  for (std::size_t i = 0; i < a.records.size(); ++i) {
    CHECK(a.records[i].delta == b.records[i].delta);
    CHECK(a.records[i].rho == b.records[i].rho);
    CHECK(a.records[i].f0 == b.records[i].f0);
  }
}
