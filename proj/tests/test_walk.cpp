#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <set>
#include <vector>

#include "doctest.h"
#include "storm/errors.hpp"
#include "storm/walk.hpp"

using namespace storm;

namespace {

WalkConfig base_config() {
  WalkConfig cfg;
  cfg.p = 0.75;
  cfg.delta0 = 1.0;
  cfg.delta_eps = 1.0;
  cfg.delta_max = 4.0;
  cfg.seed = 42;
  return cfg;
}

// Arrival times recomputed from first principles: every index whose radius is
// at or above the threshold, scanning forward, with index 0 always included.
std::vector<std::int64_t> arrivals_by_definition(const std::vector<double>& trace,
                                                 double delta_eps) {
  std::vector<std::int64_t> arrivals{0};
  for (std::size_t m = 1; m < trace.size(); ++m) {
    if (trace[m] >= delta_eps * (1.0 - 1e-12)) arrivals.push_back(static_cast<std::int64_t>(m));
  }
  return arrivals;
}

}  // namespace

TEST_CASE("all-up walk doubles until the cap") {
  WalkConfig cfg = base_config();
  cfg.p = 1.0;
  const std::vector<double> trace = simulate_walk(cfg, 5);
  const std::vector<double> expect{1.0, 2.0, 4.0, 4.0, 4.0};
  REQUIRE(trace.size() == expect.size());
  for (std::size_t i = 0; i < expect.size(); ++i) CHECK(trace[i] == expect[i]);
}

TEST_CASE("all-down walk parks one level below the threshold") {
  WalkConfig cfg = base_config();
  cfg.p = 0.0;
  const std::vector<double> trace = simulate_walk(cfg, 4);
  CHECK(trace[0] == 1.0);
  for (std::size_t i = 1; i < trace.size(); ++i) CHECK(trace[i] == 0.5);
}

TEST_CASE("config validation rejects malformed walks") {
  WalkConfig cfg = base_config();
  cfg.p = 1.2;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = base_config();
  cfg.p = -0.1;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = base_config();
  cfg.lambda = 0.0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = base_config();
  cfg.delta0 = 1.3;  // off the threshold grid
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = base_config();
  cfg.delta0 = 0.25;  // below the floor level
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = base_config();
  cfg.delta_max = 0.9;  // cap below the start
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = base_config();
  cfg.delta0 = 0.5;  // exactly the floor level is legal
  CHECK_NOTHROW(cfg.validate());
}

TEST_CASE("grid closure: every state is threshold times an integer power") {
  WalkConfig cfg = base_config();
  cfg.delta_eps = 0.375;
  cfg.delta0 = 0.75;
  cfg.delta_max = 12.0;
  cfg.p = 0.6;
  const std::vector<double> trace = simulate_walk(cfg, 20000);
  const double floor_level = cfg.delta_eps * std::exp(-cfg.lambda);
  for (double d : trace) {
    CHECK(d >= floor_level * (1.0 - 1e-12));
    CHECK(d <= cfg.delta_max * (1.0 + 1e-12));
    const double j = std::log(d / cfg.delta_eps) / cfg.lambda;
    CHECK(std::abs(j - std::round(j)) < 1e-9);
  }
}

TEST_CASE("walks are reproducible for a fixed seed") {
  const WalkConfig cfg = base_config();
  const std::vector<double> a = simulate_walk(cfg, 5000);
  const std::vector<double> b = simulate_walk(cfg, 5000);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) REQUIRE(a[i] == b[i]);
}

TEST_CASE("hand-traced interarrivals on an alternating trace") {
  const std::vector<double> trace{1.0, 0.5, 1.0, 0.5, 1.0};
  const RenewalTrace renewal = measure_interarrivals(trace, 1.0);
  const std::vector<std::int64_t> arrivals{0, 2, 4};
  const std::vector<std::int64_t> taus{2, 2};
  REQUIRE(renewal.arrival_times == arrivals);
  REQUIRE(renewal.interarrivals == taus);
  CHECK(renewal.count_at_stop == 2);
}

TEST_CASE("time zero counts as an arrival even below the threshold") {
  const std::vector<double> trace{0.5, 0.5, 0.5};
  const RenewalTrace renewal = measure_interarrivals(trace, 1.0);
  REQUIRE(renewal.arrival_times.size() == 1);
  CHECK(renewal.arrival_times[0] == 0);
  CHECK(renewal.interarrivals.empty());
  CHECK(renewal.count_at_stop == 0);
}

TEST_CASE("renewal counting matches the from-scratch definition") {
  WalkConfig cfg = base_config();
  cfg.p = 0.65;
  cfg.delta_max = 8.0;
  cfg.seed = 9;
  const std::vector<double> trace = simulate_walk(cfg, 50000);
  const RenewalTrace renewal = measure_interarrivals(trace, cfg.delta_eps);

  const std::vector<std::int64_t> expect = arrivals_by_definition(trace, cfg.delta_eps);
  REQUIRE(renewal.arrival_times == expect);

  for (std::size_t n = 1; n < renewal.arrival_times.size(); ++n) {
    CHECK(renewal.interarrivals[n - 1] ==
          renewal.arrival_times[n] - renewal.arrival_times[n - 1]);
    CHECK(renewal.interarrivals[n - 1] >= 1);
  }
  // N(stop) counts the arrivals with positive index up to the last examined step.
  CHECK(renewal.count_at_stop ==
        static_cast<std::int64_t>(renewal.arrival_times.size()) - 1);
}

TEST_CASE("interarrival bound values and domain") {
  CHECK(theoretical_interarrival_bound(0.6) == doctest::Approx(3.0).epsilon(1e-15));
  CHECK(theoretical_interarrival_bound(0.75) == doctest::Approx(1.5).epsilon(1e-15));
  CHECK(theoretical_interarrival_bound(0.9) == doctest::Approx(1.125).epsilon(1e-15));
  CHECK(theoretical_interarrival_bound(1.0) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK_THROWS_AS(theoretical_interarrival_bound(0.5), std::domain_error);
  CHECK_THROWS_AS(theoretical_interarrival_bound(0.2), std::domain_error);
}

TEST_CASE("sample mean interarrival stays within the bound") {
  // Sharp regime: the cap sits at the threshold, so every renewal starts at
  // the threshold and the conditional mean is 1/p, still below p/(2p-1).
  for (double p : {0.6, 0.75, 0.9}) {
    WalkConfig cfg = base_config();
    cfg.p = p;
    cfg.delta_max = 1.0;
    cfg.seed = 1234;
    const std::vector<double> trace = simulate_walk(cfg, 200000);
    const RenewalTrace renewal = measure_interarrivals(trace, cfg.delta_eps);
    const InterarrivalStats stats = interarrival_stats(trace, renewal, cfg.delta_eps);
    REQUIRE(stats.pooled.count > 100000);
    const double bound = theoretical_interarrival_bound(p);
    CHECK(stats.pooled.mean <= bound + 3.0 * stats.pooled.sem());
    // Everything renews from the threshold here; its conditional mean is 1/p.
    CHECK(stats.from_above.count == 0);
    CHECK(stats.from_threshold.mean ==
          doctest::Approx(1.0 / p).epsilon(5.0 * stats.pooled.sem()));
  }
}

TEST_CASE("conditional interarrival means split by the renewing state") {
  WalkConfig cfg = base_config();
  cfg.p = 0.75;
  cfg.delta_max = 8.0;
  cfg.seed = 77;
  const std::vector<double> trace = simulate_walk(cfg, 200000);
  const RenewalTrace renewal = measure_interarrivals(trace, cfg.delta_eps);
  const InterarrivalStats stats = interarrival_stats(trace, renewal, cfg.delta_eps);
  // Renewals from strictly above the threshold arrive again immediately.
  REQUIRE(stats.from_above.count > 0);
  CHECK(stats.from_above.mean == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(stats.pooled.count ==
        stats.from_above.count + stats.from_threshold.count);
}
