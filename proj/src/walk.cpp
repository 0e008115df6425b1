#include "storm/walk.hpp"

#include <cmath>
#include <stdexcept>

#include "storm/errors.hpp"

namespace storm {

namespace {

constexpr double kGridRelTol = 1e-9;
constexpr double kThresholdRelTol = 1e-12;

// Nearest grid exponent j with x ~ delta_eps * e^(j*lambda); throws if x is
// not within tolerance of that grid point.
std::int64_t grid_index(double x, double delta_eps, double lambda, const char* name) {
  const double j_real = std::log(x / delta_eps) / lambda;
  const double j = std::round(j_real);
  const double snapped = delta_eps * std::exp(j * lambda);
  if (std::abs(x - snapped) > kGridRelTol * x) {
    throw ConfigError(std::string(name) + " is not on the delta_eps geometric grid");
  }
  return static_cast<std::int64_t>(j);
}

}  // namespace

void WalkConfig::validate() const {
  if (!(p >= 0.0 && p <= 1.0)) throw ConfigError("walk p must lie in [0, 1]");
  if (!(lambda > 0.0) || !std::isfinite(lambda)) throw ConfigError("walk lambda must be positive");
  if (!(delta_eps > 0.0) || !std::isfinite(delta_eps)) {
    throw ConfigError("delta_eps must be positive");
  }
  if (!(delta0 > 0.0) || !(delta_max > 0.0)) throw ConfigError("deltas must be positive");
  if (delta0 > delta_max * (1.0 + kGridRelTol)) throw ConfigError("delta0 exceeds delta_max");
  if (delta_eps > delta_max * (1.0 + kGridRelTol)) throw ConfigError("delta_eps exceeds delta_max");
  const std::int64_t j0 = grid_index(delta0, delta_eps, lambda, "delta0");
  grid_index(delta_max, delta_eps, lambda, "delta_max");
  if (j0 < -1) throw ConfigError("delta0 lies below the walk floor delta_eps * e^(-lambda)");
}

std::vector<double> simulate_walk(const WalkConfig& cfg, std::int64_t steps) {
  cfg.validate();
  if (steps < 1) throw ConfigError("walk needs at least one step");

  const std::int64_t j_max = grid_index(cfg.delta_max, cfg.delta_eps, cfg.lambda, "delta_max");
  // Grid values tabulated once so every state is exactly reproducible; index 0
  // holds the floor level j = -1.
  std::vector<double> level(static_cast<std::size_t>(j_max + 2));
  for (std::int64_t j = -1; j <= j_max; ++j) {
    level[static_cast<std::size_t>(j + 1)] =
        cfg.delta_eps * std::exp(static_cast<double>(j) * cfg.lambda);
  }

  Rng rng = make_stream(cfg.seed);
  std::bernoulli_distribution up(cfg.p);

  std::vector<double> trace(static_cast<std::size_t>(steps));
  std::int64_t j = grid_index(cfg.delta0, cfg.delta_eps, cfg.lambda, "delta0");
  trace[0] = level[static_cast<std::size_t>(j + 1)];
  for (std::int64_t k = 1; k < steps; ++k) {
    j += up(rng) ? 1 : -1;
    if (j > j_max) j = j_max;
    if (j < -1) j = -1;
    trace[static_cast<std::size_t>(k)] = level[static_cast<std::size_t>(j + 1)];
  }
  return trace;
}

RenewalTrace measure_interarrivals(const std::vector<double>& trace, double delta_eps) {
  if (trace.empty()) throw ConfigError("cannot measure renewals of an empty trace");
  if (!(delta_eps > 0.0)) throw ConfigError("delta_eps must be positive");
  const double threshold = delta_eps * (1.0 - kThresholdRelTol);

  RenewalTrace out;
  out.stop_time = static_cast<std::int64_t>(trace.size()) - 1;
  out.arrival_times.push_back(0);  // A_0 = 0 regardless of the initial state
  for (std::int64_t m = 1; m <= out.stop_time; ++m) {
    if (trace[static_cast<std::size_t>(m)] >= threshold) {
      out.interarrivals.push_back(m - out.arrival_times.back());
      out.arrival_times.push_back(m);
    }
  }
  out.count_at_stop = static_cast<std::int64_t>(out.arrival_times.size()) - 1;
  return out;
}

InterarrivalStats interarrival_stats(const std::vector<double>& trace,
                                     const RenewalTrace& renewal, double delta_eps) {
  const double above = delta_eps * (1.0 + kThresholdRelTol);
  std::vector<double> pooled, from_threshold, from_above;
  pooled.reserve(renewal.interarrivals.size());
  for (std::size_t n = 0; n < renewal.interarrivals.size(); ++n) {
    const double tau = static_cast<double>(renewal.interarrivals[n]);
    const auto prev = static_cast<std::size_t>(renewal.arrival_times[n]);
    pooled.push_back(tau);
    (trace[prev] > above ? from_above : from_threshold).push_back(tau);
  }
  InterarrivalStats s;
  s.lag1 = lag1_autocorr(pooled);
  s.pooled = summarize(std::move(pooled));
  s.from_threshold = summarize(std::move(from_threshold));
  s.from_above = summarize(std::move(from_above));
  return s;
}

double theoretical_interarrival_bound(double p) {
  if (!(p > 0.5)) throw std::domain_error("interarrival bound requires p > 1/2");
  if (!(p <= 1.0)) throw std::domain_error("p must lie in (1/2, 1]");
  return p / (2.0 * p - 1.0);
}

}  // namespace storm
