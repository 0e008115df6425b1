#pragma once

#include <cstdint>
#include <vector>

#include "storm/rng.hpp"
#include "storm/stats.hpp"

namespace storm {

/// Biased birth-death walk for the trust-region radius on the geometric grid
/// {delta_eps * e^(j*lambda)}. Each step multiplies by e^(+-lambda) (up with
/// probability p), capped at delta_max and floored one grid level below the
/// renewal threshold delta_eps.
struct WalkConfig {
  double p = 0.75;
  double lambda = 0.6931471805599453;  // log 2
  double delta0 = 1.0;
  double delta_eps = 1.0;
  double delta_max = 1.0;
  std::uint64_t seed = 0;

  /// Throws ConfigError for p outside [0,1], non-positive lambda/deltas, or
  /// delta0/delta_max off the delta_eps grid or delta0 below the walk floor.
  void validate() const;
};

/// Renewals of the radius walk: arrivals are the times the radius sits at or
/// above the threshold, with A_0 = 0 by convention.
struct RenewalTrace {
  std::vector<std::int64_t> arrival_times;  // A_0, A_1, ...
  std::vector<std::int64_t> interarrivals;  // tau_n = A_n - A_{n-1}, n >= 1
  std::int64_t stop_time = 0;               // last index examined (or the stopping time)
  std::int64_t count_at_stop = 0;           // N(stop_time) = max{n : A_n <= stop_time}
};

/// Interarrival statistics split by the state the renewal started from.
/// from_threshold pools renewals whose previous arrival was at (or, for the
/// A_0 convention, below) the threshold; from_above pools the rest.
struct InterarrivalStats {
  Summary pooled;
  Summary from_threshold;
  Summary from_above;
  double lag1 = 0.0;  // lag-1 autocorrelation of the interarrival sequence
};

/// Simulates `steps` states Delta_0 .. Delta_{steps-1}. Every returned value
/// lies on the grid, is <= delta_max, and is >= delta_eps * e^(-lambda).
std::vector<double> simulate_walk(const WalkConfig& cfg, std::int64_t steps);

/// Scans a radius trace for renewals at `delta_eps` (comparison uses a 1e-12
/// relative slack so traces from other grids classify stably).
RenewalTrace measure_interarrivals(const std::vector<double>& trace, double delta_eps);

InterarrivalStats interarrival_stats(const std::vector<double>& trace, const RenewalTrace& renewal,
                                     double delta_eps);

/// Upper bound p/(2p-1) on the expected interarrival time of the up-biased
/// walk. Throws std::domain_error for p <= 1/2 (no finite bound).
double theoretical_interarrival_bound(double p);

}  // namespace storm
