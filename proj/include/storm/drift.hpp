#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <vector>

#include "storm/walk.hpp"

namespace storm {

/// Supermartingale drift parameters for the potential process: conditional
/// on the current radius, increments satisfy E[V_k | Delta_k] <= -theta * h(Delta_k).
struct DriftSpec {
  double theta = 1.0;
  std::function<double(double)> h;  // nondecreasing, positive for positive arguments
  double phi0 = 1.0;
  double phi_max = std::numeric_limits<double>::infinity();

  /// Throws ConfigError if theta/phi0/phi_max are out of range or h is not
  /// positive and nondecreasing on the walk's reachable radius grid.
  void validate(const WalkConfig& walk) const;
};

enum class IncrementKind {
  two_point,      // decrease (2-p)/p * theta*h w.p. p, increase theta*h otherwise
  deterministic,  // always decrease theta*h
};

struct PhiDeltaTrace {
  std::vector<double> phi;               // Phi_0 .. Phi_T
  std::vector<double> delta;             // Delta_0 .. Delta_T
  std::vector<double> v;                 // V_k = Phi_{k+1} - Phi_k, k < T
  std::vector<std::uint8_t> good_event;  // Bernoulli(p) outcome driving step k
};

struct PhiDeltaResult {
  PhiDeltaTrace trace;
  RenewalTrace renewal;
  std::int64_t stop_time = 0;
};

/// Thrown when the iteration cap fires before the stop rule; carries the
/// partial trajectory for inspection.
struct TimeoutError : std::runtime_error {
  TimeoutError(const std::string& what, PhiDeltaResult partial_result)
      : std::runtime_error(what), partial(std::move(partial_result)) {}
  PhiDeltaResult partial;
};

using StopRule = std::function<bool(double phi, double delta, std::int64_t k)>;

/// Runs the coupled (potential, radius) process until stop_rule fires. The
/// radius follows simulate_walk's dynamics; the potential moves by a two-point
/// or deterministic increment whose conditional mean is exactly -theta*h(Delta_k)
/// (clamping to [0, phi_max] can only help the drift stop sooner). hard_cap < 0
/// selects 1000x the theoretical stop bound; if that bound is undefined
/// (p <= 1/2) an explicit cap is required.
PhiDeltaResult simulate_phi_delta(const WalkConfig& cfg, const DriftSpec& drift,
                                  const StopRule& stop_rule,
                                  IncrementKind kind = IncrementKind::two_point,
                                  std::int64_t hard_cap = -1);

/// Expected-stopping-time bound
///   p/(2p-1) * (phi0 / (theta*h(delta_eps)) + h(delta0)/h(delta_eps) + 1).
/// Throws std::domain_error for p <= 1/2.
double theoretical_stop_bound(double p, const DriftSpec& drift, double delta_eps, double delta0);

}  // namespace storm
