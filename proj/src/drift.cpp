#include "storm/drift.hpp"

#include <algorithm>
#include <cmath>

#include "storm/errors.hpp"

namespace storm {

void DriftSpec::validate(const WalkConfig& walk) const {
  if (!(theta > 0.0) || !std::isfinite(theta)) throw ConfigError("drift theta must be positive");
  if (!(phi0 >= 0.0) || !std::isfinite(phi0)) throw ConfigError("phi0 must be nonnegative");
  if (!(phi_max >= phi0)) throw ConfigError("phi_max must be at least phi0");
  if (!h) throw ConfigError("drift h is not set");
  // h must be positive and nondecreasing on every radius the walk can reach.
  double prev = 0.0;
  bool first = true;
  for (double d = walk.delta_eps * std::exp(-walk.lambda);
       d <= walk.delta_max * (1.0 + 1e-12); d *= std::exp(walk.lambda)) {
    const double hd = h(d);
    if (!(hd > 0.0) || !std::isfinite(hd)) {
      throw ConfigError("drift h must be positive on the radius grid");
    }
    if (!first && hd < prev * (1.0 - 1e-12)) {
      throw ConfigError("drift h must be nondecreasing on the radius grid");
    }
    prev = hd;
    first = false;
  }
}

PhiDeltaResult simulate_phi_delta(const WalkConfig& cfg, const DriftSpec& drift,
                                  const StopRule& stop_rule, IncrementKind kind,
                                  std::int64_t hard_cap) {
  cfg.validate();
  drift.validate(cfg);
  if (!stop_rule) throw ConfigError("stop rule is not set");
  if (kind == IncrementKind::two_point && !(cfg.p > 0.0)) {
    throw ConfigError("two-point increments require p > 0");
  }
  if (hard_cap < 0) {
    if (!(cfg.p > 0.5)) throw ConfigError("p <= 1/2 has no default cap; pass hard_cap explicitly");
    hard_cap = static_cast<std::int64_t>(
        std::ceil(1000.0 * theoretical_stop_bound(cfg.p, drift, cfg.delta_eps, cfg.delta0)));
  }

  // Same integer lattice as simulate_walk: level[j+1] = delta_eps * e^(j*lambda),
  // j = -1 is the floor.
  const std::int64_t j_max = static_cast<std::int64_t>(
      std::llround(std::log(cfg.delta_max / cfg.delta_eps) / cfg.lambda));
  std::vector<double> level(static_cast<std::size_t>(j_max + 2));
  for (std::int64_t j = -1; j <= j_max; ++j) {
    level[static_cast<std::size_t>(j + 1)] =
        cfg.delta_eps * std::exp(static_cast<double>(j) * cfg.lambda);
  }
  std::int64_t j = static_cast<std::int64_t>(
      std::llround(std::log(cfg.delta0 / cfg.delta_eps) / cfg.lambda));

  Rng rng = make_stream(cfg.seed);
  std::bernoulli_distribution good(cfg.p);

  PhiDeltaResult out;
  auto& tr = out.trace;
  double phi = drift.phi0;
  tr.phi.push_back(phi);
  tr.delta.push_back(level[static_cast<std::size_t>(j + 1)]);

  std::int64_t k = 0;
  while (!stop_rule(phi, tr.delta.back(), k)) {
    if (k >= hard_cap) {
      out.renewal = measure_interarrivals(tr.delta, cfg.delta_eps);
      out.stop_time = k;
      throw TimeoutError("phi-delta simulation hit the iteration cap", std::move(out));
    }
    const bool g = kind == IncrementKind::deterministic || good(rng);
    const double hd = drift.theta * drift.h(tr.delta.back());
    const double v_raw = kind == IncrementKind::deterministic
                             ? -hd
                             : (g ? -(2.0 - cfg.p) / cfg.p * hd : hd);
    const double phi_next = std::clamp(phi + v_raw, 0.0, drift.phi_max);
    j = std::clamp<std::int64_t>(j + (g ? 1 : -1), -1, j_max);
    tr.v.push_back(phi_next - phi);
    tr.good_event.push_back(g ? 1 : 0);
    phi = phi_next;
    tr.phi.push_back(phi);
    tr.delta.push_back(level[static_cast<std::size_t>(j + 1)]);
    ++k;
  }
  out.stop_time = k;
  // The trace holds states 0..k, so the scan's count is exactly N(k).
  out.renewal = measure_interarrivals(tr.delta, cfg.delta_eps);
  return out;
}

double theoretical_stop_bound(double p, const DriftSpec& drift, double delta_eps, double delta0) {
  if (!(p > 0.5)) throw std::domain_error("stop-time bound requires p > 1/2");
  if (!(p <= 1.0)) throw std::domain_error("p must lie in (1/2, 1]");
  if (!drift.h) throw ConfigError("drift h is not set");
  const double h_eps = drift.h(delta_eps);
  const double h_0 = drift.h(delta0);
  if (!(h_eps > 0.0) || !(h_0 > 0.0)) throw ConfigError("drift h must be positive");
  return p / (2.0 * p - 1.0) * (drift.phi0 / (drift.theta * h_eps) + h_0 / h_eps + 1.0);
}

}  // namespace storm
