#include "storm/config.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "storm/errors.hpp"

namespace storm {

namespace {
constexpr double kRelTol = 1e-12;

void require(bool ok, const std::string& what) {
  if (!ok) throw ConfigError(what);
}
}  // namespace

void StormConfig::validate() const {
  require(std::isfinite(gamma) && gamma > 1.0, "gamma must exceed 1");
  require(eta1 > 0.0 && eta1 < 1.0, "eta1 must lie in (0, 1)");
  require(eta2 > 0.0, "eta2 must be positive");
  require(delta0 > 0.0 && std::isfinite(delta0), "delta0 must be positive");
  require(delta_max >= delta0, "delta_max must be at least delta0");
  require(kappa_fcd > 0.0 && kappa_fcd <= 1.0, "kappa_fcd must lie in (0, 1]");
  require(kappa_ef > 0.0 && kappa_eg > 0.0, "kappa_ef and kappa_eg must be positive");
  require(kappa_bhm >= 1.0, "kappa_bhm must be at least 1");
  require(eps_f >= 0.0, "eps_f must be nonnegative");
  require(eps_f <= 0.25 * eta1 * eta2 * (1.0 + kRelTol),
          "eps_f must not exceed eta1*eta2/4 = " + std::to_string(0.25 * eta1 * eta2));
  require(max_iters >= 1, "max_iters must be at least 1");
}

double PotentialSpec::nu_or_default(const StormConfig& cfg) const {
  return nu < 0.0 ? 320.0 / (320.0 + cfg.eta2) : nu;
}

double PotentialSpec::zeta_or_default(const StormConfig& cfg) const {
  return zeta < 0.0 ? 20.0 * cfg.kappa_eg : zeta;
}

void PotentialSpec::validate(const StormConfig& cfg) const {
  const double n = nu_or_default(cfg);
  const double z = zeta_or_default(cfg);
  require(n > 0.0 && n < 1.0, "nu must lie in (0, 1)");
  require(z > 0.0 && std::isfinite(z), "zeta must be positive");

  const double zeta_floor =
      cfg.kappa_eg + std::max({cfg.eta2, cfg.kappa_bhm,
                               8.0 * cfg.kappa_ef / (cfg.kappa_fcd * (1.0 - cfg.eta1))});
  require(z >= zeta_floor * (1.0 - kRelTol),
          "zeta must be at least " + std::to_string(zeta_floor));

  const double g2 = cfg.gamma * cfg.gamma;
  const double weight_floor =
      std::max({4.0 * g2 / (z * 0.1), 4.0 * g2 / (cfg.eta1 * cfg.eta2 * cfg.kappa_fcd),
                g2 / cfg.kappa_ef});
  require(n / (1.0 - n) >= weight_floor * (1.0 - kRelTol),
          "nu/(1-nu) must be at least " + std::to_string(weight_floor));
}

double potential_value(double f_value, double delta, double nu) {
  if (!(f_value >= 0.0) || !std::isfinite(f_value)) {
    throw ConfigError("potential requires a nonnegative finite objective value");
  }
  if (!(delta >= 0.0) || !std::isfinite(delta)) {
    throw ConfigError("potential requires a nonnegative finite radius");
  }
  if (!(nu > 0.0 && nu < 1.0)) throw ConfigError("nu must lie in (0, 1)");
  return nu * f_value + (1.0 - nu) * delta * delta;
}

double DriftConstants::alpha_min_for(double beta) const {
  if (!(beta > 0.5 && beta <= 1.0)) {
    throw std::domain_error("alpha_min_for requires beta in (1/2, 1]");
  }
  const double t = ratio_rhs * (1.0 - beta);
  return (0.5 + t) / (beta + t);
}

bool DriftConstants::feasible(double alpha, double beta) const {
  if (!(alpha > 0.0 && alpha <= 1.0 && beta > 0.0 && beta <= 1.0)) return false;
  const double ab = alpha * beta;
  if (!(ab > 0.5)) return false;
  if (beta < beta_min * (1.0 - kRelTol)) return false;
  const double denom = (1.0 - alpha) * (1.0 - beta);
  if (denom == 0.0) return true;
  return (ab - 0.5) / denom >= ratio_rhs * (1.0 - kRelTol);
}

DriftConstants drift_constants(const StormConfig& cfg, double lipschitz) {
  cfg.validate();
  require(std::isfinite(lipschitz) && lipschitz > 0.0, "lipschitz constant must be positive");
  require(std::abs(cfg.eta1 - 0.1) <= 1e-12, "drift constants need eta1 = 0.1");
  require(std::abs(cfg.kappa_fcd - 0.5) <= 1e-12, "drift constants need kappa_fcd = 0.5");
  require(cfg.gamma <= 2.0 + 1e-12, "drift constants need gamma <= 2");
  require(std::abs(cfg.kappa_ef - cfg.kappa_eg) <= kRelTol * cfg.kappa_ef,
          "drift constants need kappa_ef = kappa_eg");
  require(cfg.kappa_ef >= 10.0 * (1.0 - kRelTol), "drift constants need kappa_ef >= 10");
  require(cfg.eta2 > 0.03, "drift constants need eta2 > 0.03");
  require(cfg.kappa_bhm <= 12.0 * cfg.kappa_ef * (1.0 + kRelTol),
          "drift constants need kappa_bhm <= 12*kappa_ef");

  DriftConstants d;
  d.zeta = 20.0 * cfg.kappa_eg;
  d.theta = 1.0 / (1600.0 * cfg.kappa_eg);
  d.c1 = 0.1;
  d.c2 = 0.5 * cfg.eta1 * cfg.eta2 * cfg.kappa_fcd * std::min(cfg.eta2 / cfg.kappa_bhm, 1.0) -
         2.0 * cfg.eps_f;
  d.c3 = 1.0 + 1.5 * lipschitz / d.zeta;
  d.beta_min = (8800.0 * cfg.kappa_eg + lipschitz + 8.0 * cfg.eta2) /
               (8800.0 * cfg.kappa_eg + lipschitz + 9.0 * cfg.eta2);
  d.ratio_rhs = 10.0 + 30.0 * lipschitz / (40.0 * cfg.kappa_eg);
  return d;
}

}  // namespace storm
