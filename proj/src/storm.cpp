#include "storm/storm.hpp"

#include <algorithm>
#include <cmath>

#include "storm/errors.hpp"

namespace storm {

namespace {

constexpr double kCauchyRelTol = 1e-10;
constexpr double kGuaranteeRelTol = 1e-8;

double snap_to_grid(double x, double anchor, double gamma, double lo, double hi) {
  const double j = std::round(std::log(x / anchor) / std::log(gamma));
  return std::clamp(anchor * std::pow(gamma, j), lo, hi);
}

}  // namespace

CauchyStep cauchy_step(const QuadraticModel& model, double radius) {
  if (!(radius > 0.0) || !std::isfinite(radius)) throw ConfigError("radius must be positive");
  if (!model.gradient.allFinite()) throw NumericError("model gradient is not finite");
  if (model.has_hessian() && !model.hessian.allFinite()) {
    throw NumericError("model hessian is not finite");
  }

  CauchyStep out;
  const double gnorm = model.gradient.norm();
  if (gnorm == 0.0) {
    out.step = Eigen::VectorXd::Zero(model.gradient.size());
    return out;
  }

  // Along s(t) = -t g/|g| the model reads m0 - t|g| + t^2 curv / 2 with
  // curv = g'Hg/|g|^2; nonpositive curvature pushes the minimizer to the
  // boundary, otherwise it sits at t = |g|/curv clipped to the ball.
  double curv = 0.0;
  if (model.has_hessian()) {
    curv = model.gradient.dot(model.hessian * model.gradient) / (gnorm * gnorm);
  }
  const double t = curv <= 0.0 ? radius : std::min(gnorm / curv, radius);
  out.step = (-t / gnorm) * model.gradient;
  out.decrease = t * gnorm - 0.5 * t * t * curv;
  if (!std::isfinite(out.decrease)) throw NumericError("model decrease is not finite");
  return out;
}

double rho_ratio(double f0, double fs, double model_decrease) {
  if (!std::isfinite(f0) || !std::isfinite(fs)) throw NumericError("estimates must be finite");
  if (!(model_decrease >= 0.0)) throw NumericError("model decrease must be nonnegative");
  if (model_decrease == 0.0) return -std::numeric_limits<double>::infinity();
  return (f0 - fs) / model_decrease;
}

IterationRecord storm_iterate(StormState& state, const QuadraticModel& model,
                              const CauchyStep& cs, double f0, double fs, const StormConfig& cfg,
                              double delta_cap) {
  IterationRecord rec;
  rec.k = state.k;
  rec.x_before = state.x;
  rec.delta = state.delta;
  rec.grad_norm_model = model.gradient.norm();
  rec.model_decrease = cs.decrease;
  rec.f0 = f0;
  rec.fs = fs;
  rec.rho = rho_ratio(f0, fs, cs.decrease);
  rec.success = rec.rho >= cfg.eta1 && rec.grad_norm_model >= cfg.eta2 * state.delta;

  if (rec.success) {
    state.x += cs.step;
    state.delta = std::min(cfg.gamma * state.delta, delta_cap);
  } else {
    state.delta /= cfg.gamma;
  }
  state.k += 1;
  rec.x_after = state.x;
  return rec;
}

RunResult run_storm(ModelSource& models, EstimateSource& estimates, const TestProblem* referee,
                    const Eigen::VectorXd& x0, const RunSpec& spec) {
  const StormConfig& cfg = spec.config;
  cfg.validate();
  spec.potential.validate(cfg);
  if (!x0.allFinite() || x0.size() == 0) throw ConfigError("x0 must be finite and nonempty");
  if (spec.epsilon < 0.0) throw ConfigError("epsilon must be nonnegative");
  if (spec.epsilon > 0.0 && referee == nullptr) {
    throw ConfigError("a first-order stop needs a referee");
  }

  const double nu = spec.potential.nu_or_default(cfg);
  const double zeta = spec.potential.zeta_or_default(cfg);

  RunResult out;
  out.delta_eps = spec.epsilon > 0.0 ? spec.epsilon / zeta : 0.0;
  out.delta0_used = cfg.delta0;
  out.delta_max_used = cfg.delta_max;
  if (spec.snap_delta0 && out.delta_eps > 0.0) {
    // Keep the whole radius sequence on the gamma-grid anchored at
    // delta_eps: snap the start, and pull the cap down to its grid.
    out.delta_max_used =
        snap_to_grid(cfg.delta_max * (1.0 + 1e-12), out.delta_eps, cfg.gamma, 0.0, cfg.delta_max);
    out.delta0_used =
        snap_to_grid(cfg.delta0, out.delta_eps, cfg.gamma, 0.0, out.delta_max_used);
  }

  StormState state;
  state.x = x0;
  state.delta = out.delta0_used;

  Rng rng = make_stream(spec.seed, 0x5702aULL);

  // Raw guaranteed-decrease rate; the decrease check only applies when the
  // estimate accuracy eps_f leaves it positive.
  const double c2 =
      0.5 * cfg.eta1 * cfg.eta2 * cfg.kappa_fcd * std::min(cfg.eta2 / cfg.kappa_bhm, 1.0) -
      2.0 * cfg.eps_f;
  const double small_radius_scale =
      std::min({1.0 / cfg.kappa_bhm, 1.0 / cfg.eta2,
                cfg.kappa_fcd * (1.0 - cfg.eta1) / (8.0 * cfg.kappa_ef)});

  out.delta_series.push_back(state.delta);
  while (true) {
    double f_true = std::numeric_limits<double>::quiet_NaN();
    double grad_true = std::numeric_limits<double>::quiet_NaN();
    if (referee != nullptr) {
      f_true = referee->f(state.x);
      grad_true = referee->grad(state.x).norm();
      if (spec.epsilon > 0.0 && grad_true <= spec.epsilon) {
        out.t_eps = state.k;
        break;
      }
    }
    if (state.k >= cfg.max_iters) {
      out.timed_out = spec.epsilon > 0.0;
      break;
    }

    const QuadraticModel model = models.build(state.x, state.delta, rng);
    const CauchyStep cs = cauchy_step(model, state.delta);
    const double gm = model.gradient.norm();
    const double cauchy_bound =
        0.5 * cfg.kappa_fcd * gm *
        std::min(model.has_hessian() ? gm / std::max(model.hessian_norm(), 1e-300)
                                     : state.delta,
                 state.delta);
    if (cs.decrease < cauchy_bound * (1.0 - kCauchyRelTol)) ++out.cauchy_violations;

    const EstimateSource::Pair est = estimates.build(state.x, state.x + cs.step, state.delta, rng);

    const double delta_used = state.delta;
    IterationRecord rec =
        storm_iterate(state, model, cs, est.f0, est.fs, cfg, out.delta_max_used);

    if (referee != nullptr) {
      rec.f_true_before = f_true;
      rec.grad_norm_true = grad_true;
      rec.f_true_after = rec.success ? referee->f(state.x) : f_true;
      rec.phi_before = potential_value(f_true, delta_used, nu);
      rec.phi_after = potential_value(rec.f_true_after, state.delta, nu);
      if (spec.classifier) {
        const auto [i_ev, j_ev] =
            spec.classifier(model, rec.x_before, cs.step, est.f0, est.fs, delta_used);
        rec.i_event = i_ev ? 1 : 0;
        rec.j_event = j_ev ? 1 : 0;
        if (i_ev && j_ev && cfg.eps_f <= cfg.kappa_ef &&
            delta_used <= small_radius_scale * gm * (1.0 - kGuaranteeRelTol) && !rec.success) {
          ++out.guarantee_violations;
        }
        if (rec.success && j_ev && c2 > 0.0 &&
            rec.f_true_after - rec.f_true_before >
                -c2 * delta_used * delta_used * (1.0 - kGuaranteeRelTol)) {
          ++out.decrease_violations;
        }
      }
      if (rec.success && !referee->in_box(state.x)) ++out.box_exits;
    }

    out.delta_series.push_back(state.delta);
    if (spec.record_trace) out.records.push_back(std::move(rec));
  }

  out.state = state;
  out.value_samples = models.value_samples() + estimates.value_samples();
  out.grad_samples = models.grad_samples();
  return out;
}

}  // namespace storm
