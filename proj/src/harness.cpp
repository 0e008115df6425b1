#include "storm/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

#include "storm/csv.hpp"
#include "storm/errors.hpp"
#include "storm/storm.hpp"

namespace storm {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::uint64_t cell_seed(std::uint64_t master, std::size_t eps_index, std::size_t rep_index) {
  const std::uint64_t a = mix64(0x9E3779B97F4A7C15ULL * (eps_index + 1));
  const std::uint64_t b = mix64(0xD1B54A32D192ED03ULL * (rep_index + 1));
  return mix64(master ^ a ^ (b << 1));
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::binary);  // binary: byte-identical across platforms
  if (!os) throw std::runtime_error("cannot open " + path.string() + " for writing");
  return os;
}

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open " + path.string() + " for reading");
  return is;
}

}  // namespace

TestProblem ProblemSpec::materialize() const {
  if (name == "quadratic") return make_noisy_quadratic(dim, cond, sigma, sigma_g, seed);
  if (name == "rosenbrock") return make_noisy_rosenbrock(sigma, sigma_g, seed);
  if (name == "logistic") return materialize_logistic().problem;
  throw ConfigError("unknown problem '" + name + "' (quadratic | rosenbrock | logistic)");
}

FiniteSumLogistic ProblemSpec::materialize_logistic() const {
  if (name != "logistic") throw ConfigError("problem '" + name + "' has no dataset");
  return make_finite_sum_logistic(data_n, dim, batch, seed);
}

AccuracyTargets ExperimentPlan::targets() const {
  AccuracyTargets t;
  t.alpha = effective_alpha();
  t.beta = effective_beta();
  t.kappa_ef = config.kappa_ef;
  t.kappa_eg = config.kappa_eg;
  t.eps_f = config.eps_f;
  return t;
}

void ExperimentPlan::validate() const {
  if (problem.name != "quadratic" && problem.name != "rosenbrock" && problem.name != "logistic") {
    throw ConfigError("unknown problem '" + problem.name + "'");
  }
  if (problem.dim < 1) throw ConfigError("dim must be >= 1");
  if (problem.name == "rosenbrock" && problem.dim != 2) {
    throw ConfigError("rosenbrock is two-dimensional");
  }
  if (!(problem.sigma >= 0.0 && problem.sigma_g >= 0.0)) {
    throw ConfigError("sigma and sigma_g must be nonnegative");
  }
  if (!(problem.cond >= 1.0)) throw ConfigError("cond must be >= 1");
  if (problem.name == "logistic" && (problem.batch < 1 || problem.data_n < problem.batch)) {
    throw ConfigError("logistic needs 1 <= batch <= data_n");
  }
  config.validate();
  potential.validate(config);
  if (epsilon_grid.empty()) throw ConfigError("epsilon grid must be nonempty");
  for (std::size_t i = 0; i < epsilon_grid.size(); ++i) {
    if (!(epsilon_grid[i] > 0.0) || !std::isfinite(epsilon_grid[i])) {
      throw ConfigError("epsilon values must be positive and finite");
    }
    if (i > 0 && !(epsilon_grid[i] < epsilon_grid[i - 1])) {
      throw ConfigError("epsilon grid must be strictly descending");
    }
  }
  if (replications < 1) throw ConfigError("replications must be >= 1");
  if (threads < 1) throw ConfigError("threads must be >= 1");
  if (!(oracle.budget_cap > 0.0)) throw ConfigError("budget_cap must be positive");
  if (!(oracle.failure_prob >= 0.0 && oracle.failure_prob <= 1.0)) {
    throw ConfigError("failure_prob must lie in [0, 1]");
  }
  targets().validate();

  // Unsatisfiable accuracy targets are rejected before any run: the drift
  // regime must admit (alpha, beta) for the problem's curvature.
  const double lips = problem.materialize().lipschitz;
  const DriftConstants dc = drift_constants(config, lips);
  const double a = effective_alpha(), b = effective_beta();
  if (!dc.feasible(a, b)) {
    std::ostringstream msg;
    msg << "accuracy targets alpha=" << a << ", beta=" << b << " are infeasible";
    if (b > 0.5 && b >= dc.beta_min && b <= 1.0) {
      msg << " (alpha must be >= " << dc.alpha_min_for(b) << " at this beta)";
    } else {
      msg << " (beta must be >= " << dc.beta_min << ")";
    }
    throw ConfigError(msg.str());
  }
}

double theoretical_complexity_bound(double alpha, double beta, double phi0, double kappa_ef,
                                    double kappa_eg, double delta0, double epsilon) {
  const double ab = alpha * beta;
  if (!(ab > 0.5)) throw std::domain_error("alpha*beta must exceed 1/2");
  if (!(epsilon > 0.0)) throw std::domain_error("epsilon must be positive");
  if (!(phi0 >= 0.0 && delta0 > 0.0)) throw std::domain_error("phi0 >= 0 and delta0 > 0 required");
  const double theta = 1.0 / (1600.0 * kappa_ef);
  const double prefactor = ab / (2.0 * ab - 1.0);
  return prefactor *
         (20.0 * phi0 * kappa_eg / (theta * epsilon * epsilon) + 20.0 * delta0 * kappa_eg / epsilon +
          1.0);
}

BoundReport validate_bound(const SummaryStats& stats, const ExperimentPlan& plan) {
  const double a = plan.effective_alpha(), b = plan.effective_beta();
  if (!(a * b > 0.5)) throw std::domain_error("alpha*beta must exceed 1/2");

  const TestProblem problem = plan.problem.materialize();
  const double f0 = problem.f(problem.x0);

  PotentialSpec defaults;  // negative fields resolve to the default weighting
  BoundReport report;
  report.nu_default = defaults.nu_or_default(plan.config);
  report.nu_user = plan.potential.nu_or_default(plan.config);

  for (const EpsilonSummary& es : stats.per_epsilon) {
    BoundRow row;
    row.epsilon = es.epsilon;
    row.mean_t = es.mean_censored;
    row.sem_t = es.sem_censored;
    const double d0 = es.delta0_used > 0.0 ? es.delta0_used : plan.config.delta0;
    const double phi_def = potential_value(f0, d0, report.nu_default);
    const double phi_usr = potential_value(f0, d0, report.nu_user);
    report.phi0_default_nu = phi_def;
    report.phi0_user_nu = phi_usr;
    row.bound_default_nu = theoretical_complexity_bound(a, b, phi_def, plan.config.kappa_ef,
                                                        plan.config.kappa_eg, d0, es.epsilon);
    row.bound_user_nu = theoretical_complexity_bound(a, b, phi_usr, plan.config.kappa_ef,
                                                     plan.config.kappa_eg, d0, es.epsilon);
    if (std::isfinite(row.mean_t)) {
      const double sem = std::isfinite(row.sem_t) ? row.sem_t : 0.0;
      row.pass = row.mean_t <= row.bound_user_nu + 3.0 * sem;
    }
    report.rows.push_back(row);
    report.pass = report.pass && row.pass;
  }
  return report;
}

namespace {

struct BinAccum {
  std::int64_t count = 0;
  double sum = 0.0, sumsq = 0.0;
  double lo = std::numeric_limits<double>::infinity();
  double hi = 0.0;

  void add(double delta, double v) {
    ++count;
    sum += v;
    sumsq += v * v;
    lo = std::min(lo, delta);
    hi = std::max(hi, delta);
  }
  void merge(const BinAccum& o) {
    count += o.count;
    sum += o.sum;
    sumsq += o.sumsq;
    lo = std::min(lo, o.lo);
    hi = std::max(hi, o.hi);
  }
};

// Half-level bins on the gamma grid: radii within a bin differ by at most
// sqrt(gamma), so the bin-minimum target stays meaningful.
long bin_key(double delta, double gamma) {
  return std::lround(2.0 * std::log(delta) / std::log(gamma));
}

struct CellOutput {
  std::size_t eps_index = 0, rep_index = 0;
  RunRow row;
  double delta0_used = 0.0;
  std::vector<std::string> trace_lines;
  std::map<long, BinAccum> bins;
  std::vector<std::int64_t> taus;
  std::int64_t cauchy = 0, guarantee = 0, decrease = 0, box = 0;
};

CellOutput run_cell(const ExperimentPlan& plan, const TestProblem& problem,
                    const std::shared_ptr<StochasticOracle>& oracle, std::size_t eps_index,
                    std::size_t rep_index) {
  CellOutput out;
  out.eps_index = eps_index;
  out.rep_index = rep_index;
  const double epsilon = plan.epsilon_grid[eps_index];

  std::unique_ptr<ModelSource> models;
  std::unique_ptr<EstimateSource> estimates;
  if (plan.oracle.exact) {
    models = std::make_unique<ExactModelSource>(problem);
    estimates = std::make_unique<ExactEstimateSource>(problem);
  } else {
    SaaOptions opts;
    opts.rule = plan.oracle.rule;
    opts.budget_cap = plan.oracle.budget_cap;
    models = std::make_unique<SaaModelSource>(oracle, plan.targets(), opts);
    estimates = std::make_unique<SaaEstimateSource>(oracle, plan.targets(), opts);
  }

  RunSpec spec;
  spec.config = plan.config;
  spec.potential = plan.potential;
  spec.epsilon = epsilon;
  spec.seed = cell_seed(plan.master_seed, eps_index, rep_index);
  spec.record_trace = true;
  spec.snap_delta0 = true;
  const AccuracyTargets targets = plan.targets();
  spec.classifier = [&problem, targets](const QuadraticModel& model, const Eigen::VectorXd& x,
                                        const Eigen::VectorXd& s, double f0, double fs,
                                        double radius) {
    return classify_events(model, x, s, f0, fs, radius, problem, targets.kappa_ef,
                           targets.kappa_eg, targets.eps_f);
  };

  const auto t0 = std::chrono::steady_clock::now();
  const RunResult result = run_storm(*models, *estimates, &problem, problem.x0, spec);
  const auto t1 = std::chrono::steady_clock::now();

  out.row.epsilon = epsilon;
  out.row.rep = static_cast<int>(rep_index);
  out.row.timeout = result.timed_out;
  out.row.t_eps = result.t_eps ? static_cast<double>(*result.t_eps)
                               : static_cast<double>(plan.config.max_iters);
  out.row.f_final = problem.f(result.state.x);
  out.row.grad_norm_final = problem.grad(result.state.x).norm();
  out.row.value_samples = result.value_samples;
  out.row.grad_samples = result.grad_samples;
  out.row.wall_ns = std::chrono::duration_cast<std::chrono::nanoseconds>(t1 - t0).count();
  out.delta0_used = result.delta0_used;

  for (const IterationRecord& rec : result.records) {
    const double v = rec.phi_after - rec.phi_before;
    out.bins[bin_key(rec.delta, plan.config.gamma)].add(rec.delta, v);
    if (plan.trace) {
      CsvRow line;
      line.add(epsilon)
          .add(static_cast<int>(rep_index))
          .add(rec.k)
          .add(rec.delta)
          .add(rec.rho)
          .add(rec.success)
          .add(rec.model_decrease)
          .add(rec.f_true_before)
          .add(rec.grad_norm_true)
          .add(rec.phi_before)
          .add(v)
          .add(rec.i_event)
          .add(rec.j_event);
      std::ostringstream os;
      write_csv_row(os, line);
      out.trace_lines.push_back(os.str());
    }
  }

  if (result.delta_eps > 0.0) {
    const RenewalTrace renewal = measure_interarrivals(result.delta_series, result.delta_eps);
    out.taus = renewal.interarrivals;
  }
  out.cauchy = result.cauchy_violations;
  out.guarantee = result.guarantee_violations;
  out.decrease = result.decrease_violations;
  out.box = result.box_exits;
  return out;
}

}  // namespace

PlanOutcome run_plan(const ExperimentPlan& plan) {
  plan.validate();

  const TestProblem problem = plan.problem.materialize();
  std::shared_ptr<StochasticOracle> oracle;
  if (!plan.oracle.exact) {
    if (plan.problem.name == "logistic") {
      const FiniteSumLogistic fs = plan.problem.materialize_logistic();
      oracle = make_minibatch_oracle(fs.problem, fs.data);
    } else {
      oracle = make_gaussian_oracle(problem);
    }
    if (plan.oracle.failure_prob > 0.0) {
      oracle = corrupt(oracle, CorruptionSpec::constant_offset(plan.oracle.failure_prob,
                                                               plan.oracle.corruption_offset));
    }
  }

  const std::size_t n_eps = plan.epsilon_grid.size();
  const std::size_t n_cells = n_eps * static_cast<std::size_t>(plan.replications);
  std::vector<CellOutput> cells(n_cells);

  std::atomic<std::size_t> next{0};
  std::mutex fail_mutex;
  std::exception_ptr failure;
  auto worker = [&]() {
    while (true) {
      const std::size_t c = next.fetch_add(1);
      if (c >= n_cells) return;
      {
        std::lock_guard<std::mutex> lock(fail_mutex);
        if (failure) return;
      }
      try {
        cells[c] = run_cell(plan, problem, oracle, c / plan.replications, c % plan.replications);
      } catch (...) {
        std::lock_guard<std::mutex> lock(fail_mutex);
        if (!failure) failure = std::current_exception();
        return;
      }
    }
  };

  const std::size_t n_threads = std::min<std::size_t>(
      static_cast<std::size_t>(plan.threads), std::max<std::size_t>(n_cells, 1));
  if (n_threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < n_threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);

  PlanOutcome outcome;
  SummaryStats& stats = outcome.stats;
  std::map<long, BinAccum> bins;
  std::vector<double> taus;
  std::vector<double> delta0_by_eps(n_eps, 0.0);

  for (const CellOutput& cell : cells) {
    outcome.rows.push_back(cell.row);
    for (const auto& [key, acc] : cell.bins) bins[key].merge(acc);
    for (std::int64_t tau : cell.taus) taus.push_back(static_cast<double>(tau));
    delta0_by_eps[cell.eps_index] = cell.delta0_used;
    stats.cauchy_violations += cell.cauchy;
    stats.guarantee_violations += cell.guarantee;
    stats.decrease_violations += cell.decrease;
    stats.box_exits += cell.box;
  }

  for (std::size_t i = 0; i < n_eps; ++i) {
    EpsilonSummary es;
    es.epsilon = plan.epsilon_grid[i];
    es.delta0_used = delta0_by_eps[i];
    std::vector<double> finished, censored;
    for (int j = 0; j < plan.replications; ++j) {
      const RunRow& row = outcome.rows[i * plan.replications + j];
      censored.push_back(row.t_eps);
      if (row.timeout) {
        ++es.timeouts;
      } else {
        finished.push_back(row.t_eps);
      }
    }
    es.n = static_cast<int>(finished.size());
    es.censored = es.timeouts > 0;
    if (!finished.empty()) {
      const Summary s = summarize(finished);
      es.mean_t = s.mean;
      es.median_t = s.median;
      es.std_t = s.stddev;
      es.sem_t = s.sem();
    }
    const Summary sc = summarize(censored);
    es.mean_censored = sc.mean;
    es.sem_censored = sc.sem();
    stats.per_epsilon.push_back(es);
  }

  // Complexity slope over well-measured epsilons (at least 90% finished and a
  // positive mean so the log exists).
  std::vector<double> xs, ys;
  for (const EpsilonSummary& es : stats.per_epsilon) {
    const bool measured = es.n >= static_cast<int>(std::ceil(0.9 * plan.replications));
    if (measured && es.mean_t > 0.0) {
      xs.push_back(std::log(es.epsilon));
      ys.push_back(std::log(es.mean_t));
    }
  }
  if (xs.size() >= 3) stats.slope = linear_fit(xs, ys);

  const double theta_drift = 1.0 / (1600.0 * plan.config.kappa_eg);
  for (const auto& [key, acc] : bins) {
    DriftBin bin;
    bin.delta_lo = acc.lo;
    bin.delta_hi = acc.hi;
    bin.count = acc.count;
    bin.mean_v = acc.sum / static_cast<double>(acc.count);
    if (acc.count > 1) {
      const double var =
          std::max(0.0, (acc.sumsq - acc.sum * bin.mean_v) / static_cast<double>(acc.count - 1));
      bin.sem_v = std::sqrt(var / static_cast<double>(acc.count));
    }
    bin.target = -theta_drift * acc.lo * acc.lo;
    if (bin.count >= 200) {
      bin.pass = bin.mean_v <= bin.target + 3.0 * bin.sem_v;
      stats.drift_pass = stats.drift_pass && bin.pass;
    }
    stats.drift_bins.push_back(bin);
  }

  stats.interarrival_pooled = summarize(taus);
  const double ab = plan.effective_alpha() * plan.effective_beta();
  if (ab > 0.5) {
    stats.interarrival_bound = theoretical_interarrival_bound(ab);
    if (stats.interarrival_pooled.count > 0) {
      stats.interarrival_pass = stats.interarrival_pooled.mean <=
                                stats.interarrival_bound + 3.0 * stats.interarrival_pooled.sem();
    }
  }

  const BoundReport bounds = validate_bound(stats, plan);
  for (std::size_t i = 0; i < stats.per_epsilon.size(); ++i) {
    stats.per_epsilon[i].bound_default_nu = bounds.rows[i].bound_default_nu;
    stats.per_epsilon[i].bound_user_nu = bounds.rows[i].bound_user_nu;
    stats.per_epsilon[i].bound_pass = bounds.rows[i].pass;
    stats.bounds_pass = stats.bounds_pass && bounds.rows[i].pass;
  }

  const std::filesystem::path dir(plan.output_dir);
  std::filesystem::create_directories(dir);
  write_runs_csv(outcome.rows, dir / "runs.csv");
  write_summary_csv(stats, dir / "summary.csv");
  write_plan(plan, dir / "plan.cfg");
  if (plan.trace) {
    std::ofstream os = open_out(dir / "traces.csv");
    os << "epsilon,rep,k,delta,rho,success,model_decrease,f_true,grad_norm_true,phi,v_k,i_k,j_k\n";
    for (const CellOutput& cell : cells) {
      for (const std::string& line : cell.trace_lines) os << line;
    }
  }
  return outcome;
}

void write_runs_csv(const std::vector<RunRow>& rows, const std::filesystem::path& path) {
  std::ofstream os = open_out(path);
  os << "epsilon,rep,T_eps,timeout,f_final,grad_norm_final,total_oracle_value_samples,"
        "total_oracle_grad_samples,wall_ns\n";
  for (const RunRow& r : rows) {
    CsvRow row;
    row.add(r.epsilon)
        .add(r.rep)
        .add(r.t_eps)
        .add(r.timeout)
        .add(r.f_final)
        .add(r.grad_norm_final)
        .add(r.value_samples)
        .add(r.grad_samples)
        .add(r.wall_ns);
    write_csv_row(os, row);
  }
}

std::vector<RunRow> read_runs_csv(const std::filesystem::path& path) {
  std::ifstream is = open_in(path);
  const auto table = read_csv(is);
  if (table.empty()) throw std::runtime_error("empty runs csv: " + path.string());
  std::vector<RunRow> rows;
  for (std::size_t i = 1; i < table.size(); ++i) {
    const auto& cells = table[i];
    if (cells.size() != 9) throw std::runtime_error("malformed runs csv row");
    RunRow r;
    r.epsilon = parse_double(cells[0]);
    r.rep = static_cast<int>(parse_double(cells[1]));
    r.t_eps = parse_double(cells[2]);
    r.timeout = parse_double(cells[3]) != 0.0;
    r.f_final = parse_double(cells[4]);
    r.grad_norm_final = parse_double(cells[5]);
    r.value_samples = parse_double(cells[6]);
    r.grad_samples = parse_double(cells[7]);
    r.wall_ns = static_cast<std::int64_t>(parse_double(cells[8]));
    rows.push_back(r);
  }
  return rows;
}

void write_summary_csv(const SummaryStats& stats, const std::filesystem::path& path) {
  std::ofstream os = open_out(path);
  os << "section,a,b,c,d,e,f,g,h,i,j,k,l,m\n";
  for (const EpsilonSummary& es : stats.per_epsilon) {
    CsvRow row;
    row.add(std::string("epsilon"))
        .add(es.epsilon)
        .add(es.n)
        .add(es.timeouts)
        .add(es.mean_t)
        .add(es.median_t)
        .add(es.std_t)
        .add(es.sem_t)
        .add(es.mean_censored)
        .add(es.sem_censored)
        .add(es.delta0_used)
        .add(es.bound_default_nu)
        .add(es.bound_user_nu)
        .add(es.bound_pass);
    write_csv_row(os, row);
  }
  {
    CsvRow row;
    row.add(std::string("slope"));
    if (stats.slope) {
      row.add(stats.slope->slope).add(stats.slope->intercept).add(stats.slope->slope_stderr);
    } else {
      row.add(kNaN).add(kNaN).add(kNaN);
    }
    write_csv_row(os, row);
  }
  for (const DriftBin& bin : stats.drift_bins) {
    CsvRow row;
    row.add(std::string("drift"))
        .add(bin.delta_lo)
        .add(bin.delta_hi)
        .add(bin.count)
        .add(bin.mean_v)
        .add(bin.sem_v)
        .add(bin.target)
        .add(bin.pass);
    write_csv_row(os, row);
  }
  {
    CsvRow row;
    row.add(std::string("interarrival"))
        .add(static_cast<std::int64_t>(stats.interarrival_pooled.count))
        .add(stats.interarrival_pooled.mean)
        .add(stats.interarrival_pooled.sem())
        .add(stats.interarrival_bound)
        .add(stats.interarrival_pass);
    write_csv_row(os, row);
  }
  {
    CsvRow row;
    row.add(std::string("violations"))
        .add(stats.cauchy_violations)
        .add(stats.guarantee_violations)
        .add(stats.decrease_violations)
        .add(stats.box_exits);
    write_csv_row(os, row);
  }
}

SummaryStats read_summary_csv(const std::filesystem::path& path) {
  std::ifstream is = open_in(path);
  const auto table = read_csv(is);
  SummaryStats stats;
  for (std::size_t i = 1; i < table.size(); ++i) {
    const auto& cells = table[i];
    if (cells.empty()) continue;
    if (cells[0] == "epsilon" && cells.size() >= 11) {
      EpsilonSummary es;
      es.epsilon = parse_double(cells[1]);
      es.n = static_cast<int>(parse_double(cells[2]));
      es.timeouts = static_cast<int>(parse_double(cells[3]));
      es.mean_t = parse_double(cells[4]);
      es.median_t = parse_double(cells[5]);
      es.std_t = parse_double(cells[6]);
      es.sem_t = parse_double(cells[7]);
      es.mean_censored = parse_double(cells[8]);
      es.sem_censored = parse_double(cells[9]);
      es.delta0_used = parse_double(cells[10]);
      if (cells.size() >= 14) {
        es.bound_default_nu = parse_double(cells[11]);
        es.bound_user_nu = parse_double(cells[12]);
        es.bound_pass = parse_double(cells[13]) != 0.0;
      }
      es.censored = es.timeouts > 0;
      stats.bounds_pass = stats.bounds_pass && es.bound_pass;
      stats.per_epsilon.push_back(es);
    } else if (cells[0] == "drift" && cells.size() >= 8) {
      DriftBin bin;
      bin.delta_lo = parse_double(cells[1]);
      bin.delta_hi = parse_double(cells[2]);
      bin.count = static_cast<std::int64_t>(parse_double(cells[3]));
      bin.mean_v = parse_double(cells[4]);
      bin.sem_v = parse_double(cells[5]);
      bin.target = parse_double(cells[6]);
      bin.pass = parse_double(cells[7]) != 0.0;
      stats.drift_pass = stats.drift_pass && bin.pass;
      stats.drift_bins.push_back(bin);
    } else if (cells[0] == "slope" && cells.size() >= 4) {
      LinearFit fit;
      fit.slope = parse_double(cells[1]);
      fit.intercept = parse_double(cells[2]);
      fit.slope_stderr = parse_double(cells[3]);
      if (std::isfinite(fit.slope)) stats.slope = fit;
    } else if (cells[0] == "interarrival" && cells.size() >= 6) {
      stats.interarrival_pooled.count = static_cast<std::size_t>(parse_double(cells[1]));
      stats.interarrival_pooled.mean = parse_double(cells[2]);
      stats.interarrival_bound = parse_double(cells[4]);
      stats.interarrival_pass = parse_double(cells[5]) != 0.0;
    } else if (cells[0] == "violations" && cells.size() >= 5) {
      stats.cauchy_violations = static_cast<std::int64_t>(parse_double(cells[1]));
      stats.guarantee_violations = static_cast<std::int64_t>(parse_double(cells[2]));
      stats.decrease_violations = static_cast<std::int64_t>(parse_double(cells[3]));
      stats.box_exits = static_cast<std::int64_t>(parse_double(cells[4]));
    }
  }
  return stats;
}

void write_plan(const ExperimentPlan& plan, const std::filesystem::path& path) {
  std::ofstream os = open_out(path);
  os << "problem=" << plan.problem.name << '\n'
     << "dim=" << plan.problem.dim << '\n'
     << "sigma=" << format_double(plan.problem.sigma) << '\n'
     << "sigma_g=" << format_double(plan.problem.sigma_g) << '\n'
     << "cond=" << format_double(plan.problem.cond) << '\n'
     << "data_n=" << plan.problem.data_n << '\n'
     << "batch=" << plan.problem.batch << '\n'
     << "problem_seed=" << plan.problem.seed << '\n'
     << "gamma=" << format_double(plan.config.gamma) << '\n'
     << "eta1=" << format_double(plan.config.eta1) << '\n'
     << "eta2=" << format_double(plan.config.eta2) << '\n'
     << "delta0=" << format_double(plan.config.delta0) << '\n'
     << "delta_max=" << format_double(plan.config.delta_max) << '\n'
     << "kappa_fcd=" << format_double(plan.config.kappa_fcd) << '\n'
     << "kappa_ef=" << format_double(plan.config.kappa_ef) << '\n'
     << "kappa_eg=" << format_double(plan.config.kappa_eg) << '\n'
     << "kappa_bhm=" << format_double(plan.config.kappa_bhm) << '\n'
     << "eps_f=" << format_double(plan.config.eps_f) << '\n'
     << "max_iters=" << plan.config.max_iters << '\n'
     << "alpha=" << format_double(plan.alpha) << '\n'
     << "beta=" << format_double(plan.beta) << '\n'
     << "nu=" << format_double(plan.potential.nu) << '\n'
     << "zeta=" << format_double(plan.potential.zeta) << '\n'
     << "exact_oracle=" << (plan.oracle.exact ? 1 : 0) << '\n'
     << "rule=" << (plan.oracle.rule == SampleRule::bernstein ? "bernstein" : "chebyshev") << '\n'
     << "budget_cap=" << format_double(plan.oracle.budget_cap) << '\n'
     << "failure_prob=" << format_double(plan.oracle.failure_prob) << '\n'
     << "corruption_offset=" << format_double(plan.oracle.corruption_offset) << '\n';
  os << "epsilon=";
  for (std::size_t i = 0; i < plan.epsilon_grid.size(); ++i) {
    if (i) os << ',';
    os << format_double(plan.epsilon_grid[i]);
  }
  os << '\n'
     << "reps=" << plan.replications << '\n'
     << "seed=" << plan.master_seed << '\n'
     << "out=" << plan.output_dir << '\n'
     << "trace=" << (plan.trace ? 1 : 0) << '\n'
     << "threads=" << plan.threads << '\n';
}

ExperimentPlan read_plan(const std::filesystem::path& path) {
  std::ifstream is = open_in(path);
  ExperimentPlan plan;
  plan.epsilon_grid.clear();
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config line " + std::to_string(lineno) + " is not key=value");
    }
    auto trim = [](std::string s) {
      const auto a = s.find_first_not_of(" \t");
      const auto b = s.find_last_not_of(" \t");
      return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
    };
    const std::string key = trim(line.substr(0, eq));
    const std::string val = trim(line.substr(eq + 1));

    if (key == "problem") {
      plan.problem.name = val;
    } else if (key == "dim") {
      plan.problem.dim = static_cast<int>(parse_double(val));
    } else if (key == "sigma") {
      plan.problem.sigma = parse_double(val);
    } else if (key == "sigma_g") {
      plan.problem.sigma_g = parse_double(val);
    } else if (key == "cond") {
      plan.problem.cond = parse_double(val);
    } else if (key == "data_n") {
      plan.problem.data_n = static_cast<int>(parse_double(val));
    } else if (key == "batch") {
      plan.problem.batch = static_cast<int>(parse_double(val));
    } else if (key == "problem_seed") {
      plan.problem.seed = static_cast<std::uint64_t>(parse_double(val));
    } else if (key == "gamma") {
      plan.config.gamma = parse_double(val);
    } else if (key == "eta1") {
      plan.config.eta1 = parse_double(val);
    } else if (key == "eta2") {
      plan.config.eta2 = parse_double(val);
    } else if (key == "delta0") {
      plan.config.delta0 = parse_double(val);
    } else if (key == "delta_max") {
      plan.config.delta_max = parse_double(val);
    } else if (key == "kappa_fcd") {
      plan.config.kappa_fcd = parse_double(val);
    } else if (key == "kappa_ef") {
      plan.config.kappa_ef = parse_double(val);
    } else if (key == "kappa_eg") {
      plan.config.kappa_eg = parse_double(val);
    } else if (key == "kappa_bhm") {
      plan.config.kappa_bhm = parse_double(val);
    } else if (key == "eps_f") {
      plan.config.eps_f = parse_double(val);
    } else if (key == "max_iters") {
      plan.config.max_iters = static_cast<std::int64_t>(parse_double(val));
    } else if (key == "alpha") {
      plan.alpha = parse_double(val);
    } else if (key == "beta") {
      plan.beta = parse_double(val);
    } else if (key == "nu") {
      plan.potential.nu = parse_double(val);
    } else if (key == "zeta") {
      plan.potential.zeta = parse_double(val);
    } else if (key == "exact_oracle") {
      plan.oracle.exact = parse_double(val) != 0.0;
    } else if (key == "rule") {
      if (val == "chebyshev") {
        plan.oracle.rule = SampleRule::chebyshev;
      } else if (val == "bernstein") {
        plan.oracle.rule = SampleRule::bernstein;
      } else {
        throw ConfigError("rule must be chebyshev or bernstein");
      }
    } else if (key == "budget_cap") {
      plan.oracle.budget_cap = parse_double(val);
    } else if (key == "failure_prob") {
      plan.oracle.failure_prob = parse_double(val);
    } else if (key == "corruption_offset") {
      plan.oracle.corruption_offset = parse_double(val);
    } else if (key == "epsilon") {
      plan.epsilon_grid.clear();
      std::size_t start = 0;
      while (start <= val.size()) {
        const std::size_t comma = val.find(',', start);
        const std::string item = val.substr(
            start, comma == std::string::npos ? std::string::npos : comma - start);
        if (!item.empty()) plan.epsilon_grid.push_back(parse_double(item));
        if (comma == std::string::npos) break;
        start = comma + 1;
      }
    } else if (key == "reps") {
      plan.replications = static_cast<int>(parse_double(val));
    } else if (key == "seed") {
      plan.master_seed = static_cast<std::uint64_t>(parse_double(val));
    } else if (key == "out") {
      plan.output_dir = val;
    } else if (key == "trace") {
      plan.trace = parse_double(val) != 0.0;
    } else if (key == "threads") {
      plan.threads = static_cast<int>(parse_double(val));
    } else {
      throw ConfigError("unknown config key '" + key + "'");
    }
  }
  return plan;
}

}  // namespace storm
