#include "stablebranch/experiment.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numbers>
#include <ostream>

#include "stablebranch/occupation.hpp"
#include "stablebranch/parallel.hpp"
#include "stablebranch/random_stream.hpp"
#include "stablebranch/renewal.hpp"
#include "stablebranch/statistics.hpp"

namespace stablebranch {

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

std::string format_number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

void write_result_csv(std::ostream& os, const std::vector<ResultRow>& rows) {
  os << "experiment_id,check,regime,s,T,replicates,mean,se,target,z,pass,replicate_variance,replicate_variance_se,aborted\r\n";
  for (const auto& r : rows) {
    os << csv_field(r.experiment_id) << ',' << csv_field(r.check) << ',' << csv_field(r.regime) << ','
       << (std::isnan(r.s) ? std::string() : format_number(r.s)) << ',' << format_number(r.T) << ',' << r.replicates << ','
       << format_number(r.mean) << ',' << format_number(r.se) << ',' << format_number(r.target) << ','
       << format_number(r.z) << ',' << (r.pass ? "true" : "false") << ',' << format_number(r.replicate_variance) << ','
       << format_number(r.replicate_variance_se) << ',' << r.aborted << "\r\n";
  }
}

bool all_pass(const std::vector<ResultRow>& rows) {
  return std::all_of(rows.begin(), rows.end(), [](const ResultRow& r) { return r.pass; });
}

namespace {

Dynamics dynamics_of(const SimConfig& sc) {
  return Dynamics{&sc.kernel, &sc.law, sc.boundary, sc.window_half_side, sc.population_cap, sc.two_offspring_probability};
}

std::size_t grid_index(double T, double step) { return static_cast<std::size_t>(std::llround(T / step)); }

// One replicate: time integrals (trapezoid) of a per-snapshot series, divided by
// T, for every T of the ladder. Empty on a population-cap abort.
struct LadderSample {
  std::vector<double> values;
  bool aborted = false;
};

enum class Functional { occupation, occupancy };

std::vector<LadderSample> run_ladder(const ExperimentConfig& config, const TestFunction& f, Functional which) {
  const SimConfig sc = config.sim_config(config.max_horizon());
  const Dynamics dyn = dynamics_of(sc);
  const std::vector<double> times = sc.observation_times();
  return parallel_map<LadderSample>(config.replicates, config.threads, [&](std::size_t i) {
    RandomStream rng = RandomStream::derive(config.seed, i);
    LadderSample out;
    try {
      const auto initial = sample_initial_field(sc, rng);
      FunctionalObserver obs(which == Functional::occupation ? std::vector<TestFunction>{f} : std::vector<TestFunction>{},
                             which == Functional::occupancy ? std::vector<TestFunction>{f} : std::vector<TestFunction>{});
      run_branching(dyn, initial, times, rng, obs);
      const auto& series = which == Functional::occupation ? obs.series(0) : obs.occupancy(0);
      for (double T : config.t_ladder) out.values.push_back(trapezoid(series, sc.obs_step, grid_index(T, sc.obs_step)) / T);
    } catch (const CapExceeded&) {
      out.aborted = true;
      out.values.clear();
    }
    return out;
  });
}

std::vector<double> column(const std::vector<LadderSample>& samples, std::size_t j, std::size_t& aborted) {
  std::vector<double> xs;
  aborted = 0;
  for (const auto& s : samples) {
    if (s.aborted) ++aborted;
    else xs.push_back(s.values[j]);
  }
  return xs;
}

double predicted_exponent(const ExperimentConfig& c) {
  if (c.kind == ExperimentKind::lln_finite_mean) return decay_exponent_prediction(c.dim, c.alpha, 0.0, Regime::finite_mean);
  const double g = std::get<ParetoTail>(c.law.variant()).gamma;
  if (c.kind == ExperimentKind::lln_heavy_large_d)
    // Same four exponents; for d >= 2 alpha the T^{-1} term dominates.
    return std::max({-2.0, -1.0, -c.dim / c.alpha, g - c.dim / c.alpha});
  return decay_exponent_prediction(c.dim, c.alpha, g, Regime::heavy_tail);
}

void require_replicates(const ExperimentConfig& c) {
  if (c.replicates < 2) throw ConfigError("replicates must be at least 2");
}

ResultRow base_row(const ExperimentConfig& c, const std::string& check) {
  ResultRow r;
  r.experiment_id = c.id;
  r.check = check;
  r.regime = to_string(c.kind);
  r.replicates = c.replicates;
  return r;
}

}  // namespace

namespace {

std::vector<ResultRow> lln_rows(const ExperimentConfig& config, bool with_decay) {
  require_replicates(config);
  const TestFunction phi = config.phi.build(config.dim);
  const double target = config.intensity * phi.lebesgue_integral();
  const auto samples = run_ladder(config, phi, Functional::occupation);

  std::vector<ResultRow> rows;
  std::vector<double> log_t, log_var;
  double worst_ratio = 0.0;
  double prev_var = std::numeric_limits<double>::quiet_NaN();
  std::size_t total_aborted = 0;
  for (std::size_t j = 0; j < config.t_ladder.size(); ++j) {
    std::size_t aborted = 0;
    const auto xs = column(samples, j, aborted);
    total_aborted = std::max(total_aborted, aborted);
    const SampleSummary s = summarize(xs);
    ResultRow r = base_row(config, "mean_identity");
    r.T = config.t_ladder[j];
    r.replicates = s.n;
    r.aborted = aborted;
    r.mean = s.mean;
    r.se = s.standard_error;
    r.target = target;
    r.z = z_score(r.mean, r.target, r.se);
    r.pass = aborted == 0 && s.n > 1 && std::abs(r.z) <= 3.0;
    r.replicate_variance = s.variance;
    r.replicate_variance_se = s.variance_se;
    rows.push_back(r);
    if (j > 0) worst_ratio = std::max(worst_ratio, s.variance / prev_var);
    prev_var = s.variance;
    if (s.variance > 0.0) {
      log_t.push_back(std::log(r.T));
      log_var.push_back(std::log(s.variance));
    }
  }
  if (with_decay && config.t_ladder.size() >= 2) {
    ResultRow r = base_row(config, "variance_strictly_decreasing");
    r.T = config.max_horizon();
    r.aborted = total_aborted;
    r.mean = worst_ratio;  // largest Var(T_{j+1}) / Var(T_j)
    r.target = 1.0;
    r.z = z_score(r.mean, r.target, 0.0);
    r.pass = total_aborted == 0 && worst_ratio < 1.0;
    rows.push_back(r);

    ResultRow slope = base_row(config, "variance_decay_slope");
    slope.T = config.max_horizon();
    slope.aborted = total_aborted;
    const bool fit = log_t.size() == config.t_ladder.size();
    slope.mean = fit ? ols_slope(log_t, log_var) : std::numeric_limits<double>::quiet_NaN();
    slope.target = predicted_exponent(config) + 0.15;
    slope.z = z_score(slope.mean, slope.target, 0.0);
    slope.pass = total_aborted == 0 && fit && slope.mean <= slope.target;
    rows.push_back(slope);
  }
  return rows;
}

}  // namespace

std::vector<ResultRow> run_lln_experiment(const ExperimentConfig& config) {
  if (config.kind != ExperimentKind::lln_heavy_intermediate && config.kind != ExperimentKind::lln_heavy_large_d &&
      config.kind != ExperimentKind::lln_finite_mean)
    throw ConfigError("lln experiment needs an lln_* kind, got " + to_string(config.kind));
  validate_config(config);
  return lln_rows(config, true);
}

std::vector<ResultRow> run_mean_identity_experiment(const ExperimentConfig& config) {
  validate_structure(config);
  return lln_rows(config, false);
}

std::vector<ResultRow> run_occupancy_experiment(const ExperimentConfig& config) {
  if (config.kind != ExperimentKind::occupancy_subcritical)
    throw ConfigError("occupancy experiment needs kind occupancy_subcritical, got " + to_string(config.kind));
  if (!config.ball) throw ConfigError("occupancy experiment needs a 'ball'");
  validate_config(config);
  require_replicates(config);
  const FunctionSpec& b = *config.ball;
  const TestFunction ball = TestFunction::indicator_ball(b.build(config.dim).center(), b.radius);
  const auto samples = run_ladder(config, ball, Functional::occupancy);

  std::vector<ResultRow> rows;
  bool decreasing = true;
  std::size_t total_aborted = 0;
  for (std::size_t j = 0; j < config.t_ladder.size(); ++j) {
    std::size_t aborted = 0;
    const auto xs = column(samples, j, aborted);
    total_aborted = std::max(total_aborted, aborted);
    const SampleSummary s = summarize(xs);
    ResultRow r = base_row(config, "occupancy_fraction");
    r.T = config.t_ladder[j];
    r.replicates = s.n;
    r.aborted = aborted;
    r.mean = s.mean;
    r.se = s.standard_error;
    r.target = 0.0;  // almost-sure limit
    r.z = z_score(r.mean, r.target, r.se);
    r.pass = aborted == 0;
    r.replicate_variance = s.variance;
    r.replicate_variance_se = s.variance_se;
    if (!rows.empty() && !(r.mean < rows.back().mean)) decreasing = false;
    rows.push_back(r);
  }
  if (rows.size() >= 2) {
    const ResultRow& first = rows.front();
    const ResultRow& last = rows.back();
    ResultRow r = base_row(config, "occupancy_decreasing");
    r.s = first.T;
    r.T = last.T;
    r.aborted = total_aborted;
    r.mean = first.mean - last.mean;
    r.se = std::sqrt(first.se * first.se + last.se * last.se);
    r.target = 0.0;
    r.z = z_score(r.mean, r.target, r.se);
    r.pass = total_aborted == 0 && decreasing && r.z >= 3.0;
    rows.push_back(r);
  }
  return rows;
}

std::vector<ResultRow> run_covariance_experiment(const ExperimentConfig& config) {
  validate_config(config);
  require_replicates(config);
  if (config.initial_age != InitialAge::zero)
    throw ConfigError("covariance experiment compares against the zero-initial-age formula; set initial_age to 'zero'");
  if (config.two_offspring_probability != 0.5) throw ConfigError("covariance experiment needs critical branching");
  if (config.covariance_pairs.empty()) throw ConfigError("covariance_pairs must not be empty");
  std::vector<double> times{0.0};
  double t_max = 0.0;
  for (auto [s, t] : config.covariance_pairs) {
    if (!(s > 0.0 && s <= t)) throw ConfigError("covariance pairs need 0 < s <= t");
    times.push_back(s);
    times.push_back(t);
    t_max = std::max(t_max, t);
  }
  std::sort(times.begin(), times.end());
  times.erase(std::unique(times.begin(), times.end()), times.end());
  auto index_of = [&](double t) {
    return static_cast<std::size_t>(std::lower_bound(times.begin(), times.end(), t) - times.begin());
  };

  const StableKernel kernel = config.kernel();
  const TestFunction phi = config.phi.build(config.dim);
  const RenewalTable renewal = build_renewal(config.law, t_max, std::min(config.renewal_step, t_max / 8.0));
  const PairCorrelation g(kernel, phi, phi);

  const SimConfig sc = config.sim_config(t_max);
  const Dynamics dyn = dynamics_of(sc);
  struct Sample {
    std::vector<double> values;
    bool aborted = false;
  };
  const auto samples = parallel_map<Sample>(config.replicates, config.threads, [&](std::size_t i) {
    RandomStream rng = RandomStream::derive(config.seed, i);
    Sample out;
    try {
      const auto initial = sample_initial_field(sc, rng);
      FunctionalObserver obs({phi}, {});
      run_branching(dyn, initial, times, rng, obs);
      out.values = obs.series(0);
    } catch (const CapExceeded&) {
      out.aborted = true;
    }
    return out;
  });

  std::vector<ResultRow> rows;
  for (auto [s, t] : config.covariance_pairs) {
    std::vector<double> a, b;
    std::size_t aborted = 0;
    for (const auto& smp : samples) {
      if (smp.aborted) {
        ++aborted;
        continue;
      }
      a.push_back(smp.values[index_of(s)]);
      b.push_back(smp.values[index_of(t)]);
    }
    ResultRow r = base_row(config, "field_covariance");
    r.regime = "covariance";
    r.s = s;
    r.T = t;
    r.replicates = a.size();
    r.aborted = aborted;
    const CovarianceEstimate est = sample_covariance(a, b);
    r.mean = est.value;
    r.se = est.standard_error;
    r.target = config.intensity * field_covariance(g, renewal, s, t);
    r.z = z_score(r.mean, r.target, r.se);
    r.pass = aborted == 0 && std::abs(r.z) <= 3.0;
    rows.push_back(r);
  }
  return rows;
}

MonteCarloEstimate tree_moment_monte_carlo(const StableKernel& kernel, const LifetimeLaw& law, std::span<const double> x,
                                           double s, double t, const TestFunction& phi, const TestFunction& psi,
                                           std::size_t replicates, std::uint64_t seed, std::size_t threads) {
  if (!(s >= 0.0 && s <= t)) throw std::invalid_argument("tree_moment_monte_carlo: need 0 <= s <= t");
  if (replicates < 2) throw std::invalid_argument("tree_moment_monte_carlo: need at least two replicates");
  std::vector<double> times{0.0, s, t};
  times.erase(std::unique(times.begin(), times.end()), times.end());
  const std::size_t is = s == 0.0 ? 0 : 1;
  const std::size_t it = times.size() - 1;
  Dynamics dyn{&kernel, &law, Boundary::free_space, 0.0, 10'000'000, 0.5};
  const Point x0(x.begin(), x.end());
  const auto products = parallel_map<double>(replicates, threads, [&](std::size_t i) {
    RandomStream rng = RandomStream::derive(seed, i);
    std::vector<Seedling> root{{x0, 0.0, law.sample(rng)}};
    FunctionalObserver obs({phi, psi}, {});
    run_branching(dyn, root, times, rng, obs);
    return obs.series(0)[is] * obs.series(1)[it];
  });
  const SampleSummary sum = summarize(products);
  return {sum.mean, sum.standard_error, sum.n};
}

MonteCarloEstimate poissonized_occupation_variance_monte_carlo(const StableKernel& kernel, const LifetimeLaw& law,
                                                               const TestFunction& phi, double T, double step,
                                                               double proposal_scale, std::size_t trees,
                                                               std::uint64_t seed, std::size_t threads) {
  if (kernel.alpha() != 2.0) throw std::invalid_argument("poissonized variance oracle: only alpha = 2 is supported");
  if (!(T > 0.0) || !(step > 0.0)) throw std::invalid_argument("poissonized variance oracle: T and step must be positive");
  if (!(proposal_scale > 0.0)) throw std::invalid_argument("poissonized variance oracle: proposal scale must be positive");
  if (trees < 2) throw std::invalid_argument("poissonized variance oracle: need at least two trees");
  const int d = kernel.dim();
  const double dd = d;
  const std::vector<double> grid = observation_grid(T, step);
  if (std::abs(grid.back() - T) > 1e-9 * T || grid.size() < 2 || std::abs(grid[1] - step) > 1e-12 * step)
    throw std::invalid_argument("poissonized variance oracle: T must be a multiple of step");
  // Multivariate t with one degree of freedom.
  const double log_norm = std::lgamma(0.5 * (dd + 1.0)) - std::lgamma(0.5) - 0.5 * dd * std::log(std::numbers::pi) -
                          dd * std::log(proposal_scale);
  Dynamics dyn{&kernel, &law, Boundary::free_space, 0.0, 10'000'000, 0.5};
  const auto weighted = parallel_map<double>(trees, threads, [&](std::size_t i) {
    RandomStream rng = RandomStream::derive(seed, i);
    const double w = rng.normal();
    const double inv_chi = 1.0 / std::max(std::abs(w), 1e-300);
    Point x0(phi.center());
    double r2 = 0.0;
    for (int j = 0; j < d; ++j) {
      const double u = proposal_scale * rng.normal() * inv_chi;
      x0[static_cast<std::size_t>(j)] += u;
      r2 += u * u;
    }
    const double log_q = log_norm - 0.5 * (dd + 1.0) * std::log1p(r2 / (proposal_scale * proposal_scale));
    std::vector<Seedling> root{{x0, 0.0, law.sample(rng)}};
    FunctionalObserver obs({phi}, {});
    run_branching(dyn, root, grid, rng, obs);
    const double y = trapezoid(obs.series(0), step, grid.size() - 1);
    return y == 0.0 ? 0.0 : y * y * std::exp(-log_q);
  });
  const SampleSummary sum = summarize(weighted);
  return {sum.mean, sum.standard_error, sum.n};
}

}  // namespace stablebranch
