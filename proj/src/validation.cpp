#include "stablebranch/validation.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "stablebranch/branching_sim.hpp"
#include "stablebranch/experiment.hpp"
#include "stablebranch/moments.hpp"
#include "stablebranch/occupation.hpp"
#include "stablebranch/parallel.hpp"
#include "stablebranch/renewal.hpp"
#include "stablebranch/statistics.hpp"

namespace stablebranch {

namespace {

struct Context {
  std::uint64_t seed;
  const ValidationOptions& options;
};

using Check = std::function<std::vector<ValidationRow>(const Context&)>;

ValidationRow row(std::string check, std::string measure, double value, double tolerance, bool pass,
                  std::string detail = {}) {
  return ValidationRow{std::move(check), std::move(measure), value, tolerance, pass, std::move(detail)};
}

ValidationRow z_row(std::string check, double z, std::string detail = {}) {
  const double az = std::abs(z);
  return row(std::move(check), "max_abs_z", az, 3.0, az <= 3.0, std::move(detail));
}

std::string label(double alpha, int d) {
  return "[alpha=" + format_number(alpha) + ",d=" + std::to_string(d) + "]";
}

std::vector<ValidationRow> characteristic_function(const Context& ctx) {
  constexpr std::size_t n = 20000;
  constexpr double t = 1.0;
  const double freqs[] = {0.25, 0.5, 1.0, 1.5, 2.5};
  const std::pair<double, int> cases[] = {{2.0, 1}, {1.0, 1}, {1.5, 2}, {0.8, 1}};
  std::vector<ValidationRow> rows;
  std::uint64_t idx = 0;
  for (auto [alpha, d] : cases) {
    const StableKernel k(alpha, d);
    RandomStream rng = RandomStream::derive(ctx.seed, idx++);
    std::vector<double> xs(n * static_cast<std::size_t>(d));
    for (std::size_t i = 0; i < n; ++i) k.sample_increment(t, rng, {xs.data() + i * d, static_cast<std::size_t>(d)});
    // Direction of the test frequency; irrelevant by symmetry, but not axis-aligned in d = 2.
    const double dir[2] = {std::cos(0.7), std::sin(0.7)};
    double worst = 0.0;
    std::vector<double> c(n);
    for (double y : freqs) {
      for (std::size_t i = 0; i < n; ++i) {
        double dot = 0.0;
        for (int j = 0; j < d; ++j) dot += (d == 1 ? 1.0 : dir[j]) * y * xs[i * d + j];
        c[i] = std::cos(dot);
      }
      const SampleSummary s = summarize(c);
      worst = std::max(worst, std::abs(z_score(s.mean, std::exp(-t * std::pow(y, alpha)), s.standard_error)));
    }
    rows.push_back(z_row("characteristic_function" + label(alpha, d), worst, "5 frequencies, n=20000"));
  }
  return rows;
}

std::vector<ValidationRow> density_closed_form(const Context&) {
  std::vector<ValidationRow> rows;
  for (double alpha : {2.0, 1.0}) {
    for (int d : {1, 2, 3}) {
      const StableKernel k(alpha, d);
      double worst = 0.0;
      for (double t : {0.5, 1.0, 2.0}) {
        for (double rr : {0.0, 0.3, 1.0, 2.0, 3.0}) {
          const double r = rr * k.scale(t);
          const double exact = k.radial_density(t, r);
          worst = std::max(worst, std::abs(k.inverted_density(t, r) - exact) / exact);
        }
      }
      rows.push_back(row("density_closed_form" + label(alpha, d), "max_rel_error", worst, 1e-6, worst <= 1e-6,
                         "Fourier inversion vs closed form"));
    }
  }
  return rows;
}

std::vector<ValidationRow> self_similarity(const Context&) {
  std::vector<ValidationRow> rows;
  for (auto [alpha, d] : {std::pair{1.5, 1}, std::pair{1.5, 2}, std::pair{0.8, 1}, std::pair{1.2, 3}}) {
    const StableKernel k(alpha, d);
    double worst = 0.0;
    for (double t : {0.5, 3.0}) {
      for (double r : {0.0, 0.5, 1.5, 4.0}) {
        const double lhs = k.radial_density(t, r);
        const double rhs = std::pow(t, -d / alpha) * k.radial_density(1.0, r * std::pow(t, -1.0 / alpha));
        worst = std::max(worst, std::abs(lhs - rhs) / rhs);
      }
    }
    rows.push_back(row("self_similarity" + label(alpha, d), "max_rel_error", worst, 1e-6, worst <= 1e-6,
                       "p_t(x) = t^{-d/alpha} p_1(t^{-1/alpha} x)"));
  }
  return rows;
}

std::vector<ValidationRow> renewal_exponential(const Context&) {
  std::vector<ValidationRow> rows;
  for (double rate : {1.0, 2.5}) {
    const RenewalTable u = build_renewal(LifetimeLaw::exponential(rate), 100.0, 0.01);
    double worst = 0.0;
    for (double t = 0.0; t <= 100.0; t += 0.137) worst = std::max(worst, std::abs(u(t) - (1.0 + rate * t)));
    rows.push_back(row("renewal_exponential[rate=" + format_number(rate) + "]", "max_abs_error", worst, 1e-3,
                       worst < 1e-3, "U(t) = 1 + rate t on [0,100]"));
  }
  return rows;
}

std::vector<ValidationRow> renewal_heavy_tail(const Context&) {
  constexpr double gamma = 0.5, t = 1e4;
  const RenewalTable u = build_renewal(LifetimeLaw::pareto_tail(gamma), t, 1.0);
  const double ratio = u(t) * std::pow(t, -gamma) * std::tgamma(1.0 + gamma);
  return {row("renewal_heavy_tail[gamma=0.5]", "U(t) t^-gamma Gamma(1+gamma) - 1", std::abs(ratio - 1.0), 0.05,
              std::abs(ratio - 1.0) <= 0.05, "t=1e4, ratio=" + format_number(ratio))};
}

std::vector<ValidationRow> renewal_elementary(const Context&) {
  const RenewalTable u = build_renewal(LifetimeLaw::gamma(2.0, 2.0), 500.0, 0.05);
  const RenewalDiagnostic diag = elementary_renewal_check(u);
  return {row("renewal_elementary[gamma(2,2)]", "relative_gap", diag.relative_gap(), 0.05, diag.relative_gap() <= 0.05,
              "U(500)/500 vs 1/mean")};
}

std::vector<ValidationRow> poisson_initial_counts(const Context& ctx) {
  constexpr std::size_t n = 4000;
  SimConfig sc(StableKernel(2.0, 2), LifetimeLaw::exponential(1.0));
  sc.window_half_side = 5.0;
  sc.intensity = 1.3;
  const double expected = sc.intensity * sc.window_volume();
  std::vector<double> counts(n);
  RandomStream rng = RandomStream::derive(ctx.seed, 0);
  for (auto& c : counts) c = static_cast<double>(sample_initial_field(sc, rng).size());
  const SampleSummary s = summarize(counts);
  const double z_mean = z_score(s.mean, expected, s.standard_error);
  const double z_var = z_score(s.variance, expected, s.variance_se);
  return {z_row("poisson_initial_counts[mean]", z_mean), z_row("poisson_initial_counts[variance]", z_var)};
}

std::vector<ValidationRow> criticality(const Context& ctx) {
  constexpr std::size_t n = 2000;
  SimConfig sc(StableKernel(2.0, 1), LifetimeLaw::exponential(1.0));
  sc.window_half_side = 25.0;
  sc.horizon = 10.0;
  sc.obs_step = 10.0;
  sc.two_offspring_probability = ctx.options.two_offspring_probability;
  const Dynamics dyn{&sc.kernel, &sc.law, sc.boundary, sc.window_half_side, sc.population_cap, sc.two_offspring_probability};
  const auto times = sc.observation_times();
  const auto finals = parallel_map<double>(n, ctx.options.threads, [&](std::size_t i) {
    RandomStream rng = RandomStream::derive(ctx.seed, i);
    FunctionalObserver obs({}, {});
    run_branching(dyn, sample_initial_field(sc, rng), times, rng, obs);
    return obs.counts().back();
  });
  const SampleSummary s = summarize(finals);
  const double z = z_score(s.mean, sc.intensity * sc.window_volume(), s.standard_error);
  return {z_row("criticality", z,
                "mean count at t=10: " + format_number(s.mean) + " vs " + format_number(sc.window_volume()))};
}

std::vector<ValidationRow> mean_identity(const Context& ctx) {
  ExperimentConfig c;
  c.id = "mean_identity";
  c.kind = ExperimentKind::lln_heavy_intermediate;
  c.alpha = 1.5;
  c.dim = 1;
  c.law = LifetimeLaw::pareto_tail(0.5);
  c.window_half_side = 30.0;
  c.obs_step = 1.0;
  c.t_ladder = {20.0};
  c.replicates = 1000;
  c.seed = ctx.seed;
  c.threads = ctx.options.threads;
  const auto rows = run_lln_experiment(c);
  return {z_row("mean_identity[alpha=1.5,d=1,gamma=0.5]", rows.front().z, "T^{-1}<phi,J_T> at T=20")};
}

std::vector<ValidationRow> occupation_mean(const Context& ctx) {
  constexpr std::size_t n = 2000;
  constexpr double T = 15.0;
  SimConfig sc(StableKernel(2.0, 1), LifetimeLaw::exponential(1.0));
  sc.window_half_side = 15.0;
  sc.horizon = T;
  sc.obs_step = 0.5;
  const TestFunction phi = TestFunction::bump({0.0}, 1.0);
  const Dynamics dyn{&sc.kernel, &sc.law, sc.boundary, sc.window_half_side, sc.population_cap, 0.5};
  const auto times = sc.observation_times();
  const auto values = parallel_map<double>(n, ctx.options.threads, [&](std::size_t i) {
    RandomStream rng = RandomStream::derive(ctx.seed, i);
    FunctionalObserver obs({phi}, {});
    run_branching(dyn, sample_initial_field(sc, rng), times, rng, obs);
    return trapezoid(obs.series(0), sc.obs_step, times.size() - 1);
  });
  const SampleSummary s = summarize(values);
  return {z_row("occupation_mean[alpha=2,d=1,exp(1)]", z_score(s.mean, occupation_mean(phi, T), s.standard_error),
                "E<phi,J_15> = 16")};
}

std::vector<ValidationRow> covariance(const Context& ctx) {
  ExperimentConfig c;
  c.id = "covariance";
  c.alpha = 2.0;
  c.dim = 1;
  c.law = LifetimeLaw::exponential(1.0);
  c.window_half_side = 15.0;
  c.replicates = 20000;
  c.renewal_step = 0.005;
  c.covariance_pairs = {{1.0, 1.0}, {1.0, 2.0}, {2.0, 4.0}};
  c.seed = ctx.seed;
  c.threads = ctx.options.threads;
  std::vector<ValidationRow> out;
  for (const auto& r : run_covariance_experiment(c))
    out.push_back(z_row("field_covariance[s=" + format_number(r.s) + ",t=" + format_number(r.T) + "]", r.z,
                        "analytic " + format_number(r.target) + ", mc " + format_number(r.mean)));
  return out;
}

std::vector<ValidationRow> tree_second_moment_check(const Context& ctx) {
  const StableKernel k(2.0, 1);
  const LifetimeLaw law = LifetimeLaw::exponential(1.0);
  const RenewalTable u = build_renewal(law, 2.0, 0.005);
  const TestFunction phi = TestFunction::bump({0.0}, 1.0);
  const Point x{0.0};
  std::vector<ValidationRow> out;
  std::uint64_t idx = 0;
  for (auto [s, t] : {std::pair{1.0, 1.0}, std::pair{0.5, 2.0}}) {
    const double exact = tree_second_moment(k, u, x, s, t, phi, phi);
    const auto mc = tree_moment_monte_carlo(k, law, x, s, t, phi, phi, 100000,
                                            RandomStream::derive(ctx.seed, idx++)(), ctx.options.threads);
    out.push_back(z_row("tree_second_moment[s=" + format_number(s) + ",t=" + format_number(t) + "]",
                        z_score(mc.value, exact, mc.standard_error),
                        "analytic " + format_number(exact) + ", mc " + format_number(mc.value)));
  }
  return out;
}

// E exp(-<phi, X_t>) for the Poisson field equals exp(-\int (1 - E_x exp(-<phi, Z_t>)) dx).
std::vector<ValidationRow> poissonization(const Context& ctx) {
  constexpr double t = 2.0;
  const StableKernel k(2.0, 1);
  const LifetimeLaw law = LifetimeLaw::exponential(1.0);
  const TestFunction phi = TestFunction::bump({0.0}, 1.0);
  const std::array<double, 2> times{0.0, t};
  const Dynamics free{&k, &law, Boundary::free_space, 0.0, 10'000'000, 0.5};

  // Single-tree side: trapezoid over x in [-R, R].
  constexpr double R = 14.0, h = 0.5;
  constexpr std::size_t per_point = 4000;
  const auto npts = static_cast<std::size_t>(std::llround(2.0 * R / h)) + 1;
  const auto tree_means = parallel_map<std::pair<double, double>>(npts, ctx.options.threads, [&](std::size_t j) {
    const Point x0{-R + h * static_cast<double>(j)};
    RandomStream rng = RandomStream::derive(ctx.seed, 1000 + j);
    std::vector<double> v(per_point);
    for (auto& vi : v) {
      std::vector<Seedling> root{{x0, 0.0, law.sample(rng)}};
      FunctionalObserver obs({phi}, {});
      run_branching(free, root, times, rng, obs);
      vi = 1.0 - std::exp(-obs.series(0).back());
    }
    const SampleSummary s = summarize(v);
    return std::pair{s.mean, s.standard_error};
  });
  double integral = 0.0, var = 0.0;
  for (std::size_t j = 0; j < npts; ++j) {
    const double w = (j == 0 || j + 1 == npts) ? 0.5 * h : h;
    integral += w * tree_means[j].first;
    var += w * w * tree_means[j].second * tree_means[j].second;
  }
  const double predicted = std::exp(-integral);
  const double predicted_se = predicted * std::sqrt(var);

  // Field side.
  SimConfig sc(k, law);
  sc.window_half_side = 20.0;
  sc.horizon = t;
  sc.obs_step = t;
  const Dynamics dyn{&sc.kernel, &sc.law, sc.boundary, sc.window_half_side, sc.population_cap, 0.5};
  const auto field = parallel_map<double>(20000, ctx.options.threads, [&](std::size_t i) {
    RandomStream rng = RandomStream::derive(ctx.seed, 5000000 + i);
    FunctionalObserver obs({phi}, {});
    run_branching(dyn, sample_initial_field(sc, rng), times, rng, obs);
    return std::exp(-obs.series(0).back());
  });
  const SampleSummary f = summarize(field);
  const double z = (f.mean - predicted) / std::hypot(f.standard_error, predicted_se);
  return {z_row("poissonization", z, "field " + format_number(f.mean) + ", trees " + format_number(predicted))};
}

const std::vector<std::pair<std::string, Check>>& registry() {
  static const std::vector<std::pair<std::string, Check>> checks{
      {"characteristic_function", characteristic_function},
      {"density_closed_form", density_closed_form},
      {"self_similarity", self_similarity},
      {"renewal_exponential", renewal_exponential},
      {"renewal_heavy_tail", renewal_heavy_tail},
      {"renewal_elementary", renewal_elementary},
      {"poisson_initial_counts", poisson_initial_counts},
      {"criticality", criticality},
      {"mean_identity", mean_identity},
      {"occupation_mean", occupation_mean},
      {"field_covariance", covariance},
      {"tree_second_moment", tree_second_moment_check},
      {"poissonization", poissonization},
  };
  return checks;
}

}  // namespace

const std::vector<std::string>& validation_check_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> n;
    for (const auto& [name, fn] : registry()) n.push_back(name);
    return n;
  }();
  return names;
}

std::vector<ValidationRow> run_validation_suite(std::uint64_t seed, const ValidationOptions& options) {
  if (options.selection) {
    for (const auto& s : *options.selection)
      if (std::find(validation_check_names().begin(), validation_check_names().end(), s) == validation_check_names().end())
        throw std::invalid_argument("unknown validation check '" + s + "'");
  }
  std::vector<ValidationRow> rows;
  std::uint64_t index = 0;
  for (const auto& [name, fn] : registry()) {
    const std::uint64_t check_seed = RandomStream::derive(seed, index++)();
    if (options.selection &&
        std::find(options.selection->begin(), options.selection->end(), name) == options.selection->end())
      continue;
    try {
      for (auto& r : fn(Context{check_seed, options})) rows.push_back(std::move(r));
    } catch (const std::exception& e) {
      rows.push_back(row(name, "error", std::numeric_limits<double>::quiet_NaN(), 0.0, false, e.what()));
    }
  }
  return rows;
}

void write_validation_csv(std::ostream& os, const std::vector<ValidationRow>& rows) {
  os << "check,measure,value,tolerance,pass,detail\r\n";
  for (const auto& r : rows)
    os << csv_field(r.check) << ',' << csv_field(r.measure) << ',' << format_number(r.value) << ','
       << format_number(r.tolerance) << ',' << (r.pass ? "true" : "false") << ',' << csv_field(r.detail) << "\r\n";
}

}  // namespace stablebranch
