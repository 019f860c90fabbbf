#pragma once

#include <cstdint>
#include <iosfwd>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "stablebranch/branching_sim.hpp"
#include "stablebranch/lifetimes.hpp"
#include "stablebranch/moments.hpp"
#include "stablebranch/test_function.hpp"

namespace stablebranch {

class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// Raised for d = alpha*gamma or d = alpha, where the limit behaviour is an
// open problem and nothing is simulated.
class CriticalDimensionError : public RegimeError {
 public:
  explicit CriticalDimensionError(const std::string& what) : RegimeError(what) {}
};

enum class ExperimentKind { lln_heavy_intermediate, lln_heavy_large_d, lln_finite_mean, occupancy_subcritical, validation };

std::string to_string(ExperimentKind kind);
ExperimentKind parse_experiment_kind(const std::string& s);

struct FunctionSpec {
  Shape shape = Shape::bump;
  double radius = 1.0;
  double amplitude = 1.0;
  Point center;  // empty: origin

  TestFunction build(int dim) const;
};

struct ExperimentConfig {
  std::string id = "experiment";
  ExperimentKind kind = ExperimentKind::validation;
  double alpha = 2.0;
  int dim = 1;
  LifetimeLaw law = LifetimeLaw::exponential(1.0);

  double window_half_side = 10.0;
  Boundary boundary = Boundary::torus;
  double obs_step = 1.0;
  std::size_t population_cap = 10'000'000;
  InitialAge initial_age = InitialAge::zero;
  double intensity = 1.0;
  double two_offspring_probability = 0.5;

  std::vector<double> t_ladder{25.0, 50.0, 100.0};
  std::size_t replicates = 1000;
  FunctionSpec phi;
  std::optional<FunctionSpec> ball;

  // (s, t) pairs for the covariance subcommand.
  std::vector<std::pair<double, double>> covariance_pairs{{1.0, 1.0}, {1.0, 2.0}, {2.0, 4.0}};
  double renewal_horizon = 100.0;
  double renewal_step = 0.01;

  std::string output;
  std::uint64_t seed = 1;
  bool seed_set = false;  // the config text named a seed
  std::size_t threads = 0;  // 0: all available cores

  StableKernel kernel() const { return StableKernel(alpha, dim); }
  SimConfig sim_config(double horizon) const;
  double max_horizon() const;
};

// JSON text -> config. Unknown keys are rejected. Throws ConfigError.
ExperimentConfig parse_config(const std::string& json_text);
ExperimentConfig load_config(const std::string& path);
LifetimeLaw parse_law(const std::string& json_text);

// Throws RegimeError (CriticalDimensionError at the critical equalities) unless
// (d, alpha, law) satisfies the hypotheses for `kind`.
void check_regime(ExperimentKind kind, int d, double alpha, const LifetimeLaw& law);
// Ladder on the observation grid, functions inside the window interior,
// simulation parameters in range. Throws ConfigError.
void validate_structure(const ExperimentConfig& config);
// validate_structure followed by check_regime.
void validate_config(const ExperimentConfig& config);

struct ResultRow {
  std::string experiment_id;
  std::string check;
  std::string regime;
  double s = std::numeric_limits<double>::quiet_NaN();  // earlier time of a covariance pair; blank otherwise
  double T = 0.0;
  std::size_t replicates = 0;
  double mean = 0.0;
  double se = 0.0;
  double target = 0.0;
  double z = 0.0;
  bool pass = false;
  double replicate_variance = 0.0;
  double replicate_variance_se = 0.0;
  std::size_t aborted = 0;
};

void write_result_csv(std::ostream& os, const std::vector<ResultRow>& rows);
bool all_pass(const std::vector<ResultRow>& rows);

// RFC-4180 field quoting.
std::string csv_field(const std::string& s);
// Shortest round-trip decimal representation ("nan"/"inf" for non-finite).
std::string format_number(double x);

// Per T: mean identity row (|z| <= 3) carrying the replicate variance, then a
// strict-decrease row and a log-log slope row against the predicted exponent.
// Replicates run once to the largest T; smaller T reuse the same paths.
std::vector<ResultRow> run_lln_experiment(const ExperimentConfig& config);

// Mean-identity rows only. The identity E T^{-1}<phi,J_T> = <phi,Lambda> holds
// in every regime, so only the structural checks apply.
std::vector<ResultRow> run_mean_identity_experiment(const ExperimentConfig& config);

// Per T: mean occupancy fraction of the ball, then a trend row requiring
// strictly decreasing means and a 3 SE drop from the first to the last T.
std::vector<ResultRow> run_occupancy_experiment(const ExperimentConfig& config);

// Analytic field covariance against Monte Carlo over field replicates.
std::vector<ResultRow> run_covariance_experiment(const ExperimentConfig& config);

struct MonteCarloEstimate {
  double value = 0.0;
  double standard_error = 0.0;
  std::size_t replicates = 0;
};

// E_x[<phi, Z_s> <psi, Z_t>] from independent single-ancestor trees.
MonteCarloEstimate tree_moment_monte_carlo(const StableKernel& kernel, const LifetimeLaw& law, std::span<const double> x,
                                           double s, double t, const TestFunction& phi, const TestFunction& psi,
                                           std::size_t replicates, std::uint64_t seed, std::size_t threads = 0);

// Var <phi, J_T> of the Poisson field, free of any window: by Poissonization it
// equals \int E_x[Y^2] dx with Y the trapezoid occupation sum (spacing `step`)
// of a single tree from x. x is drawn from a multivariate Cauchy proposal of
// width `proposal_scale` around phi's center. Only alpha = 2 is accepted: with
// alpha-stable jumps the hitting tails are polynomial and the importance
// weights have infinite variance.
MonteCarloEstimate poissonized_occupation_variance_monte_carlo(const StableKernel& kernel, const LifetimeLaw& law,
                                                               const TestFunction& phi, double T, double step,
                                                               double proposal_scale, std::size_t trees,
                                                               std::uint64_t seed, std::size_t threads = 0);

}  // namespace stablebranch
