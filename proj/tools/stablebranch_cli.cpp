// Command-line front end: experiments, validation, and numerical tables.
//
// Exit codes: 0 all checks pass, 1 some check failed, 2 configuration error.

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "stablebranch/experiment.hpp"
#include "stablebranch/quadrature.hpp"
#include "stablebranch/renewal.hpp"
#include "stablebranch/validation.hpp"

namespace sb = stablebranch;

namespace {

constexpr int kPass = 0;
constexpr int kFail = 1;
constexpr int kConfigError = 2;
constexpr const char* kSeedEnv = "STABLEBRANCH_SEED";

struct CommonFlags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::optional<std::size_t> replicates;
  std::optional<std::size_t> threads;
};

void add_common(CLI::App* cmd, CommonFlags& f, bool config_required) {
  auto* opt = cmd->add_option("--config", f.config, "JSON experiment config");
  if (config_required) opt->required();
  cmd->add_option("--seed", f.seed, "master seed (overrides config and " + std::string(kSeedEnv) + ")");
  cmd->add_option("--out", f.out, "output CSV path (default: config 'output', else stdout)");
  cmd->add_option("--replicates", f.replicates, "replicates per experiment (overrides config)");
  cmd->add_option("--threads", f.threads, "worker threads, 0 = all cores (overrides config)");
}

std::uint64_t parse_seed(const std::string& text, const std::string& source) {
  std::size_t pos = 0;
  unsigned long long v = 0;
  try {
    v = std::stoull(text, &pos, 10);
  } catch (const std::exception&) {
    pos = 0;
  }
  if (pos == 0 || pos != text.size() || text.front() == '-')
    throw sb::ConfigError(source + " is not an unsigned 64-bit integer: '" + text + "'");
  return v;
}

// Seed precedence: --seed, then the config file, then the environment.
sb::ExperimentConfig resolve_config(const CommonFlags& f) {
  sb::ExperimentConfig c = f.config.empty() ? sb::ExperimentConfig{} : sb::load_config(f.config);
  if (f.seed) {
    c.seed = *f.seed;
  } else if (!c.seed_set) {
    if (const char* env = std::getenv(kSeedEnv); env && *env) c.seed = parse_seed(env, kSeedEnv);
  }
  if (f.replicates) c.replicates = *f.replicates;
  if (f.threads) c.threads = *f.threads;
  if (!f.out.empty()) c.output = f.out;
  return c;
}

// Writes through `emit` to the configured file, or stdout.
template <class Emit>
void write_output(const std::string& path, Emit&& emit) {
  if (path.empty()) {
    emit(std::cout);
    std::cout.flush();
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw sb::ConfigError("cannot open output file '" + path + "'");
  emit(out);
  if (!out) throw std::runtime_error("failed writing '" + path + "'");
}

int report_rows(const std::vector<sb::ResultRow>& rows, const std::string& path) {
  write_output(path, [&](std::ostream& os) { sb::write_result_csv(os, rows); });
  std::size_t failed = 0;
  for (const auto& r : rows) {
    if (r.pass) continue;
    ++failed;
    std::cerr << "FAIL " << r.check << " T=" << r.T << " mean=" << r.mean << " target=" << r.target << " z=" << r.z << "\n";
  }
  std::cerr << rows.size() - failed << "/" << rows.size() << " rows pass\n";
  return failed == 0 ? kPass : kFail;
}

int cmd_validate(const CommonFlags& f, const std::optional<std::string>& select, double offspring_p) {
  const sb::ExperimentConfig c = resolve_config(f);
  sb::ValidationOptions opts;
  opts.threads = c.threads;
  opts.two_offspring_probability = offspring_p;
  if (select) {
    std::vector<std::string> names;
    std::stringstream ss(*select);
    for (std::string item; std::getline(ss, item, ',');)
      if (!item.empty()) names.push_back(item);
    for (const auto& n : names) {
      const auto& all = sb::validation_check_names();
      if (std::find(all.begin(), all.end(), n) == all.end()) throw sb::ConfigError("unknown validation check '" + n + "'");
    }
    opts.selection = names;
  }
  const auto rows = sb::run_validation_suite(c.seed, opts);
  write_output(c.output, [&](std::ostream& os) { sb::write_validation_csv(os, rows); });
  std::size_t failed = 0;
  for (const auto& r : rows)
    if (!r.pass) {
      ++failed;
      std::cerr << "FAIL " << r.check << " " << r.measure << "=" << r.value << " tolerance=" << r.tolerance << " "
                << r.detail << "\n";
    }
  std::cerr << rows.size() - failed << "/" << rows.size() << " checks pass\n";
  return failed == 0 ? kPass : kFail;
}

int cmd_renewal(const CommonFlags& f) {
  const sb::ExperimentConfig c = resolve_config(f);
  if (!(c.renewal_horizon > 0.0) || !(c.renewal_step > 0.0) || c.renewal_step > c.renewal_horizon)
    throw sb::ConfigError("renewal needs 0 < renewal_step <= renewal_horizon");
  const sb::RenewalTable u = sb::build_renewal(c.law, c.renewal_horizon, c.renewal_step);
  const auto& v = u.values();
  const std::size_t stride = std::max<std::size_t>(1, (v.size() - 1) / 1000);
  write_output(c.output, [&](std::ostream& os) {
    os << "t,U\r\n";
    for (std::size_t i = 0; i < v.size(); i += stride)
      os << sb::format_number(u.step() * static_cast<double>(i)) << ',' << sb::format_number(v[i]) << "\r\n";
  });
  std::cerr << "law " << c.law.describe() << ", relative error estimate " << u.error_estimate() << "\n";
  if (!u.warning().empty()) {
    std::cerr << "warning: " << u.warning() << "\n";
    return kFail;
  }
  return kPass;
}

struct DensityFlags {
  double alpha = 2.0;
  int dim = 1;
  double time = 1.0;
  double r_max = 5.0;
  std::size_t points = 101;
};

int cmd_density(const CommonFlags& f, const DensityFlags& d) {
  const sb::ExperimentConfig c = resolve_config(f);
  if (d.points < 2 || !(d.r_max > 0.0) || !(d.time > 0.0)) throw sb::ConfigError("density needs points >= 2, r_max > 0, time > 0");
  std::unique_ptr<sb::StableKernel> k;
  try {
    k = std::make_unique<sb::StableKernel>(d.alpha, d.dim);
  } catch (const std::invalid_argument& e) {
    throw sb::ConfigError(e.what());
  }
  std::vector<std::pair<double, double>> rows;
  for (std::size_t i = 0; i < d.points; ++i) {
    const double r = d.r_max * static_cast<double>(i) / static_cast<double>(d.points - 1);
    rows.emplace_back(r, k->radial_density(d.time, r));
  }
  write_output(c.output, [&](std::ostream& os) {
    os << "r,density\r\n";
    for (auto [r, p] : rows) os << sb::format_number(r) << ',' << sb::format_number(p) << "\r\n";
  });
  return kPass;
}

int cmd_simulate(const CommonFlags& f) {
  sb::ExperimentConfig c = resolve_config(f);
  // One trajectory unless asked for more; the config's replicate count is meant for experiments.
  c.replicates = f.replicates.value_or(1);
  sb::validate_config(c);
  const sb::SimConfig sc = c.sim_config(c.max_horizon());
  write_output(c.output, [&](std::ostream& os) {
    for (std::size_t i = 0; i < c.replicates; ++i) {
      sb::RandomStream rng = sb::RandomStream::derive(c.seed, i);
      const sb::FieldTrajectory traj = sb::simulate_field(sc, rng);
      sb::write_trajectory_csv(os, traj, i, i == 0);
    }
  });
  return kPass;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Branching stable particle systems: simulation, moment oracles and statistical checks"};
  app.require_subcommand(1);

  CommonFlags validate_f, lln_f, occ_f, ren_f, dens_f, cov_f, sim_f;
  std::optional<std::string> select;
  double offspring_p = 0.5;
  DensityFlags dens;

  auto* validate = app.add_subcommand("validate", "run the built-in validation suite");
  add_common(validate, validate_f, false);
  validate->add_option("--select", select, "comma-separated checks to run (empty: none)")->expected(0, 1);
  validate->add_option("--offspring-p", offspring_p, "debug: two-offspring probability for the criticality check")
      ->check(CLI::Range(0.0, 1.0));

  auto* lln = app.add_subcommand("lln", "law-of-large-numbers experiment for T^{-1}<phi,J_T>");
  add_common(lln, lln_f, true);
  auto* occ = app.add_subcommand("occupancy", "occupancy-fraction experiment for a ball");
  add_common(occ, occ_f, true);
  auto* ren = app.add_subcommand("renewal", "tabulate the renewal function of the configured law");
  add_common(ren, ren_f, false);
  auto* den = app.add_subcommand("density", "tabulate the radial transition density");
  add_common(den, dens_f, false);
  den->add_option("--alpha", dens.alpha, "stability index in (0, 2]");
  den->add_option("--dim", dens.dim, "dimension");
  den->add_option("--time", dens.time, "elapsed time");
  den->add_option("--r-max", dens.r_max, "largest radius");
  den->add_option("--points", dens.points, "number of radii");
  auto* cov = app.add_subcommand("covariance", "analytic vs Monte Carlo field covariance");
  add_common(cov, cov_f, true);
  auto* sim = app.add_subcommand("simulate", "write particle trajectories of the configured field");
  add_common(sim, sim_f, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kPass : kConfigError;
  }

  try {
    if (*validate) return cmd_validate(validate_f, select, offspring_p);
    if (*lln) {
      const auto c = resolve_config(lln_f);
      return report_rows(sb::run_lln_experiment(c), c.output);
    }
    if (*occ) {
      const auto c = resolve_config(occ_f);
      return report_rows(sb::run_occupancy_experiment(c), c.output);
    }
    if (*ren) return cmd_renewal(ren_f);
    if (*den) return cmd_density(dens_f, dens);
    if (*cov) {
      const auto c = resolve_config(cov_f);
      return report_rows(sb::run_covariance_experiment(c), c.output);
    }
    if (*sim) return cmd_simulate(sim_f);
  } catch (const sb::ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return kConfigError;
  } catch (const sb::CriticalDimensionError& e) {
    std::cerr << "refused: " << e.what() << "\n";
    return kConfigError;
  } catch (const sb::RegimeError& e) {
    std::cerr << "regime error: " << e.what() << "\n";
    return kConfigError;
  } catch (const sb::QuadratureError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kFail;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kFail;
  }
  return kConfigError;
}
