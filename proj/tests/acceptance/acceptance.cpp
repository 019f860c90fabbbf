// End-to-end acceptance run: one PASS/FAIL line per criterion, detail lines
// indented above it. Exit status is nonzero if any criterion fails.

#include <chrono>
#include <cmath>
#include <functional>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "stablebranch/experiment.hpp"
#include "stablebranch/moments.hpp"
#include "stablebranch/validation.hpp"

using namespace stablebranch;

namespace {

struct Outcome {
  bool pass = true;
  std::vector<std::string> notes;

  void require(bool ok, const std::string& what) {
    pass = pass && ok;
    notes.push_back(std::string(ok ? "ok   " : "FAIL ") + what);
  }
};

ExperimentConfig shipped(const std::string& name) { return load_config(SB_SOURCE_DIR "/configs/" + name + ".json"); }

std::string fmt(double x, int precision = 4) {
  std::ostringstream os;
  os << std::setprecision(precision) << x;
  return os.str();
}

std::string describe(const ResultRow& r) {
  std::string s = r.check + " T=" + fmt(r.T) + " mean=" + fmt(r.mean, 6) + " target=" + fmt(r.target, 6);
  if (r.se > 0.0) s += " se=" + fmt(r.se) + " z=" + fmt(r.z, 3);
  if (r.aborted > 0) s += " aborted=" + std::to_string(r.aborted);
  return s;
}

bool in_ladder(double T, std::initializer_list<double> ts) {
  for (double t : ts)
    if (T == t) return true;
  return false;
}

// Appends validation rows whose check name starts with one of `prefixes`.
void require_validation(Outcome& out, const std::vector<ValidationRow>& rows, std::initializer_list<const char*> prefixes) {
  for (const auto& r : rows)
    for (const char* p : prefixes)
      if (r.check.rfind(p, 0) == 0)
        out.require(r.pass, r.check + " " + r.measure + "=" + fmt(r.value, 3) + " (tolerance " + fmt(r.tolerance) + ")" +
                                (r.detail.empty() ? "" : " " + r.detail));
}

std::vector<ResultRow> heavy_d1_rows() {
  static const std::vector<ResultRow> rows = run_lln_experiment(shipped("lln_heavy_intermediate_d1"));
  return rows;
}

Outcome mean_identity() {
  Outcome out;
  const std::vector<std::pair<std::string, std::vector<ResultRow>>> runs{
      {"d=3 alpha=2 Exp(1)", run_mean_identity_experiment(shipped("lln_finite_mean_d3"))},
      {"d=1 alpha=1.5 gamma=0.5", heavy_d1_rows()},
      {"d=1 alpha=2 gamma=0.7", run_mean_identity_experiment(shipped("mean_identity_d1_subcritical"))},
  };
  for (const auto& [name, rows] : runs) {
    int seen = 0;
    for (const auto& r : rows) {
      if (r.check != "mean_identity" || !in_ladder(r.T, {25.0, 50.0, 100.0})) continue;
      ++seen;
      out.require(r.pass && r.replicates >= 2000, name + ": " + describe(r) + " n=" + std::to_string(r.replicates));
    }
    out.require(seen == 3, name + ": rows at T = 25, 50, 100 present");
  }
  return out;
}

Outcome lln_concentration() {
  Outcome out;
  const std::vector<std::pair<std::string, std::vector<ResultRow>>> runs{
      {"d=1 alpha=1.5 gamma=0.5", heavy_d1_rows()},
      {"d=3 alpha=2 Exp(0.1)", run_lln_experiment(shipped("lln_finite_mean_d3_slow_branching"))},
  };
  for (const auto& [name, rows] : runs) {
    std::string vars;
    for (const auto& r : rows)
      if (r.check == "mean_identity") vars += " Var(T=" + fmt(r.T) + ")=" + fmt(r.replicate_variance);
    out.notes.push_back("     " + name + ":" + vars);
    int seen = 0;
    for (const auto& r : rows) {
      if (r.check == "variance_strictly_decreasing") {
        ++seen;
        out.require(r.pass, name + ": variance strictly decreasing, largest successive ratio " + fmt(r.mean));
      } else if (r.check == "variance_decay_slope") {
        ++seen;
        out.require(r.pass, name + ": log-log slope " + fmt(r.mean) + " <= predicted + 0.15 = " + fmt(r.target));
      }
    }
    out.require(seen == 2, name + ": decay rows present");
  }
  return out;
}

Outcome occupancy() {
  Outcome out;
  const ExperimentConfig c = shipped("occupancy_subcritical_d1");
  const auto rows = run_occupancy_experiment(c);
  for (const auto& r : rows)
    if (r.check == "occupancy_fraction") out.notes.push_back("     " + describe(r));
  const ResultRow& trend = rows.back();
  out.require(trend.check == "occupancy_decreasing" && trend.s == 50.0 && trend.T == 800.0,
              "trend row spans T = 50 to 800");
  out.require(trend.pass, "decrease " + fmt(trend.mean) + " with se " + fmt(trend.se) + " (z = " + fmt(trend.z, 3) +
                              ", need >= 3 and monotone)");
  return out;
}

Outcome covariance_oracle() {
  Outcome out;
  const ExperimentConfig base = shipped("covariance_d1");
  // The configured seed plus four more: the oracle should hold for any seed.
  for (std::uint64_t k = 0; k < 5; ++k) {
    ExperimentConfig c = base;
    c.seed = base.seed + k;
    for (const auto& r : run_covariance_experiment(c))
      out.require(r.pass, "field seed " + std::to_string(c.seed) + " s=" + fmt(r.s) + " t=" + fmt(r.T) + " analytic " +
                              fmt(r.target, 6) + " mc " + fmt(r.mean, 6) + " z=" + fmt(r.z, 3));
  }

  const StableKernel k1(2.0, 1);
  const LifetimeLaw exp1 = LifetimeLaw::exponential(1.0);
  const RenewalTable u1 = build_renewal(exp1, 2.0, 0.005);
  const TestFunction bump1 = TestFunction::bump({0.0}, 1.0);
  const double x0[] = {0.0};
  const double exact = tree_second_moment(k1, u1, x0, 1.0, 1.0, bump1, bump1);
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto mc = tree_moment_monte_carlo(k1, exp1, x0, 1.0, 1.0, bump1, bump1, 1'000'000, 7000 + seed);
    const double z = (mc.value - exact) / mc.standard_error;
    out.require(std::abs(z) <= 3.0, "tree x=0 s=t=1 seed " + std::to_string(seed) + " analytic " + fmt(exact, 6) +
                                        " mc " + fmt(mc.value, 6) + " z=" + fmt(z, 3));
  }

  // Occupation variance in d = 3 against window-free Poissonized trees.
  const StableKernel k3(2.0, 3);
  const TestFunction bump3 = TestFunction::bump({0.0, 0.0, 0.0}, 2.0);
  const RenewalTable u3 = build_renewal(exp1, 25.0, 0.01);
  const double var = occupation_variance_on_grid(k3, u3, bump3, 20.0, 0.5);
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto mc = poissonized_occupation_variance_monte_carlo(k3, exp1, bump3, 20.0, 0.5, 4.0, 400'000, 9000 + seed);
    const double z = (mc.value - var) / mc.standard_error;
    out.require(std::abs(z) <= 3.0, "Var<phi,J_20> d=3 seed " + std::to_string(seed) + " analytic " + fmt(var, 6) +
                                        " mc " + fmt(mc.value, 6) + " z=" + fmt(z, 3));
  }
  return out;
}

Outcome renewal_numerics() {
  Outcome out;
  ValidationOptions opts;
  opts.selection = std::vector<std::string>{"renewal_exponential", "renewal_heavy_tail", "renewal_elementary"};
  require_validation(out, run_validation_suite(1, opts), {"renewal_"});
  return out;
}

Outcome stable_law() {
  Outcome out;
  ValidationOptions opts;
  opts.selection = std::vector<std::string>{"characteristic_function", "density_closed_form", "self_similarity"};
  const auto rows = run_validation_suite(1, opts);
  require_validation(out, rows, {"characteristic_function", "density_closed_form", "self_similarity"});
  out.require(rows.size() == 4 + 6 + 4, "all (alpha, d) cases evaluated");
  return out;
}

Outcome invariants() {
  Outcome out;
  const auto seeded = run_validation_suite(1);
  require_validation(out, seeded, {"criticality", "poisson_initial_counts", "poissonization"});

  // Byte-identical reruns, and independence from the thread count.
  ExperimentConfig c = shipped("lln_heavy_intermediate_d1");
  c.replicates = 200;
  c.window_half_side = 50.0;
  auto render = [](const ExperimentConfig& cfg) {
    std::ostringstream os;
    write_result_csv(os, run_lln_experiment(cfg));
    return os.str();
  };
  const std::string first = render(c);
  c.threads = 1;
  const std::string serial = render(c);
  c.threads = 4;
  const std::string threaded = render(c);
  out.require(first == serial && serial == threaded, "experiment CSV byte-identical across reruns and thread counts");

  SimConfig sc(StableKernel(1.5, 2), LifetimeLaw::pareto_tail(0.5));
  sc.window_half_side = 4.0;
  sc.horizon = 10.0;
  auto trajectory = [&] {
    RandomStream rng(c.seed);
    std::ostringstream os;
    write_trajectory_csv(os, simulate_field(sc, rng), 0, true);
    return os.str();
  };
  out.require(trajectory() == trajectory(), "trajectory CSV byte-identical across reruns");

  for (std::uint64_t seed : {1ULL, 2ULL, 3ULL}) {
    const auto rows = seed == 1 ? seeded : run_validation_suite(seed);
    std::size_t failed = 0;
    for (const auto& r : rows)
      if (!r.pass) ++failed;
    out.require(failed == 0, "full validation suite, seed " + std::to_string(seed) + ": " +
                                 std::to_string(rows.size() - failed) + "/" + std::to_string(rows.size()) + " rows pass");
  }
  return out;
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"mean identity", mean_identity},
      {"LLN concentration", lln_concentration},
      {"subcritical occupancy", occupancy},
      {"covariance oracle", covariance_oracle},
      {"renewal numerics", renewal_numerics},
      {"stable-law correctness", stable_law},
      {"system invariants", invariants},
  };
  int failed = 0;
  std::vector<std::string> summary;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o.require(false, std::string("exception: ") + e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    for (const auto& n : o.notes) std::cout << "    " << n << "\n";
    std::ostringstream line;
    line << (o.pass ? "PASS" : "FAIL") << "  criterion " << i + 1 << ": " << criteria[i].first << " (" << std::fixed
         << std::setprecision(1) << secs << " s)";
    std::cout << line.str() << "\n" << std::flush;
    summary.push_back(line.str());
    if (!o.pass) ++failed;
  }
  std::cout << "\nsummary\n";
  for (const auto& s : summary) std::cout << s << "\n";
  std::cout << criteria.size() - static_cast<std::size_t>(failed) << "/" << criteria.size() << " criteria pass\n";
  return failed == 0 ? 0 : 1;
}
