#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "stablebranch/lifetimes.hpp"
#include "stablebranch/random_stream.hpp"
#include "stablebranch/stable_motion.hpp"
#include "stablebranch/test_function.hpp"

namespace stablebranch {

inline constexpr int kMaxSimDim = 8;

enum class Boundary { free_space, torus, absorbing };
enum class InitialAge { zero, stationary };

std::string to_string(Boundary b);
std::string to_string(InitialAge a);
Boundary parse_boundary(const std::string& s);
InitialAge parse_initial_age(const std::string& s);

class CapExceeded : public std::runtime_error {
 public:
  explicit CapExceeded(const std::string& what) : std::runtime_error(what) {}
};

struct SimConfig {
  SimConfig(StableKernel k, LifetimeLaw l) : kernel(k), law(std::move(l)) {}

  StableKernel kernel;
  LifetimeLaw law;
  double window_half_side = 10.0;
  Boundary boundary = Boundary::torus;
  double obs_step = 1.0;
  double horizon = 10.0;
  std::size_t population_cap = 10'000'000;
  std::uint64_t seed = 0;
  InitialAge initial_age = InitialAge::zero;
  // Debug knobs: intensity 0 gives an empty system; a two-offspring
  // probability other than 1/2 makes the branching non-critical.
  double intensity = 1.0;
  double two_offspring_probability = 0.5;

  void validate() const;
  std::vector<double> observation_times() const;
  double window_volume() const;
};

struct SimStats {
  std::uint64_t initial_particles = 0;
  std::uint64_t deaths = 0;
  std::uint64_t branchings = 0;  // deaths with two offspring
  std::uint64_t absorbed = 0;
  std::size_t peak_population = 0;
};

/// A particle at an observation time. Age is obs_time - birth_time.
struct ParticleView {
  std::uint64_t id;
  std::uint64_t parent_id;  // kNoParent for initial particles
  double birth_time;
  std::span<const double> position;
};

inline constexpr std::uint64_t kNoParent = ~std::uint64_t{0};

/// Receives the population at each observation time, in a deterministic order.
class SnapshotObserver {
 public:
  virtual ~SnapshotObserver() = default;
  virtual void begin_snapshot(std::size_t index, double time) = 0;
  virtual void particle(const ParticleView& p) = 0;
  virtual void end_snapshot() {}
};

struct Seedling {
  Point position;
  double birth_time = 0.0;   // <= 0 for particles alive before the start
  double death_time = 0.0;   // > 0
};

/// Dynamics shared by tree and field simulations.
struct Dynamics {
  const StableKernel* kernel;
  const LifetimeLaw* law;
  Boundary boundary = Boundary::free_space;
  double window_half_side = 0.0;
  std::size_t population_cap = 10'000'000;
  double two_offspring_probability = 0.5;
};

// Runs the critical binary branching system from `initial`, reporting the
// population at each of `obs_times` (increasing, starting at 0).
SimStats run_branching(const Dynamics& dyn, const std::vector<Seedling>& initial, std::span<const double> obs_times,
                       RandomStream& rng, SnapshotObserver& observer);

// Poisson(intensity (2L)^d) particles uniform on the window, with ages per
// the configured mode.
std::vector<Seedling> sample_initial_field(const SimConfig& config, RandomStream& rng);

/// Time-gridded record of one run.
struct Snapshot {
  double time = 0.0;
  std::vector<std::uint64_t> ids;
  std::vector<std::uint64_t> parent_ids;
  std::vector<double> ages;
  std::vector<double> positions;  // flat, stride dim

  std::size_t size() const { return ids.size(); }
  std::span<const double> position(std::size_t i, int dim) const {
    return {positions.data() + i * static_cast<std::size_t>(dim), static_cast<std::size_t>(dim)};
  }
};

struct FieldTrajectory {
  int dim = 1;
  double obs_step = 1.0;
  std::vector<double> obs_times;
  std::vector<Snapshot> snapshots;
  SimStats stats;
  std::string config_echo;

  double horizon() const { return obs_times.empty() ? 0.0 : obs_times.back(); }
};

class TrajectoryRecorder : public SnapshotObserver {
 public:
  explicit TrajectoryRecorder(FieldTrajectory& out) : out_(out) {}
  void begin_snapshot(std::size_t index, double time) override;
  void particle(const ParticleView& p) override;

 private:
  FieldTrajectory& out_;
};

struct TreeOptions {
  double obs_step = 0.0;  // 0: observe only at 0 and the horizon
  std::size_t population_cap = 10'000'000;
  double two_offspring_probability = 0.5;
};

std::vector<double> observation_grid(double horizon, double obs_step);

// Single ancestor at x0 in free space.
FieldTrajectory simulate_tree(const StableKernel& kernel, const LifetimeLaw& law, std::span<const double> x0,
                              double horizon, RandomStream& rng, const TreeOptions& options = {});

FieldTrajectory simulate_field(const SimConfig& config, RandomStream& rng);

struct ProbabilityEstimate {
  double value;
  double standard_error;
  std::size_t replicates;
};

// Monte Carlo estimate of P_{x0}(Z_t(A) > 0) for the ball A.
ProbabilityEstimate survival_probability_estimate(const StableKernel& kernel, const LifetimeLaw& law,
                                                  std::span<const double> x0, const TestFunction& ball, double t,
                                                  std::size_t replicates, RandomStream& rng, std::size_t threads = 1);

// CSV rows (replicate, obs_time, particle_id, age, x_1..x_d).
void write_trajectory_csv(std::ostream& os, const FieldTrajectory& traj, std::size_t replicate, bool header);

}  // namespace stablebranch
