#include "stablebranch/branching_sim.hpp"

#include <array>
#include <cmath>
#include <ostream>
#include <random>
#include <sstream>

#include "stablebranch/parallel.hpp"

namespace stablebranch {

std::string to_string(Boundary b) {
  switch (b) {
    case Boundary::free_space: return "free";
    case Boundary::torus: return "torus";
    case Boundary::absorbing: return "absorbing";
  }
  return "?";
}

std::string to_string(InitialAge a) { return a == InitialAge::zero ? "zero" : "stationary"; }

Boundary parse_boundary(const std::string& s) {
  if (s == "torus") return Boundary::torus;
  if (s == "absorbing" || s == "absorbing-buffer") return Boundary::absorbing;
  if (s == "free") return Boundary::free_space;
  throw std::invalid_argument("unknown boundary mode '" + s + "'");
}

InitialAge parse_initial_age(const std::string& s) {
  if (s == "zero") return InitialAge::zero;
  if (s == "stationary" || s == "stationary-F") return InitialAge::stationary;
  throw std::invalid_argument("unknown initial age mode '" + s + "'");
}

void SimConfig::validate() const {
  if (!(window_half_side > 0.0)) throw std::invalid_argument("window half side must be positive");
  if (!(obs_step > 0.0)) throw std::invalid_argument("observation step must be positive");
  if (!(horizon > 0.0)) throw std::invalid_argument("horizon must be positive");
  if (population_cap == 0) throw std::invalid_argument("population cap must be positive");
  if (!(intensity >= 0.0)) throw std::invalid_argument("intensity must be nonnegative");
  if (!(two_offspring_probability >= 0.0 && two_offspring_probability <= 1.0))
    throw std::invalid_argument("two-offspring probability must lie in [0, 1]");
  if (kernel.dim() > kMaxSimDim) throw std::invalid_argument("simulation supports dimensions up to 8");
}

double SimConfig::window_volume() const { return std::pow(2.0 * window_half_side, kernel.dim()); }

std::vector<double> observation_grid(double horizon, double obs_step) {
  std::vector<double> grid{0.0};
  if (obs_step <= 0.0 || obs_step >= horizon) {
    grid.push_back(horizon);
    return grid;
  }
  const auto n = static_cast<std::size_t>(std::floor(horizon / obs_step + 1e-9));
  for (std::size_t i = 1; i <= n; ++i) grid.push_back(obs_step * static_cast<double>(i));
  if (horizon - grid.back() > 1e-9 * obs_step) grid.push_back(horizon);
  return grid;
}

std::vector<double> SimConfig::observation_times() const { return observation_grid(horizon, obs_step); }

namespace {

struct Live {
  std::uint64_t id;
  std::uint64_t parent;
  double birth;
  double death;
  double t_pos;  // time at which `pos` was last materialized
  std::array<double, kMaxSimDim> pos;
};

class Engine {
 public:
  Engine(const Dynamics& dyn, RandomStream& rng) : dyn_(dyn), rng_(rng), dim_(dyn.kernel->dim()) {
    if (dim_ > kMaxSimDim) throw std::invalid_argument("simulation supports dimensions up to 8");
  }

  SimStats run(const std::vector<Seedling>& initial, std::span<const double> obs, SnapshotObserver& observer) {
    current_.clear();
    current_.reserve(initial.size());
    for (const auto& s : initial) {
      Live p{};
      p.id = next_id_++;
      p.parent = kNoParent;
      p.birth = s.birth_time;
      p.death = s.death_time;
      p.t_pos = obs.empty() ? 0.0 : obs.front();
      for (int i = 0; i < dim_; ++i) p.pos[static_cast<std::size_t>(i)] = s.position[static_cast<std::size_t>(i)];
      current_.push_back(p);
    }
    stats_.initial_particles = initial.size();
    stats_.peak_population = current_.size();
    if (obs.empty()) return stats_;
    emit(0, obs[0], observer);
    for (std::size_t k = 1; k < obs.size(); ++k) {
      step_to(obs[k]);
      emit(k, obs[k], observer);
    }
    return stats_;
  }

 private:
  void emit(std::size_t index, double time, SnapshotObserver& observer) {
    observer.begin_snapshot(index, time);
    for (const auto& p : current_)
      observer.particle({p.id, p.parent, p.birth, std::span<const double>(p.pos.data(), static_cast<std::size_t>(dim_))});
    observer.end_snapshot();
  }

  // Returns false if the particle left the window under absorbing boundaries.
  bool advance(Live& p, double t) {
    const double dt = t - p.t_pos;
    if (dt > 0.0) {
      std::array<double, kMaxSimDim> inc;
      dyn_.kernel->sample_increment(dt, rng_, std::span<double>(inc.data(), static_cast<std::size_t>(dim_)));
      for (int i = 0; i < dim_; ++i) p.pos[static_cast<std::size_t>(i)] += inc[static_cast<std::size_t>(i)];
      p.t_pos = t;
    }
    const double L = dyn_.window_half_side;
    switch (dyn_.boundary) {
      case Boundary::free_space:
        return true;
      case Boundary::torus:
        for (int i = 0; i < dim_; ++i) {
          double& x = p.pos[static_cast<std::size_t>(i)];
          if (x < -L || x >= L) x -= 2.0 * L * std::floor((x + L) / (2.0 * L));
        }
        return true;
      case Boundary::absorbing:
        for (int i = 0; i < dim_; ++i) {
          const double x = p.pos[static_cast<std::size_t>(i)];
          if (x < -L || x > L) return false;
        }
        return true;
    }
    return true;
  }

  void step_to(double t_next) {
    next_.clear();
    for (const auto& root : current_) {
      stack_.push_back(root);
      while (!stack_.empty()) {
        Live q = stack_.back();
        stack_.pop_back();
        if (q.death > t_next) {
          if (advance(q, t_next))
            next_.push_back(q);
          else
            ++stats_.absorbed;
          continue;
        }
        if (!advance(q, q.death)) {
          ++stats_.absorbed;
          continue;
        }
        ++stats_.deaths;
        if (!rng_.bernoulli(dyn_.two_offspring_probability)) continue;
        ++stats_.branchings;
        for (int c = 0; c < 2; ++c) {
          Live child = q;
          child.id = next_id_++;
          child.parent = q.id;
          child.birth = q.death;
          child.t_pos = q.death;
          child.death = q.death + dyn_.law->sample(rng_);
          stack_.push_back(child);
        }
        const std::size_t live = next_.size() + stack_.size();
        if (live > dyn_.population_cap)
          throw CapExceeded("population cap exceeded (" + std::to_string(live) + " > " +
                            std::to_string(dyn_.population_cap) + ")");
      }
    }
    current_.swap(next_);
    stats_.peak_population = std::max(stats_.peak_population, current_.size());
  }

  const Dynamics& dyn_;
  RandomStream& rng_;
  int dim_;
  std::uint64_t next_id_ = 0;
  SimStats stats_;
  std::vector<Live> current_, next_, stack_;
};

}  // namespace

SimStats run_branching(const Dynamics& dyn, const std::vector<Seedling>& initial, std::span<const double> obs_times,
                       RandomStream& rng, SnapshotObserver& observer) {
  Engine engine(dyn, rng);
  return engine.run(initial, obs_times, observer);
}

std::vector<Seedling> sample_initial_field(const SimConfig& config, RandomStream& rng) {
  const int d = config.kernel.dim();
  const double L = config.window_half_side;
  const double mean_count = config.intensity * config.window_volume();
  std::vector<Seedling> out;
  if (mean_count <= 0.0) return out;
  std::poisson_distribution<std::uint64_t> count_dist(mean_count);
  const std::uint64_t n = count_dist(rng);
  out.reserve(n);
  for (std::uint64_t i = 0; i < n; ++i) {
    Seedling s;
    s.position.resize(static_cast<std::size_t>(d));
    for (auto& x : s.position) x = L * (2.0 * rng.uniform() - 1.0);
    if (config.initial_age == InitialAge::zero) {
      s.birth_time = 0.0;
      s.death_time = config.law.sample(rng);
    } else {
      const double age = config.law.sample(rng);
      s.birth_time = -age;
      s.death_time = config.law.sample_residual(age, rng);
    }
    out.push_back(std::move(s));
  }
  return out;
}

void TrajectoryRecorder::begin_snapshot(std::size_t, double time) {
  out_.snapshots.emplace_back();
  out_.snapshots.back().time = time;
}

void TrajectoryRecorder::particle(const ParticleView& p) {
  Snapshot& s = out_.snapshots.back();
  s.ids.push_back(p.id);
  s.parent_ids.push_back(p.parent_id);
  s.ages.push_back(s.time - p.birth_time);
  s.positions.insert(s.positions.end(), p.position.begin(), p.position.end());
}

FieldTrajectory simulate_tree(const StableKernel& kernel, const LifetimeLaw& law, std::span<const double> x0,
                              double horizon, RandomStream& rng, const TreeOptions& options) {
  if (!(horizon > 0.0)) throw std::invalid_argument("simulate_tree: horizon must be positive");
  if (x0.size() != static_cast<std::size_t>(kernel.dim())) throw std::invalid_argument("simulate_tree: dimension mismatch");
  Dynamics dyn{&kernel, &law, Boundary::free_space, 0.0, options.population_cap, options.two_offspring_probability};
  FieldTrajectory traj;
  traj.dim = kernel.dim();
  traj.obs_times = observation_grid(horizon, options.obs_step);
  traj.obs_step = options.obs_step > 0.0 ? options.obs_step : horizon;
  std::vector<Seedling> seed{{Point(x0.begin(), x0.end()), 0.0, law.sample(rng)}};
  TrajectoryRecorder recorder(traj);
  traj.stats = run_branching(dyn, seed, traj.obs_times, rng, recorder);
  std::ostringstream os;
  os << "tree alpha=" << kernel.alpha() << " d=" << kernel.dim() << " law=" << law.describe() << " horizon=" << horizon;
  traj.config_echo = os.str();
  return traj;
}

FieldTrajectory simulate_field(const SimConfig& config, RandomStream& rng) {
  config.validate();
  Dynamics dyn{&config.kernel, &config.law, config.boundary, config.window_half_side, config.population_cap,
               config.two_offspring_probability};
  FieldTrajectory traj;
  traj.dim = config.kernel.dim();
  traj.obs_step = config.obs_step;
  traj.obs_times = config.observation_times();
  const auto initial = sample_initial_field(config, rng);
  TrajectoryRecorder recorder(traj);
  traj.stats = run_branching(dyn, initial, traj.obs_times, rng, recorder);
  std::ostringstream os;
  os << "field alpha=" << config.kernel.alpha() << " d=" << config.kernel.dim() << " law=" << config.law.describe()
     << " L=" << config.window_half_side << " boundary=" << to_string(config.boundary) << " obs_step=" << config.obs_step
     << " horizon=" << config.horizon << " seed=" << config.seed << " initial_age=" << to_string(config.initial_age);
  traj.config_echo = os.str();
  return traj;
}

namespace {

class BallHitObserver : public SnapshotObserver {
 public:
  explicit BallHitObserver(const TestFunction& ball) : ball_(ball) {}
  void begin_snapshot(std::size_t, double) override { hit_ = false; }
  void particle(const ParticleView& p) override {
    if (!hit_ && ball_(p.position) > 0.0) hit_ = true;
  }
  bool hit() const { return hit_; }

 private:
  const TestFunction& ball_;
  bool hit_ = false;
};

}  // namespace

ProbabilityEstimate survival_probability_estimate(const StableKernel& kernel, const LifetimeLaw& law,
                                                  std::span<const double> x0, const TestFunction& ball, double t,
                                                  std::size_t replicates, RandomStream& rng, std::size_t threads) {
  if (replicates < 100) throw std::invalid_argument("survival_probability_estimate: need at least 100 replicates");
  if (!(t > 0.0)) throw std::invalid_argument("survival_probability_estimate: t must be positive");
  const TestFunction indicator = TestFunction::indicator_ball(ball.center(), ball.radius());
  const std::uint64_t base = rng();
  const Point start(x0.begin(), x0.end());
  const std::array<double, 2> obs{0.0, t};
  Dynamics dyn{&kernel, &law, Boundary::free_space, 0.0, 10'000'000, 0.5};
  auto hits = parallel_map<char>(replicates, threads, [&](std::size_t i) -> char {
    RandomStream stream = RandomStream::derive(base, i);
    std::vector<Seedling> seed{{start, 0.0, law.sample(stream)}};
    BallHitObserver obs_hit(indicator);
    run_branching(dyn, seed, obs, stream, obs_hit);
    return obs_hit.hit() ? 1 : 0;
  });
  double count = 0.0;
  for (char h : hits) count += h;
  const double n = static_cast<double>(replicates);
  const double p = count / n;
  return {p, std::sqrt(std::max(p * (1.0 - p), 0.0) / n), replicates};
}

void write_trajectory_csv(std::ostream& os, const FieldTrajectory& traj, std::size_t replicate, bool header) {
  if (header) {
    os << "replicate,obs_time,particle_id,age";
    for (int i = 1; i <= traj.dim; ++i) os << ",x_" << i;
    os << "\r\n";
  }
  os.precision(17);
  for (const auto& snap : traj.snapshots) {
    for (std::size_t i = 0; i < snap.size(); ++i) {
      os << replicate << ',' << snap.time << ',' << snap.ids[i] << ',' << snap.ages[i];
      for (double x : snap.position(i, traj.dim)) os << ',' << x;
      os << "\r\n";
    }
  }
}

}  // namespace stablebranch
