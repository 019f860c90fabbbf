#pragma once

#include <functional>
#include <span>
#include <vector>

#include "stablebranch/branching_sim.hpp"
#include "stablebranch/test_function.hpp"

namespace stablebranch {

using SpatialFunction = std::function<double(std::span<const double>)>;

struct OccupationRecord {
  double horizon = 0.0;        // T actually used (a multiple of the observation step)
  double value = 0.0;          // <phi, J_T>
  double rescaled = 0.0;       // T^{-1} <phi, J_T>
  double quadrature_step = 0.0;
  bool truncated = false;      // requested T was rounded down to the grid
};

// <phi, X_t> at every snapshot.
std::vector<double> snapshot_series(const FieldTrajectory& traj, const SpatialFunction& phi);
// 1{X_t(A) > 0} at every snapshot.
std::vector<double> occupancy_series(const FieldTrajectory& traj, const TestFunction& ball);

// Trapezoid rule over a snapshot series on a uniform grid with spacing `step`.
// `last` is the index of the final grid point included.
double trapezoid(std::span<const double> series, double step, std::size_t last);

OccupationRecord occupation_integral(const FieldTrajectory& traj, const SpatialFunction& phi, double T);
OccupationRecord occupation_integral(const FieldTrajectory& traj, const TestFunction& phi, double T);
double rescaled_occupation(const FieldTrajectory& traj, const TestFunction& phi, double T);
double occupancy_fraction(const FieldTrajectory& traj, const TestFunction& ball, double T);

/// Streaming alternative to recording a trajectory: keeps <phi_j, X_t> and
/// 1{X_t(A_k) > 0} per snapshot for a fixed set of functions and balls.
class FunctionalObserver : public SnapshotObserver {
 public:
  FunctionalObserver(std::vector<TestFunction> functions, std::vector<TestFunction> balls);

  void begin_snapshot(std::size_t index, double time) override;
  void particle(const ParticleView& p) override;

  const std::vector<double>& series(std::size_t j) const { return sums_[j]; }
  const std::vector<double>& occupancy(std::size_t k) const { return occupied_[k]; }
  const std::vector<double>& counts() const { return counts_; }

 private:
  std::vector<TestFunction> functions_;
  std::vector<TestFunction> balls_;
  std::vector<std::vector<double>> sums_;
  std::vector<std::vector<double>> occupied_;
  std::vector<double> counts_;
};

}  // namespace stablebranch
