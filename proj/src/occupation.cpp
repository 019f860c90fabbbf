#include "stablebranch/occupation.hpp"

#include <cmath>
#include <stdexcept>

namespace stablebranch {

std::vector<double> snapshot_series(const FieldTrajectory& traj, const SpatialFunction& phi) {
  std::vector<double> out;
  out.reserve(traj.snapshots.size());
  for (const auto& snap : traj.snapshots) {
    double acc = 0.0;
    for (std::size_t i = 0; i < snap.size(); ++i) acc += phi(snap.position(i, traj.dim));
    out.push_back(acc);
  }
  return out;
}

std::vector<double> occupancy_series(const FieldTrajectory& traj, const TestFunction& ball) {
  const TestFunction indicator = TestFunction::indicator_ball(ball.center(), ball.radius());
  std::vector<double> out;
  out.reserve(traj.snapshots.size());
  for (const auto& snap : traj.snapshots) {
    double hit = 0.0;
    for (std::size_t i = 0; i < snap.size() && hit == 0.0; ++i)
      if (indicator(snap.position(i, traj.dim)) > 0.0) hit = 1.0;
    out.push_back(hit);
  }
  return out;
}

double trapezoid(std::span<const double> series, double step, std::size_t last) {
  if (last == 0 || series.empty()) return 0.0;
  double acc = 0.5 * (series[0] + series[last]);
  for (std::size_t i = 1; i < last; ++i) acc += series[i];
  return acc * step;
}

namespace {

// Index of the last uniform grid point <= T; throws if T exceeds the horizon.
std::size_t grid_index(const FieldTrajectory& traj, double T, bool& truncated) {
  if (T < 0.0) throw std::invalid_argument("occupation: T must be nonnegative");
  if (T > traj.horizon() * (1.0 + 1e-12) + 1e-12) throw std::out_of_range("occupation: T beyond trajectory horizon");
  const double pos = T / traj.obs_step;
  auto idx = static_cast<std::size_t>(std::floor(pos + 1e-9));
  idx = std::min(idx, traj.obs_times.size() - 1);
  truncated = std::abs(pos - static_cast<double>(idx)) > 1e-9;
  return idx;
}

}  // namespace

OccupationRecord occupation_integral(const FieldTrajectory& traj, const SpatialFunction& phi, double T) {
  OccupationRecord rec;
  const std::size_t last = grid_index(traj, T, rec.truncated);
  const auto series = snapshot_series(traj, phi);
  rec.horizon = traj.obs_step * static_cast<double>(last);
  rec.value = trapezoid(series, traj.obs_step, last);
  rec.rescaled = rec.horizon > 0.0 ? rec.value / rec.horizon : 0.0;
  rec.quadrature_step = traj.obs_step;
  return rec;
}

OccupationRecord occupation_integral(const FieldTrajectory& traj, const TestFunction& phi, double T) {
  return occupation_integral(traj, SpatialFunction([&](std::span<const double> x) { return phi(x); }), T);
}

double rescaled_occupation(const FieldTrajectory& traj, const TestFunction& phi, double T) {
  return occupation_integral(traj, phi, T).rescaled;
}

double occupancy_fraction(const FieldTrajectory& traj, const TestFunction& ball, double T) {
  bool truncated = false;
  const std::size_t last = grid_index(traj, T, truncated);
  if (last == 0) return occupancy_series(traj, ball).front();
  const auto series = occupancy_series(traj, ball);
  const double span_T = traj.obs_step * static_cast<double>(last);
  return trapezoid(series, traj.obs_step, last) / span_T;
}

FunctionalObserver::FunctionalObserver(std::vector<TestFunction> functions, std::vector<TestFunction> balls)
    : functions_(std::move(functions)), sums_(functions_.size()) {
  for (const auto& b : balls) balls_.push_back(TestFunction::indicator_ball(b.center(), b.radius()));
  occupied_.resize(balls_.size());
}

void FunctionalObserver::begin_snapshot(std::size_t, double) {
  for (auto& s : sums_) s.push_back(0.0);
  for (auto& o : occupied_) o.push_back(0.0);
  counts_.push_back(0.0);
}

void FunctionalObserver::particle(const ParticleView& p) {
  counts_.back() += 1.0;
  for (std::size_t j = 0; j < functions_.size(); ++j) sums_[j].back() += functions_[j](p.position);
  for (std::size_t k = 0; k < balls_.size(); ++k)
    if (occupied_[k].back() == 0.0 && balls_[k](p.position) > 0.0) occupied_[k].back() = 1.0;
}

}  // namespace stablebranch
