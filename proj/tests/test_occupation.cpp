#include <cmath>
#include <numbers>
#include <numeric>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "doctest.h"
#include "stablebranch/occupation.hpp"

using namespace stablebranch;
using boost::math::quadrature::gauss_kronrod;

namespace {

// Hand-built trajectory on a uniform grid: positions[k] lists the particles at t_k.
FieldTrajectory fixture(int dim, double step, const std::vector<std::vector<double>>& positions) {
  FieldTrajectory traj;
  traj.dim = dim;
  traj.obs_step = step;
  std::uint64_t id = 0;
  for (std::size_t k = 0; k < positions.size(); ++k) {
    traj.obs_times.push_back(step * static_cast<double>(k));
    Snapshot s;
    s.time = traj.obs_times.back();
    s.positions = positions[k];
    for (std::size_t i = 0; i < positions[k].size() / static_cast<std::size_t>(dim); ++i) {
      s.ids.push_back(id++);
      s.parent_ids.push_back(kNoParent);
      s.ages.push_back(s.time);
    }
    traj.snapshots.push_back(std::move(s));
  }
  return traj;
}

FieldTrajectory simulated(double alpha, int dim, LifetimeLaw law, double L, double horizon, double step,
                          std::uint64_t seed) {
  SimConfig c(StableKernel(alpha, dim), std::move(law));
  c.window_half_side = L;
  c.horizon = horizon;
  c.obs_step = step;
  RandomStream rng(seed);
  return simulate_field(c, rng);
}

// Every other snapshot of `fine`, i.e. the same path observed at twice the step.
FieldTrajectory coarsen(const FieldTrajectory& fine) {
  FieldTrajectory out;
  out.dim = fine.dim;
  out.obs_step = 2.0 * fine.obs_step;
  for (std::size_t k = 0; k < fine.snapshots.size(); k += 2) {
    out.obs_times.push_back(fine.obs_times[k]);
    out.snapshots.push_back(fine.snapshots[k]);
  }
  return out;
}

double radial_integral(const TestFunction& f, int d) {
  const double r = f.radius();
  // Split at r/2 and integrate the profile against the sphere area.
  auto g = [&](double rho) { return f.radial(rho) * std::pow(rho, d - 1); };
  return unit_sphere_area(d) * (gauss_kronrod<double, 31>::integrate(g, 0.0, r / 2, 10, 1e-13) +
                                gauss_kronrod<double, 31>::integrate(g, r / 2, r, 10, 1e-13));
}

}  // namespace

TEST_CASE("lebesgue integrals of test functions") {
  CHECK(TestFunction::bump({0.0}, 1.0).lebesgue_integral() == doctest::Approx(16.0 / 15.0).epsilon(1e-14));
  CHECK(TestFunction::indicator_ball({0.0, 0.0}, 1.0).lebesgue_integral() ==
        doctest::Approx(std::numbers::pi).epsilon(1e-14));
  for (int d = 1; d <= 4; ++d) {
    const Point c(static_cast<std::size_t>(d), 0.3);
    const double unit = TestFunction::bump(c, 1.0).lebesgue_integral();
    for (double r : {0.5, 2.0, 3.7}) {
      CAPTURE(d);
      CAPTURE(r);
      const TestFunction f = TestFunction::bump(c, r, 1.5);
      CHECK(f.lebesgue_integral() == doctest::Approx(1.5 * std::pow(r, d) * unit).epsilon(1e-12));
      CHECK(std::abs(f.lebesgue_integral() - radial_integral(f, d)) <= 1e-6 * f.lebesgue_integral());
      const TestFunction b = TestFunction::indicator_ball(c, r);
      CHECK(std::abs(b.lebesgue_integral() - radial_integral(b, d)) <= 1e-6 * b.lebesgue_integral());
    }
  }
  // Independent Cartesian check in d = 2.
  const TestFunction f = TestFunction::bump({0.4, -0.2}, 1.3);
  const double cart = gauss_kronrod<double, 31>::integrate(
      [&](double x) {
        return gauss_kronrod<double, 31>::integrate(
            [&](double y) {
              const double p[] = {x, y};
              return f(p);
            },
            -1.5, 1.1, 10, 1e-12);
      },
      -0.9, 1.7, 10, 1e-12);
  CHECK(std::abs(cart - f.lebesgue_integral()) <= 1e-6 * f.lebesgue_integral());
}

TEST_CASE("test functions are nonnegative with compact support") {
  const TestFunction f = TestFunction::bump({1.0, 2.0}, 0.5, 2.0);
  for (double x = 0.0; x <= 2.0; x += 0.05)
    for (double y = 1.0; y <= 3.0; y += 0.05) {
      const double p[] = {x, y};
      CHECK(f(p) >= 0.0);
      if (std::hypot(x - 1.0, y - 2.0) >= 0.5) CHECK(f(p) == 0.0);
    }
  const double center[] = {1.0, 2.0};
  CHECK(f(center) == 2.0);
}

TEST_CASE("occupation integral examples") {
  const TestFunction phi = TestFunction::bump({0.0}, 1.0);
  SUBCASE("empty trajectory") {
    const auto traj = fixture(1, 1.0, std::vector<std::vector<double>>(11));
    CHECK(occupation_integral(traj, phi, 10.0).value == 0.0);
    CHECK(rescaled_occupation(traj, phi, 10.0) == 0.0);
    CHECK(occupancy_fraction(traj, TestFunction::indicator_ball({0.0}, 1.0), 10.0) == 0.0);
  }
  SUBCASE("immortal particle at the center") {
    const auto traj = fixture(1, 1.0, std::vector<std::vector<double>>(11, {0.0}));
    const OccupationRecord rec = occupation_integral(traj, phi, 10.0);
    CHECK(rec.value == doctest::Approx(10.0).epsilon(1e-14));
    CHECK(rec.rescaled == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(rec.horizon == 10.0);
    CHECK(rec.quadrature_step == 1.0);
    CHECK_FALSE(rec.truncated);
    CHECK(occupancy_fraction(traj, TestFunction::indicator_ball({0.0}, 0.5), 10.0) == doctest::Approx(1.0));
  }
  SUBCASE("off-grid T is truncated and recorded") {
    const auto traj = fixture(1, 1.0, std::vector<std::vector<double>>(11, {0.0}));
    const OccupationRecord rec = occupation_integral(traj, phi, 7.5);
    CHECK(rec.truncated);
    CHECK(rec.horizon == 7.0);
    CHECK(rec.value == doctest::Approx(7.0));
  }
  SUBCASE("T beyond the horizon is rejected") {
    const auto traj = fixture(1, 1.0, std::vector<std::vector<double>>(11, {0.0}));
    CHECK_THROWS(occupation_integral(traj, phi, 10.5));
    CHECK_THROWS(occupancy_fraction(traj, TestFunction::indicator_ball({0.0}, 1.0), 11.0));
  }
  SUBCASE("trapezoid weights") {
    // Particle present only at t = 1 of {0, 1, 2}: integral = 1 * phi(0) * step.
    const auto traj = fixture(1, 0.5, {{}, {0.0}, {}});
    CHECK(occupation_integral(traj, phi, 1.0).value == doctest::Approx(0.5));
    const std::vector<double> series{1.0, 2.0, 3.0, 4.0};
    CHECK(trapezoid(series, 2.0, 3) == doctest::Approx(2.0 * (0.5 + 2.0 + 3.0 + 2.0)));
    CHECK(trapezoid(series, 2.0, 0) == 0.0);
  }
}

TEST_CASE("halving the observation step barely moves the integral") {
  // Slow branching (Exp(0.2)) and d = 1 keep the trapezoid error small
  // relative to the integral; the fine grid is the reference.
  const auto fine = simulated(2.0, 1, LifetimeLaw::exponential(0.2), 10.0, 20.0, 0.05, 2024);
  const auto coarse = coarsen(fine);
  const TestFunction phi = TestFunction::bump({0.0}, 4.0);
  const double vf = occupation_integral(fine, phi, 20.0).value;
  const double vc = occupation_integral(coarse, phi, 20.0).value;
  REQUIRE(vf > 0.0);
  CHECK(std::abs(vf - vc) < 0.01 * vf);
}

TEST_CASE("linearity, monotonicity and range") {
  const auto traj = simulated(1.5, 2, make_pareto_tail(0.5), 5.0, 20.0, 0.5, 3);
  const TestFunction phi = TestFunction::bump({0.5, 0.0}, 2.0);
  const TestFunction psi = TestFunction::indicator_ball({-1.0, 1.0}, 1.5);
  const double a = 2.5, b = 0.75;
  const SpatialFunction combo = [&](std::span<const double> x) { return a * phi(x) + b * psi(x); };
  for (double T : {1.0, 7.5, 20.0}) {
    const double lhs = occupation_integral(traj, combo, T).value;
    const double rhs = a * occupation_integral(traj, phi, T).value + b * occupation_integral(traj, psi, T).value;
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
  }
  double prev = 0.0;
  for (double T = 0.0; T <= 20.0; T += 0.5) {
    const double v = occupation_integral(traj, phi, T).value;
    CHECK(v >= prev);
    prev = v;
    if (T > 0.0) {
      const double f = occupancy_fraction(traj, psi, T);
      CHECK(f >= 0.0);
      CHECK(f <= 1.0);
    }
  }
}

TEST_CASE("occupancy saturates for a window-sized ball") {
  const auto traj = simulated(2.0, 1, LifetimeLaw::exponential(1.0), 10.0, 10.0, 0.5, 8);
  // Mean 200 initial particles: the window is never empty on this horizon.
  SimConfig dense(StableKernel(2.0, 1), LifetimeLaw::exponential(1.0));
  dense.intensity = 10.0;
  dense.horizon = 10.0;
  dense.obs_step = 0.5;
  RandomStream rng(8);
  const auto d = simulate_field(dense, rng);
  CHECK(occupancy_fraction(d, TestFunction::indicator_ball({0.0}, 10.0), 10.0) == doctest::Approx(1.0));
  CHECK(occupancy_fraction(traj, TestFunction::indicator_ball({0.0}, 0.01), 10.0) < 0.5);
}

TEST_CASE("translation covariance on the torus") {
  const double L = 6.0;
  const auto traj = simulated(1.0, 2, LifetimeLaw::gamma(2.0, 1.0), L, 10.0, 0.5, 77);
  const double shift[] = {1.75, -2.5};
  FieldTrajectory moved = traj;
  for (auto& s : moved.snapshots)
    for (std::size_t i = 0; i < s.positions.size(); ++i) {
      double& x = s.positions[i];
      x += shift[i % 2];
      x -= 2.0 * L * std::floor((x + L) / (2.0 * L));
    }
  const TestFunction phi = TestFunction::bump({0.5, 1.0}, 2.0);
  const TestFunction ball = TestFunction::indicator_ball({0.5, 1.0}, 2.0);
  const double before = occupation_integral(traj, phi, 10.0).value;
  const double after = occupation_integral(moved, phi.translated(shift), 10.0).value;
  REQUIRE(before > 0.0);
  CHECK(after == doctest::Approx(before).epsilon(1e-12));
  CHECK(occupancy_fraction(moved, ball.translated(shift), 10.0) == occupancy_fraction(traj, ball, 10.0));
}

TEST_CASE("streaming observer matches the recorded trajectory") {
  SimConfig c(StableKernel(1.5, 1), make_pareto_tail(0.7));
  c.horizon = 15.0;
  c.obs_step = 0.5;
  const TestFunction phi = TestFunction::bump({0.0}, 3.0);
  const TestFunction ball = TestFunction::indicator_ball({1.0}, 0.5);

  RandomStream r1(11);
  const auto traj = simulate_field(c, r1);

  RandomStream r2(11);
  const Dynamics dyn{&c.kernel, &c.law, c.boundary, c.window_half_side, c.population_cap, 0.5};
  const auto initial = sample_initial_field(c, r2);
  FunctionalObserver obs({phi}, {ball});
  const auto times = c.observation_times();
  run_branching(dyn, initial, times, r2, obs);

  CHECK(obs.series(0) == snapshot_series(traj, [&](std::span<const double> x) { return phi(x); }));
  CHECK(obs.occupancy(0) == occupancy_series(traj, ball));
  for (std::size_t k = 0; k < traj.snapshots.size(); ++k) CHECK(obs.counts()[k] == traj.snapshots[k].size());
}

TEST_CASE("rescaled occupation has the Lebesgue mean") {
  const TestFunction phi = TestFunction::bump({0.0}, 2.0);
  SimConfig c(StableKernel(1.5, 1), make_pareto_tail(0.5));
  c.horizon = 20.0;
  c.obs_step = 0.5;
  c.window_half_side = 15.0;
  std::vector<double> v;
  for (std::uint64_t i = 0; i < 1500; ++i) {
    RandomStream rng = RandomStream::derive(404, i);
    v.push_back(rescaled_occupation(simulate_field(c, rng), phi, 20.0));
  }
  const double n = static_cast<double>(v.size());
  const double m = std::accumulate(v.begin(), v.end(), 0.0) / n;
  double ss = 0.0;
  for (double x : v) ss += (x - m) * (x - m);
  const double se = std::sqrt(ss / (n - 1.0) / n);
  CHECK(std::abs(m - phi.lebesgue_integral()) <= 3.0 * se);
}
