#include <cmath>
#include <vector>

#include "doctest.h"
#include "stablebranch/renewal.hpp"

using namespace stablebranch;

namespace {

struct Case {
  LifetimeLaw law;
  double horizon;
  double step;
};

std::vector<Case> shipped() {
  return {{LifetimeLaw::exponential(1.0), 100.0, 0.01},
          {LifetimeLaw::exponential(2.0), 50.0, 0.01},
          {LifetimeLaw::gamma(2.0, 2.0), 100.0, 0.02},
          {make_pareto_tail(0.5), 1000.0, 0.25},
          {make_pareto_tail(0.7), 1000.0, 0.25}};
}

}  // namespace

TEST_CASE("grid parameters are validated") {
  const LifetimeLaw law = LifetimeLaw::exponential(1.0);
  CHECK_THROWS_AS(build_renewal(law, 10.0, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(build_renewal(law, 10.0, -0.1), std::invalid_argument);
  CHECK_THROWS_AS(build_renewal(law, 0.05, 0.1), std::invalid_argument);
}

TEST_CASE("exponential renewal function is 1 + rate t") {
  const RenewalTable u = build_renewal(LifetimeLaw::exponential(1.0), 100.0, 0.01);
  CHECK(std::abs(u(10.0) - 11.0) < 1e-3);
  double worst = 0.0;
  for (double t = 0.0; t <= 100.0; t += 0.0731) worst = std::max(worst, std::abs(u(t) - (1.0 + t)));
  CHECK(worst < 1e-3);
  for (double rate : {0.5, 2.5, 4.0}) {
    const RenewalTable ur = build_renewal(LifetimeLaw::exponential(rate), 100.0, 0.01);
    double w = 0.0;
    for (double t = 0.0; t <= 100.0; t += 0.0731) w = std::max(w, std::abs(ur(t) - (1.0 + rate * t)));
    CAPTURE(rate);
    CHECK(w < 1e-3);
  }
}

TEST_CASE("table invariants") {
  for (const auto& c : shipped()) {
    const RenewalTable u = build_renewal(c.law, c.horizon, c.step);
    CAPTURE(c.law.describe());
    CHECK(u.values()[0] == 1.0);
    CHECK(u(0.0) == 1.0);
    const auto& v = u.values();
    for (std::size_t i = 1; i < v.size(); ++i) REQUIRE(v[i] >= v[i - 1]);
    // Subadditivity on grid points, within 2 * step * max density.
    double fmax = 0.0;
    for (double x = 0.0; x < 10.0; x += 0.001) fmax = std::max(fmax, c.law.density(x));
    const double tol = 2.0 * c.step * fmax;
    const std::size_t n = v.size() - 1, stride = std::max<std::size_t>(1, n / 60);
    for (std::size_t i = 0; i <= n; i += stride)
      for (std::size_t j = 0; i + j <= n; j += stride) REQUIRE(v[i + j] <= v[i] + v[j] + tol);
  }
}

TEST_CASE("halving the step changes U(horizon) by less than 0.5%") {
  for (const auto& c : shipped()) {
    const RenewalTable a = build_renewal(c.law, c.horizon, c.step);
    const RenewalTable b = build_renewal(c.law, c.horizon, 0.5 * c.step);
    CAPTURE(c.law.describe());
    CHECK(std::abs(a(c.horizon) - b(c.horizon)) / b(c.horizon) < 5e-3);
    CHECK(a.warning().empty());
  }
}

TEST_CASE("coarse grids raise a warning") {
  const RenewalTable u = build_renewal(LifetimeLaw::gamma(0.3, 1.0), 20.0, 1.0);
  CHECK_FALSE(u.warning().empty());
}

TEST_CASE("heavy-tailed renewal asymptotics") {
  const RenewalTable u = build_renewal(make_pareto_tail(0.5), 1e4, 1.0);
  const double v = u(1e4) / std::sqrt(1e4);
  CHECK(v == doctest::Approx(1.0 / std::tgamma(1.5)).epsilon(0.05));
  CHECK(v * std::tgamma(1.5) >= 0.95);
  CHECK(v * std::tgamma(1.5) <= 1.05);
}

TEST_CASE("elementary renewal theorem") {
  const RenewalDiagnostic e = elementary_renewal_check(build_renewal(LifetimeLaw::exponential(2.0), 200.0, 0.01));
  CHECK(e.expected == 2.0);
  CHECK(e.relative_gap() < 0.05);
  const RenewalDiagnostic g = elementary_renewal_check(build_renewal(LifetimeLaw::gamma(2.0, 2.0), 500.0, 0.05));
  CHECK(g.limit_estimate == doctest::Approx(1.0).epsilon(0.05));
  CHECK(g.relative_gap() < 0.05);
  CHECK_THROWS_AS(elementary_renewal_check(build_renewal(make_pareto_tail(0.5), 10.0, 0.1)), DomainError);
}

TEST_CASE("interpolation and horizon") {
  const RenewalTable u = build_renewal(LifetimeLaw::gamma(2.0, 2.0), 10.0, 0.1);
  CHECK(u.horizon() == doctest::Approx(10.0));
  CHECK(u(0.35) == doctest::Approx(0.5 * (u(0.3) + u(0.4))));
  CHECK_THROWS_AS(u(10.5), std::out_of_range);
}

TEST_CASE("integrals against dU exclude the atom at zero") {
  const RenewalTable u = build_renewal(LifetimeLaw::exponential(1.0), 10.0, 0.01);
  CHECK(renewal_measure_integral(u, [](double) { return 1.0; }, 5.0) == doctest::Approx(5.0).epsilon(1e-6));
  CHECK(renewal_measure_integral(u, [](double) { return 0.0; }, 5.0) == 0.0);
  CHECK(std::abs(renewal_measure_integral(u, [](double r) { return r; }, 2.0) - 2.0) < 1e-3);
  CHECK(renewal_measure_integral(u, [](double) { return 1.0; }, 0.0) == 0.0);
  // s off the grid.
  CHECK(renewal_measure_integral(u, [](double) { return 1.0; }, 2.345) == doctest::Approx(2.345).epsilon(1e-6));
  CHECK_THROWS_AS(renewal_measure_integral(u, [](double) { return 1.0; }, 11.0), std::out_of_range);
}
