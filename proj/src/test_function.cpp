#include "stablebranch/test_function.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "stablebranch/quadrature.hpp"

namespace stablebranch {

double unit_sphere_area(int d) {
  return 2.0 * std::pow(std::numbers::pi, 0.5 * d) / std::tgamma(0.5 * d);
}

double unit_ball_volume(int d) {
  return std::pow(std::numbers::pi, 0.5 * d) / std::tgamma(0.5 * d + 1.0);
}

TestFunction::TestFunction(Shape shape, Point center, double radius, double amplitude)
    : shape_(shape), center_(std::move(center)), radius_(radius), amplitude_(amplitude) {
  if (center_.empty()) throw std::invalid_argument("test function needs dimension >= 1");
  if (!(radius_ > 0.0)) throw std::invalid_argument("test function radius must be positive");
  if (!(amplitude_ >= 0.0)) throw std::invalid_argument("test function amplitude must be nonnegative");
}

TestFunction TestFunction::bump(Point center, double radius, double amplitude) {
  return TestFunction(Shape::bump, std::move(center), radius, amplitude);
}

TestFunction TestFunction::indicator_ball(Point center, double radius, double amplitude) {
  return TestFunction(Shape::indicator_ball, std::move(center), radius, amplitude);
}

double TestFunction::radial(double rho) const {
  if (rho > radius_) return 0.0;
  if (shape_ == Shape::indicator_ball) return amplitude_;
  const double q = 1.0 - (rho * rho) / (radius_ * radius_);
  return amplitude_ * q * q;
}

double TestFunction::operator()(std::span<const double> x) const {
  double r2 = 0.0;
  for (std::size_t i = 0; i < center_.size(); ++i) {
    const double dx = x[i] - center_[i];
    r2 += dx * dx;
  }
  const double R2 = radius_ * radius_;
  if (r2 > R2) return 0.0;
  if (shape_ == Shape::indicator_ball) return amplitude_;
  const double q = 1.0 - r2 / R2;
  return amplitude_ * q * q;
}

double TestFunction::lebesgue_integral() const {
  const int d = dim();
  const double rd = std::pow(radius_, d);
  if (shape_ == Shape::indicator_ball) return amplitude_ * unit_ball_volume(d) * rd;
  // \int_0^1 (1-s^2)^2 s^{d-1} ds = 8 / (d (d+2) (d+4))
  return amplitude_ * unit_sphere_area(d) * rd * 8.0 / (d * (d + 2.0) * (d + 4.0));
}

double TestFunction::fourier_radial(double k) const {
  const int d = dim();
  if (k == 0.0) return lebesgue_integral();
  const double r = radius_;
  if (shape_ == Shape::indicator_ball) {
    const double kr = k * r;
    if (kr < 1e-3) return lebesgue_integral() * (1.0 - kr * kr / (2.0 * (d + 2.0)));
    if (d == 1) return amplitude_ * 2.0 * std::sin(kr) / k;
    if (d == 3) return amplitude_ * 4.0 * std::numbers::pi * (std::sin(kr) - kr * std::cos(kr)) / (k * k * k);
    return amplitude_ * std::pow(2.0 * std::numbers::pi * r / k, 0.5 * d) * std::cyl_bessel_j(0.5 * d, kr);
  }
  const double kr = k * r;
  if (kr >= 1.0 && (d == 1 || d == 3)) {
    const double s = std::sin(kr), c = std::cos(kr);
    const double rd = std::pow(r, d);
    if (d == 1) return amplitude_ * rd * 16.0 * (3.0 * s - 3.0 * kr * c - kr * kr * s) / std::pow(kr, 5);
    return amplitude_ * rd * 32.0 * std::numbers::pi *
           (kr * kr * kr * c - 6.0 * kr * kr * s - 15.0 * kr * c + 15.0 * s) / std::pow(kr, 7);
  }
  // Hankel transform of the bump profile.
  const std::size_t panels = 2 + static_cast<std::size_t>(k * r);
  auto profile = [&](double rho) {
    const double q = 1.0 - (rho * rho) / (r * r);
    return q * q;
  };
  double value;
  if (d == 1) {
    value = 2.0 * integrate_gl([&](double rho) { return profile(rho) * std::cos(k * rho); }, 0.0, r, panels);
  } else if (d == 3) {
    value = 4.0 * std::numbers::pi / k *
            integrate_gl([&](double rho) { return profile(rho) * rho * std::sin(k * rho); }, 0.0, r, panels);
  } else {
    const double nu = 0.5 * d - 1.0;
    value = std::pow(2.0 * std::numbers::pi, 0.5 * d) * std::pow(k, -nu) *
            integrate_gl([&](double rho) { return profile(rho) * std::pow(rho, 0.5 * d) * std::cyl_bessel_j(nu, k * rho); },
                         0.0, r, panels);
  }
  return amplitude_ * value;
}

TestFunction TestFunction::scaled(double factor) const {
  return TestFunction(shape_, center_, radius_, amplitude_ * factor);
}

TestFunction TestFunction::translated(std::span<const double> shift) const {
  Point c = center_;
  for (std::size_t i = 0; i < c.size(); ++i) c[i] += shift[i];
  return TestFunction(shape_, std::move(c), radius_, amplitude_);
}

}  // namespace stablebranch
