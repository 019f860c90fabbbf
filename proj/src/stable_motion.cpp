#include "stablebranch/stable_motion.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace stablebranch {

namespace {

constexpr double kPi = std::numbers::pi;
// exp(-x) < 1e-12 beyond this point.
constexpr double kSpectralCutoff = 27.631021115928547;

// Radial average of exp(i y.v) over |y| = k, written in terms of z = k |v|.
double sphere_average(int d, double z) {
  if (d == 1) return std::cos(z);
  if (z < 1e-8) return 1.0;
  if (d == 3) return std::sin(z) / z;
  const double nu = 0.5 * d - 1.0;
  return std::tgamma(0.5 * d) * std::pow(2.0 / z, nu) * std::cyl_bessel_j(nu, z);
}

std::size_t panel_cap(int d) {
  switch (d) {
    case 1: return 512;
    case 2: return 48;
    case 3: return 12;
    default: return 6;
  }
}

}  // namespace

double sample_positive_stable(double a, RandomStream& rng) {
  const double u = kPi * rng.uniform_open();
  const double e = rng.exponential();
  const double left = std::sin(a * u) / std::pow(std::sin(u), 1.0 / a);
  const double right = std::pow(std::sin((1.0 - a) * u) / e, (1.0 - a) / a);
  return left * right;
}

StableKernel::StableKernel(double alpha, int dim) : alpha_(alpha), dim_(dim), sub_index_(0.5 * alpha) {
  if (!(alpha > 0.0 && alpha <= 2.0)) throw std::invalid_argument("stability index alpha must lie in (0, 2]");
  if (dim < 1) throw std::invalid_argument("dimension must be >= 1");
}

double StableKernel::scale(double t) const { return std::pow(t, 1.0 / alpha_); }

void StableKernel::sample_increment(double dt, RandomStream& rng, std::span<double> out) const {
  if (!(dt > 0.0)) throw std::invalid_argument("sample_increment: elapsed time must be positive");
  double sd;
  if (alpha_ == 2.0) {
    sd = std::sqrt(2.0 * dt);
  } else {
    const double subordinator = sample_positive_stable(sub_index_, rng);
    sd = std::sqrt(2.0 * subordinator) * std::pow(dt, 1.0 / alpha_);
  }
  for (int i = 0; i < dim_; ++i) out[static_cast<std::size_t>(i)] = sd * rng.normal();
}

Point StableKernel::sample_increment(double dt, RandomStream& rng) const {
  Point out(static_cast<std::size_t>(dim_));
  sample_increment(dt, rng, out);
  return out;
}

double StableKernel::tail_constant() const {
  const double d = dim_;
  return alpha_ * std::pow(2.0, alpha_ - 1.0) * std::pow(kPi, -0.5 * d - 1.0) * std::sin(0.5 * kPi * alpha_) *
         std::tgamma(0.5 * (d + alpha_)) * std::tgamma(0.5 * alpha_);
}

double StableKernel::transition_density(double t, std::span<const double> x) const {
  double r2 = 0.0;
  for (int i = 0; i < dim_; ++i) r2 += x[static_cast<std::size_t>(i)] * x[static_cast<std::size_t>(i)];
  return radial_density(t, std::sqrt(r2));
}

double StableKernel::radial_density(double t, double r) const {
  if (!(t > 0.0)) throw std::invalid_argument("transition_density: elapsed time must be positive");
  const double d = dim_;
  if (alpha_ == 2.0) return std::pow(4.0 * kPi * t, -0.5 * d) * std::exp(-r * r / (4.0 * t));
  if (alpha_ == 1.0)
    return std::tgamma(0.5 * (d + 1.0)) / std::pow(kPi, 0.5 * (d + 1.0)) * t / std::pow(t * t + r * r, 0.5 * (d + 1.0));
  return inverted_density(t, r);
}

double StableKernel::inverted_density(double t, double r) const {
  if (!(t > 0.0)) throw std::invalid_argument("transition_density: elapsed time must be positive");
  const double d = dim_;
  if (r == 0.0)
    return std::pow(2.0 * kPi, -d) * unit_sphere_area(dim_) * std::tgamma(d / alpha_) / (alpha_ * std::pow(t, d / alpha_));

  const double k_max = std::pow(kSpectralCutoff / t, 1.0 / alpha_);
  const double width = std::min(k_max / 64.0, 0.5 * kPi / r);
  const double coarse = numeric_radial_density(t, r, width);
  const double fine = numeric_radial_density(t, r, 0.5 * width);
  const double at_zero = std::pow(2.0 * kPi, -d) * unit_sphere_area(dim_) * std::tgamma(d / alpha_) /
                         (alpha_ * std::pow(t, d / alpha_));
  if (std::abs(fine - coarse) > std::max(1e-8 * std::abs(fine), 1e-13 * at_zero))
    throw QuadratureError("transition_density: radial Fourier inversion did not converge at r=" + std::to_string(r));
  return std::max(fine, 0.0);
}

double StableKernel::numeric_radial_density(double t, double r, double panel_width) const {
  const double k_max = std::pow(kSpectralCutoff / t, 1.0 / alpha_);
  // The integrand has a k^alpha cusp at the origin; grade the first panel.
  NodeSet nodes;
  nodes.append_graded(panel_width, 24, 16);
  const auto panels = static_cast<std::size_t>(std::ceil((k_max - panel_width) / panel_width));
  if (panels > 0) nodes.append_gl(panel_width, panel_width * (1.0 + static_cast<double>(panels)), panels, 16);
  double acc = 0.0;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const double k = nodes.x[i];
    acc += nodes.w[i] * std::exp(-t * std::pow(k, alpha_)) * std::pow(k, dim_ - 1) * sphere_average(dim_, k * r);
  }
  return std::pow(2.0 * kPi, -static_cast<double>(dim_)) * unit_sphere_area(dim_) * acc;
}

double StableKernel::semigroup_apply(const TestFunction& phi, double t, std::span<const double> x) const {
  if (t < 0.0) throw std::invalid_argument("semigroup_apply: time must be nonnegative");
  if (phi.dim() != dim_) throw std::invalid_argument("semigroup_apply: dimension mismatch");
  if (t == 0.0) return phi(x);
  if (phi.is_zero()) return 0.0;
  const double r = phi.radius();
  const double s = std::max(scale(t), 1e-6);
  const auto panels = std::clamp<std::size_t>(static_cast<std::size_t>(std::ceil(4.0 * r / s)), 4, panel_cap(dim_));
  std::vector<NodeSet> axes(static_cast<std::size_t>(dim_));
  for (int i = 0; i < dim_; ++i) {
    const double c = phi.center()[static_cast<std::size_t>(i)];
    axes[static_cast<std::size_t>(i)].append_gl(c - r, c + r, panels, 8);
  }
  Point diff(static_cast<std::size_t>(dim_));
  double total = 0.0;
  for_each_tensor_node(std::span<const NodeSet>(axes), [&](std::span<const double> y, double w) {
    const double f = phi(y);
    if (f == 0.0) return;
    for (int i = 0; i < dim_; ++i) diff[static_cast<std::size_t>(i)] = x[static_cast<std::size_t>(i)] - y[static_cast<std::size_t>(i)];
    total += w * f * transition_density(t, diff);
  });
  if (!std::isfinite(total)) throw QuadratureError("semigroup_apply: non-finite quadrature result");
  return total;
}

double StableKernel::convolve(double t, std::span<const double> x, const std::function<double(std::span<const double>)>& f,
                              std::span<const double> lo, std::span<const double> hi, std::size_t panels) const {
  std::vector<NodeSet> axes(static_cast<std::size_t>(dim_));
  for (int i = 0; i < dim_; ++i)
    axes[static_cast<std::size_t>(i)].append_gl(lo[static_cast<std::size_t>(i)], hi[static_cast<std::size_t>(i)], panels, 8);
  Point diff(static_cast<std::size_t>(dim_));
  double total = 0.0;
  for_each_tensor_node(std::span<const NodeSet>(axes), [&](std::span<const double> y, double w) {
    const double v = f(y);
    if (v == 0.0) return;
    for (int i = 0; i < dim_; ++i) diff[static_cast<std::size_t>(i)] = x[static_cast<std::size_t>(i)] - y[static_cast<std::size_t>(i)];
    total += w * v * transition_density(t, diff);
  });
  return total;
}

}  // namespace stablebranch
