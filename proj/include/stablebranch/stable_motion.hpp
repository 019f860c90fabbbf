#pragma once

#include <functional>
#include <span>

#include "stablebranch/quadrature.hpp"
#include "stablebranch/random_stream.hpp"
#include "stablebranch/test_function.hpp"

namespace stablebranch {

/// Spherically symmetric alpha-stable motion in R^d, normalized so that the
/// increment over elapsed time t has characteristic function exp(-t |y|^alpha).
/// For alpha = 2 this is Brownian motion with generator Laplacian, i.e.
/// per-coordinate variance 2t.
///
/// Immutable; safe to share across threads.
class StableKernel {
 public:
  StableKernel(double alpha, int dim);

  double alpha() const { return alpha_; }
  int dim() const { return dim_; }

  // Writes B_dt - B_0 into `out` (size dim). Uses Brownian subordination for
  // alpha < 2: a Gaussian vector at an independent (alpha/2)-stable time.
  void sample_increment(double dt, RandomStream& rng, std::span<double> out) const;
  Point sample_increment(double dt, RandomStream& rng) const;

  // p_t(0, x). Closed form for alpha in {1, 2}; otherwise radial Fourier inversion.
  double transition_density(double t, std::span<const double> x) const;
  double radial_density(double t, double r) const;
  // Always by radial Fourier inversion, bypassing the closed forms.
  double inverted_density(double t, double r) const;

  // (S_t phi)(x) by quadrature over the support of phi.
  double semigroup_apply(const TestFunction& phi, double t, std::span<const double> x) const;

  // \int p_t(x - y) f(y) dy over the box [lo, hi] with `panels` Gauss panels per axis.
  double convolve(double t, std::span<const double> x, const std::function<double(std::span<const double>)>& f,
                  std::span<const double> lo, std::span<const double> hi, std::size_t panels) const;

  // Characteristic length of the motion over time t: t^{1/alpha}.
  double scale(double t) const;
  // C such that p_1(r) ~ C r^{-d-alpha} as r -> infinity (alpha < 2).
  double tail_constant() const;

 private:
  double numeric_radial_density(double t, double r, double panel_width) const;

  double alpha_;
  int dim_;
  double sub_index_;  // alpha / 2
};

// Positive (a)-stable variate with Laplace transform exp(-lambda^a), 0 < a < 1
// (Kanter's representation of the Chambers-Mallows-Stuck transform).
double sample_positive_stable(double a, RandomStream& rng);

}  // namespace stablebranch
