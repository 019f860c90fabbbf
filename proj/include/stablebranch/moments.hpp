#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "stablebranch/renewal.hpp"
#include "stablebranch/stable_motion.hpp"
#include "stablebranch/test_function.hpp"

namespace stablebranch {

/// g(w) = <phi S_w psi, Lambda> = \int phi(x) (S_w psi)(x) dx for radial test
/// functions, evaluated in Fourier space as a one-dimensional radial integral
///   (2 pi)^{-d} |S^{d-1}| \int k^{d-1} phi^(k) psi^(k) Omega_d(k |c_phi - c_psi|) exp(-w k^alpha) dk.
/// g(0) is computed in physical space.
class PairCorrelation {
 public:
  PairCorrelation(const StableKernel& kernel, const TestFunction& phi, const TestFunction& psi);

  double operator()(double w) const;
  double at_zero() const { return at_zero_; }

 private:
  double alpha_;
  std::vector<double> k_;
  std::vector<double> weight_;
  double at_zero_;
};

// \int phi psi dx.
double overlap_integral(const TestFunction& phi, const TestFunction& psi);

struct CovarianceSpec {
  const StableKernel& kernel;
  const RenewalTable& renewal;
  TestFunction phi;
  TestFunction psi;
  double s;
  double t;
};

// E <phi, J_t> = <phi, Lambda> t.
double occupation_mean(const TestFunction& phi, double t);

// Cov(<phi, X_s>, <psi, X_t>) = g(t-s) + \int_{(0,s]} g(s+t-2r) dU(r), using
// <(S_a phi)(S_b psi), Lambda> = g(a+b).
double field_covariance(const CovarianceSpec& spec);
double field_covariance(const PairCorrelation& g, const RenewalTable& renewal, double s, double t);

struct TreeMomentOptions {
  double inflation = 8.0;      // spatial box = supports inflated by inflation * t^{1/alpha}
  std::size_t panels = 96;     // Gauss panels per axis for the outer spatial grid
  std::size_t time_panels = 64;
};

// E_x[<phi, Z_s> <psi, Z_t>] for a single ancestor at x, s <= t.
double tree_second_moment(const StableKernel& kernel, const RenewalTable& renewal, std::span<const double> x, double s,
                          double t, const TestFunction& phi, const TestFunction& psi, const TreeMomentOptions& options = {});

// Var <phi, J_T> = 2 \int_0^T \int_0^v C(u, v) du dv.
double occupation_variance(const StableKernel& kernel, const RenewalTable& renewal, const TestFunction& phi, double T);

// Variance of the trapezoid-rule occupation sum on a grid of spacing `step`,
// the quantity a simulation with that observation step actually estimates.
double occupation_variance_on_grid(const StableKernel& kernel, const RenewalTable& renewal, const TestFunction& phi,
                                   double T, double step);

enum class Regime { heavy_tail, finite_mean };

class RegimeError : public std::invalid_argument {
 public:
  explicit RegimeError(const std::string& what) : std::invalid_argument(what) {}
};

// Dominant exponent of T in Var(T^{-1} <phi, J_T(1)>). `gamma` is ignored in
// the finite-mean regime.
double decay_exponent_prediction(int d, double alpha, double gamma, Regime regime);

}  // namespace stablebranch
