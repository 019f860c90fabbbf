#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "stablebranch/lifetimes.hpp"

namespace stablebranch {

/// Renewal function U(r) = sum_{k>=0} F^{*k}(r) tabulated on 0, step, 2 step, ...
/// values()[0] == 1 is the unit atom of F^{*0}.
class RenewalTable {
 public:
  RenewalTable(LifetimeLaw law, double step, std::vector<double> values, double error_estimate);

  double step() const { return step_; }
  double horizon() const { return step_ * static_cast<double>(values_.size() - 1); }
  const std::vector<double>& values() const { return values_; }
  const LifetimeLaw& law() const { return law_; }

  // Linear interpolation; throws beyond the horizon.
  double operator()(double t) const;

  // Relative change of U(horizon) against a build with twice the step,
  // divided by 3 (second-order Richardson estimate).
  double error_estimate() const { return error_estimate_; }
  // Non-empty when the error estimate exceeds 1%.
  const std::string& warning() const { return warning_; }

 private:
  LifetimeLaw law_;
  double step_;
  std::vector<double> values_;
  double error_estimate_;
  std::string warning_;
};

// Solves U = 1 + F*U on the grid by forward substitution with trapezoidal
// Stieltjes weights, then applies one Richardson step against the solution on
// the doubled grid. error_estimate() refers to the unextrapolated solution and
// is therefore conservative.
RenewalTable build_renewal(const LifetimeLaw& law, double horizon, double grid_step);

struct RenewalDiagnostic {
  double limit_estimate;  // U(horizon) / horizon
  double expected;        // 1 / mu
  double relative_gap() const;
};

// Elementary renewal theorem check; throws DomainError for infinite-mean laws.
RenewalDiagnostic elementary_renewal_check(const RenewalTable& table);

// \int_{(0,s]} g(r) dU(r), i.e. against the expected renewal count measure
// with the unit atom at r = 0 excluded. Interval midpoints are used so g is
// never evaluated at r = 0.
double renewal_measure_integral(const RenewalTable& table, const std::function<double(double)>& g, double s);

}  // namespace stablebranch
