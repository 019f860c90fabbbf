#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace stablebranch {

struct SampleSummary {
  std::size_t n = 0;
  double mean = 0.0;
  double variance = 0.0;       // unbiased
  double standard_error = 0.0; // of the mean
  double variance_se = 0.0;    // of the unbiased variance estimate (fourth-moment formula)
};

SampleSummary summarize(std::span<const double> xs);

struct CovarianceEstimate {
  double value;
  double standard_error;
};

// Sample covariance with a standard error from the spread of centered products.
CovarianceEstimate sample_covariance(std::span<const double> a, std::span<const double> b);

// Two-sample Kolmogorov-Smirnov statistic sup |F_a - F_b|.
double ks_statistic(std::vector<double> a, std::vector<double> b);
// Asymptotic critical value c(level) sqrt((n+m)/(n m)); level in {0.1, 0.05, 0.01, 0.001}.
double ks_critical_value(std::size_t n, std::size_t m, double level);

// Ordinary least-squares slope of y on x.
double ols_slope(std::span<const double> x, std::span<const double> y);

double z_score(double estimate, double target, double standard_error);

}  // namespace stablebranch
