#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

// sup |F_n - F| for a sample against a continuous CDF.
template <class Cdf>
double ks_one_sample(std::vector<double> xs, Cdf cdf) {
  std::sort(xs.begin(), xs.end());
  const double n = static_cast<double>(xs.size());
  double d = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double f = cdf(xs[i]);
    d = std::max({d, std::abs(static_cast<double>(i + 1) / n - f), std::abs(f - static_cast<double>(i) / n)});
  }
  return d;
}

// Asymptotic one-sample critical value at level 0.01.
inline double ks_one_sample_critical_01(std::size_t n) { return 1.628 / std::sqrt(static_cast<double>(n)); }
