#include "stablebranch/renewal.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace stablebranch {

namespace {

std::vector<double> solve_renewal(const LifetimeLaw& law, std::size_t n, double step) {
  // a[j] = (F(t_j) - F(t_{j-1})) / 2, a[0] = 0.
  std::vector<double> a(n + 2, 0.0);
  double prev = 0.0;
  for (std::size_t j = 1; j <= n + 1; ++j) {
    const double cur = law.cdf(step * static_cast<double>(j));
    a[j] = 0.5 * (cur - prev);
    prev = cur;
  }
  // Coefficient of U_m in the equation for U_n is b[n-m] = a[n-m+1] + a[n-m].
  std::vector<double> b(n + 1);
  for (std::size_t k = 0; k <= n; ++k) b[k] = a[k + 1] + a[k];

  std::vector<double> u(n + 1);
  u[0] = 1.0;
  const double denom = 1.0 - a[1];
  for (std::size_t i = 1; i <= n; ++i) {
    double acc = 1.0 + a[i] * u[0];
    const double* bk = b.data() + i;  // b[i - m] for m = 1..i-1
    for (std::size_t m = 1; m < i; ++m) acc += bk[-static_cast<std::ptrdiff_t>(m)] * u[m];
    u[i] = acc / denom;
  }
  return u;
}

}  // namespace

RenewalTable::RenewalTable(LifetimeLaw law, double step, std::vector<double> values, double error_estimate)
    : law_(std::move(law)), step_(step), values_(std::move(values)), error_estimate_(error_estimate) {
  if (error_estimate_ > 0.01) {
    std::ostringstream os;
    os << "renewal table: estimated discretization error " << error_estimate_ * 100.0
       << "% exceeds 1%; reduce the grid step";
    warning_ = os.str();
  }
}

double RenewalTable::operator()(double t) const {
  if (t < 0.0) return 0.0;
  const double pos = t / step_;
  const auto i = static_cast<std::size_t>(pos);
  if (i >= values_.size() - 1) {
    if (t <= horizon() * (1.0 + 1e-12)) return values_.back();
    throw std::out_of_range("renewal table: time beyond horizon");
  }
  const double frac = pos - static_cast<double>(i);
  return values_[i] + frac * (values_[i + 1] - values_[i]);
}

RenewalTable build_renewal(const LifetimeLaw& law, double horizon, double grid_step) {
  if (!(grid_step > 0.0)) throw std::invalid_argument("build_renewal: grid step must be positive");
  if (!(horizon >= grid_step)) throw std::invalid_argument("build_renewal: horizon must be at least one grid step");
  const auto n = static_cast<std::size_t>(std::ceil(horizon / grid_step - 1e-9));
  std::vector<double> fine = solve_renewal(law, n, grid_step);
  double error = 0.0;
  if (n >= 4) {
    const std::size_t half = n / 2;
    std::vector<double> coarse = solve_renewal(law, half, 2.0 * grid_step);
    error = std::abs(fine[2 * half] - coarse[half]) / (3.0 * fine[2 * half]);
    // Richardson step: the trapezoid error is O(h^2) and varies slowly in t, so
    // the correction known at even nodes is interpolated to odd ones.
    std::vector<double> corr(n + 1, 0.0);
    for (std::size_t k = 0; k <= half; ++k) corr[2 * k] = (fine[2 * k] - coarse[k]) / 3.0;
    for (std::size_t i = 1; i <= n; i += 2)
      corr[i] = i + 1 <= 2 * half ? 0.5 * (corr[i - 1] + corr[i + 1]) : 1.5 * corr[i - 1] - 0.5 * corr[i - 3];
    for (std::size_t i = 0; i <= n; ++i) fine[i] += corr[i];
  }
  return RenewalTable(law, grid_step, std::move(fine), error);
}

double RenewalDiagnostic::relative_gap() const { return std::abs(limit_estimate - expected) / expected; }

RenewalDiagnostic elementary_renewal_check(const RenewalTable& table) {
  const auto mu = table.law().mean();
  if (!mu) throw DomainError("elementary_renewal_check: lifetime law has infinite mean");
  return {table.values().back() / table.horizon(), 1.0 / *mu};
}

double renewal_measure_integral(const RenewalTable& table, const std::function<double(double)>& g, double s) {
  if (s < 0.0) throw std::invalid_argument("renewal_measure_integral: s must be nonnegative");
  if (s > table.horizon() * (1.0 + 1e-12)) throw std::out_of_range("renewal_measure_integral: s beyond table horizon");
  const double h = table.step();
  const auto& u = table.values();
  const auto full = static_cast<std::size_t>(std::floor(s / h + 1e-12));
  double total = 0.0;
  for (std::size_t j = 1; j <= full && j < u.size(); ++j) {
    const double du = u[j] - u[j - 1];
    if (du != 0.0) total += g(h * (static_cast<double>(j) - 0.5)) * du;
  }
  const double lo = h * static_cast<double>(full);
  if (s - lo > 1e-12 * h && full + 1 < u.size()) {
    const double du = table(s) - u[full];
    total += g(0.5 * (lo + s)) * du;
  }
  return total;
}

}  // namespace stablebranch
