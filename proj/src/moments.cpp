#include "stablebranch/moments.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace stablebranch {

namespace {

constexpr double kPi = std::numbers::pi;

double sphere_average(int d, double z) {
  if (d == 1) return std::cos(z);
  if (z < 1e-8) return 1.0;
  if (d == 3) return std::sin(z) / z;
  const double nu = 0.5 * d - 1.0;
  return std::tgamma(0.5 * d) * std::pow(2.0 / z, nu) * std::cyl_bessel_j(nu, z);
}

double center_distance(const TestFunction& a, const TestFunction& b) {
  double r2 = 0.0;
  for (std::size_t i = 0; i < a.center().size(); ++i) {
    const double dx = a.center()[i] - b.center()[i];
    r2 += dx * dx;
  }
  return std::sqrt(r2);
}

// Uniform table of a function on [0, top] with linear interpolation.
struct Table {
  double step;
  std::vector<double> v;
  double operator()(double x) const {
    const double pos = std::max(x, 0.0) / step;
    const auto i = static_cast<std::size_t>(pos);
    if (i + 1 >= v.size()) return v.back();
    const double f = pos - static_cast<double>(i);
    return v[i] + f * (v[i + 1] - v[i]);
  }
};

Table tabulate(const PairCorrelation& g, double top, double step) {
  const auto n = static_cast<std::size_t>(std::ceil(top / step)) + 1;
  Table tab{step, std::vector<double>(n + 1)};
  for (std::size_t i = 0; i <= n; ++i) tab.v[i] = g(step * static_cast<double>(i));
  return tab;
}

void check_dims(const StableKernel& kernel, const TestFunction& phi, const TestFunction& psi) {
  if (phi.dim() != kernel.dim() || psi.dim() != kernel.dim())
    throw std::invalid_argument("moment analytics: dimension mismatch between kernel and test functions");
}

}  // namespace

double overlap_integral(const TestFunction& phi, const TestFunction& psi) {
  const int d = phi.dim();
  if (phi.is_zero() || psi.is_zero()) return 0.0;
  const double dist = center_distance(phi, psi);
  if (dist > phi.radius() + psi.radius()) return 0.0;
  if (dist == 0.0) {
    const double top = std::min(phi.radius(), psi.radius());
    return unit_sphere_area(d) *
           integrate_gl([&](double rho) { return phi.radial(rho) * psi.radial(rho) * std::pow(rho, d - 1); }, 0.0, top,
                        32, 16);
  }
  const std::size_t panels = d == 1 ? 64 : (d == 2 ? 32 : (d == 3 ? 16 : 6));
  std::vector<NodeSet> axes(static_cast<std::size_t>(d));
  for (int i = 0; i < d; ++i) {
    const double c = phi.center()[static_cast<std::size_t>(i)];
    axes[static_cast<std::size_t>(i)].append_gl(c - phi.radius(), c + phi.radius(), panels, 8);
  }
  double total = 0.0;
  for_each_tensor_node(std::span<const NodeSet>(axes),
                       [&](std::span<const double> y, double w) { total += w * phi(y) * psi(y); });
  return total;
}

PairCorrelation::PairCorrelation(const StableKernel& kernel, const TestFunction& phi, const TestFunction& psi)
    : alpha_(kernel.alpha()) {
  check_dims(kernel, phi, psi);
  const int d = kernel.dim();
  at_zero_ = overlap_integral(phi, psi);
  if (phi.is_zero() || psi.is_zero()) return;
  const double dist = center_distance(phi, psi);
  const double r_min = std::min(phi.radius(), psi.radius());
  const double r_max = std::max({phi.radius(), psi.radius(), dist});
  const bool smooth = phi.shape() == Shape::bump && psi.shape() == Shape::bump;
  const double k_top = (smooth ? 400.0 : 4000.0) / r_min;
  const double width = 0.25 * kPi / r_max;
  NodeSet nodes;
  nodes.append_graded(width, 40, 16);
  const auto panels = static_cast<std::size_t>(std::ceil(k_top / width));
  nodes.append_gl(width, width * (1.0 + static_cast<double>(panels)), panels, 8);
  const double norm = std::pow(2.0 * kPi, -static_cast<double>(d)) * unit_sphere_area(d);
  k_.reserve(nodes.size());
  weight_.reserve(nodes.size());
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const double k = nodes.x[i];
    const double w = nodes.w[i] * norm * std::pow(k, d - 1) * phi.fourier_radial(k) * psi.fourier_radial(k) *
                     sphere_average(d, k * dist);
    k_.push_back(std::pow(k, alpha_));
    weight_.push_back(w);
  }
}

double PairCorrelation::operator()(double w) const {
  if (w < 0.0) throw std::invalid_argument("pair correlation: w must be nonnegative");
  if (w == 0.0) return at_zero_;
  double acc = 0.0;
  for (std::size_t i = 0; i < k_.size(); ++i) {
    const double e = w * k_[i];
    if (e > 45.0) break;
    acc += weight_[i] * std::exp(-e);
  }
  return acc;
}

double occupation_mean(const TestFunction& phi, double t) {
  if (t < 0.0) throw std::invalid_argument("occupation_mean: t must be nonnegative");
  return phi.lebesgue_integral() * t;
}

double field_covariance(const PairCorrelation& g, const RenewalTable& renewal, double s, double t) {
  if (s < 0.0 || t < s) throw std::invalid_argument("field_covariance: require 0 <= s <= t");
  if (s > renewal.horizon() * (1.0 + 1e-12)) throw std::out_of_range("field_covariance: s beyond renewal horizon");
  double value = g(t - s);
  if (s > 0.0) value += renewal_measure_integral(renewal, [&](double r) { return g(std::max(s + t - 2.0 * r, 0.0)); }, s);
  return value;
}

double field_covariance(const CovarianceSpec& spec) {
  PairCorrelation g(spec.kernel, spec.phi, spec.psi);
  return field_covariance(g, spec.renewal, spec.s, spec.t);
}

double tree_second_moment(const StableKernel& kernel, const RenewalTable& renewal, std::span<const double> x, double s,
                          double t, const TestFunction& phi, const TestFunction& psi, const TreeMomentOptions& options) {
  check_dims(kernel, phi, psi);
  if (s < 0.0 || t < s) throw std::invalid_argument("tree_second_moment: require 0 <= s <= t");
  if (s > renewal.horizon() * (1.0 + 1e-12)) throw std::out_of_range("tree_second_moment: s beyond renewal horizon");
  const int d = kernel.dim();
  const auto du = static_cast<std::size_t>(d);

  // Ancestral line: E_x[phi(B_s) psi(B_t)] = \int p_s(y - x) phi(y) (S_{t-s} psi)(y) dy.
  double line;
  if (s == 0.0) {
    line = phi(x) * kernel.semigroup_apply(psi, t, x);
  } else {
    Point lo(du), hi(du);
    for (std::size_t i = 0; i < du; ++i) {
      lo[i] = phi.center()[i] - phi.radius();
      hi[i] = phi.center()[i] + phi.radius();
    }
    const std::size_t panels = std::max<std::size_t>(8, options.panels / 4);
    line = kernel.convolve(
        s, x,
        [&](std::span<const double> y) {
          const double f = phi(y);
          return f == 0.0 ? 0.0 : f * kernel.semigroup_apply(psi, t - s, y);
        },
        lo, hi, panels);
  }
  if (s == 0.0 || phi.is_zero() || psi.is_zero()) return line;

  // Branching term: \int_{(0,s]} S_r[(S_{s-r} phi)(S_{t-r} psi)](x) dU(r).
  Point lo(du), hi(du);
  const double reach = options.inflation * kernel.scale(t);
  for (std::size_t i = 0; i < du; ++i) {
    lo[i] = std::min(phi.center()[i] - phi.radius(), psi.center()[i] - psi.radius()) - reach;
    hi[i] = std::max(phi.center()[i] + phi.radius(), psi.center()[i] + psi.radius()) + reach;
  }
  double branching = 0.0;
  const double h = s / static_cast<double>(options.time_panels);
  for (std::size_t m = 0; m < options.time_panels; ++m) {
    const double r_lo = h * static_cast<double>(m);
    const double r_hi = r_lo + h;
    const double mass = renewal(r_hi) - renewal(r_lo);
    if (mass == 0.0) continue;
    const double r = 0.5 * (r_lo + r_hi);
    const double value = kernel.convolve(
        r, x,
        [&](std::span<const double> y) {
          const double a = kernel.semigroup_apply(phi, s - r, y);
          if (a == 0.0) return 0.0;
          return a * kernel.semigroup_apply(psi, t - r, y);
        },
        lo, hi, options.panels);
    branching += value * mass;
  }
  return line + branching;
}

double occupation_variance(const StableKernel& kernel, const RenewalTable& renewal, const TestFunction& phi, double T) {
  if (T < 0.0) throw std::invalid_argument("occupation_variance: T must be nonnegative");
  if (T > renewal.horizon() * (1.0 + 1e-12)) throw std::out_of_range("occupation_variance: T beyond renewal horizon");
  if (T == 0.0 || phi.is_zero()) return 0.0;
  const PairCorrelation g(kernel, phi, phi);
  const double step = std::max(renewal.step(), 2.0 * T / 20000.0);
  const Table gt = tabulate(g, 2.0 * T, step);
  const std::size_t n = gt.v.size();

  // Cumulative integrals G0(S) = \int_0^S g, G1(S) = \int_0^S w g(w) dw.
  Table g0{step, std::vector<double>(n, 0.0)}, g1{step, std::vector<double>(n, 0.0)};
  for (std::size_t i = 1; i < n; ++i) {
    const double w0 = step * static_cast<double>(i - 1), w1 = step * static_cast<double>(i);
    g0.v[i] = g0.v[i - 1] + 0.5 * step * (gt.v[i - 1] + gt.v[i]);
    g1.v[i] = g1.v[i - 1] + 0.5 * step * (w0 * gt.v[i - 1] + w1 * gt.v[i]);
  }
  // Non-branching part: 2 \int_0^T (T - w) g(w) dw.
  const double line = 2.0 * (T * g0(T) - g1(T));
  // Branching part: 2 \int_{(0,T]} H(T - r) dU(r) with
  // H(S) = \int_0^S (w/2) g + \int_S^{2S} (S - w/2) g.
  auto H = [&](double S) {
    return 0.5 * g1(S) + S * (g0(2.0 * S) - g0(S)) - 0.5 * (g1(2.0 * S) - g1(S));
  };
  const double branching = 2.0 * renewal_measure_integral(renewal, [&](double r) { return H(std::max(T - r, 0.0)); }, T);
  return line + branching;
}

double occupation_variance_on_grid(const StableKernel& kernel, const RenewalTable& renewal, const TestFunction& phi,
                                   double T, double step) {
  if (!(step > 0.0)) throw std::invalid_argument("occupation_variance_on_grid: step must be positive");
  if (T > renewal.horizon() * (1.0 + 1e-12)) throw std::out_of_range("occupation_variance_on_grid: T beyond renewal horizon");
  const auto n = static_cast<std::size_t>(std::floor(T / step + 1e-9));
  if (n == 0 || phi.is_zero()) return 0.0;
  const PairCorrelation g(kernel, phi, phi);
  const double table_step = std::max(renewal.step(), 2.0 * T / 20000.0);
  const Table gt = tabulate(g, 2.0 * T, table_step);
  std::vector<double> w(n + 1, step);
  w.front() = w.back() = 0.5 * step;
  double total = 0.0;
  for (std::size_t i = 0; i <= n; ++i) {
    const double a = step * static_cast<double>(i);
    for (std::size_t j = i; j <= n; ++j) {
      const double b = step * static_cast<double>(j);
      double c = j == i ? g.at_zero() : gt(b - a);
      if (i > 0) c += renewal_measure_integral(renewal, [&](double r) { return gt(a + b - 2.0 * r); }, a);
      total += (i == j ? 1.0 : 2.0) * w[i] * w[j] * c;
    }
  }
  return total;
}

double decay_exponent_prediction(int d, double alpha, double gamma, Regime regime) {
  if (d < 1 || !(alpha > 0.0 && alpha <= 2.0)) throw RegimeError("decay_exponent_prediction: invalid (d, alpha)");
  const double ratio = d / alpha;
  if (regime == Regime::finite_mean) {
    if (!(d > alpha)) throw RegimeError("finite-mean regime requires d > alpha");
    return std::max({-1.0, -ratio, 1.0 - ratio});
  }
  if (!(gamma > 0.0 && gamma < 1.0)) throw RegimeError("heavy-tail regime requires gamma in (0, 1)");
  if (!(d > alpha * gamma)) throw RegimeError("heavy-tail regime requires alpha*gamma < d");
  if (!(d < 2.0 * alpha)) throw RegimeError("heavy-tail decay prediction requires d < 2*alpha");
  return std::max({-2.0, -1.0, -ratio, gamma - ratio});
}

}  // namespace stablebranch
