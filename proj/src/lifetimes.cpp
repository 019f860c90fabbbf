#include "stablebranch/lifetimes.hpp"

#include <boost/math/special_functions/gamma.hpp>
#include <cmath>
#include <limits>
#include <sstream>

#include "stablebranch/quadrature.hpp"

namespace stablebranch {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

void require_positive(double v, const char* what) {
  if (!(v > 0.0) || !std::isfinite(v)) throw std::invalid_argument(std::string(what) + " must be positive and finite");
}

}  // namespace

LifetimeLaw LifetimeLaw::exponential(double rate) {
  require_positive(rate, "exponential rate");
  return LifetimeLaw(Exponential{rate});
}

LifetimeLaw LifetimeLaw::gamma(double shape, double rate) {
  require_positive(shape, "gamma shape");
  require_positive(rate, "gamma rate");
  return LifetimeLaw(GammaLaw{shape, rate});
}

LifetimeLaw LifetimeLaw::pareto_tail(double gamma) {
  if (!(gamma > 0.0 && gamma < 1.0)) throw std::invalid_argument("pareto tail exponent gamma must lie in (0, 1)");
  return pareto_tail(gamma, std::pow(std::tgamma(1.0 - gamma), -1.0 / gamma));
}

LifetimeLaw LifetimeLaw::pareto_tail(double gamma, double scale) {
  if (!(gamma > 0.0 && gamma < 1.0)) throw std::invalid_argument("pareto tail exponent gamma must lie in (0, 1)");
  require_positive(scale, "pareto scale");
  return LifetimeLaw(ParetoTail{gamma, scale});
}

LifetimeLaw make_pareto_tail(double gamma) { return LifetimeLaw::pareto_tail(gamma); }

double LifetimeLaw::cdf(double u) const {
  if (u <= 0.0) return 0.0;
  return std::visit(overloaded{
                        [&](const Exponential& e) { return -std::expm1(-e.rate * u); },
                        [&](const GammaLaw& g) { return boost::math::gamma_p(g.shape, g.rate * u); },
                        [&](const ParetoTail& p) { return -std::expm1(-p.gamma * std::log1p(u / p.scale)); },
                    },
                    law_);
}

double LifetimeLaw::survival(double u) const {
  if (u <= 0.0) return 1.0;
  return std::visit(overloaded{
                        [&](const Exponential& e) { return std::exp(-e.rate * u); },
                        [&](const GammaLaw& g) { return boost::math::gamma_q(g.shape, g.rate * u); },
                        [&](const ParetoTail& p) { return std::exp(-p.gamma * std::log1p(u / p.scale)); },
                    },
                    law_);
}

double LifetimeLaw::density(double u) const {
  if (u < 0.0) return 0.0;
  return std::visit(overloaded{
                        [&](const Exponential& e) { return e.rate * std::exp(-e.rate * u); },
                        [&](const GammaLaw& g) {
                          if (u == 0.0) return g.shape == 1.0 ? g.rate : (g.shape < 1.0 ? std::numeric_limits<double>::infinity() : 0.0);
                          return g.rate * boost::math::gamma_p_derivative(g.shape, g.rate * u);
                        },
                        [&](const ParetoTail& p) {
                          return p.gamma / p.scale * std::exp(-(p.gamma + 1.0) * std::log1p(u / p.scale));
                        },
                    },
                    law_);
}

double LifetimeLaw::hazard(double u) const {
  if (u < 0.0) throw std::invalid_argument("hazard: age must be nonnegative");
  return std::visit(overloaded{
                        [&](const Exponential& e) { return e.rate; },
                        [&](const GammaLaw&) {
                          const double s = survival(u);
                          if (!(s > std::numeric_limits<double>::min()))
                            throw DomainError("hazard: survival function is zero to machine precision");
                          return density(u) / s;
                        },
                        [&](const ParetoTail& p) { return p.gamma / (p.scale + u); },
                    },
                    law_);
}

double LifetimeLaw::quantile(double prob) const {
  if (!(prob >= 0.0 && prob < 1.0)) throw std::invalid_argument("quantile: probability must lie in [0, 1)");
  return std::visit(overloaded{
                        [&](const Exponential& e) { return -std::log1p(-prob) / e.rate; },
                        [&](const GammaLaw& g) { return prob == 0.0 ? 0.0 : boost::math::gamma_p_inv(g.shape, prob) / g.rate; },
                        [&](const ParetoTail& p) { return p.scale * std::expm1(-std::log1p(-prob) / p.gamma); },
                    },
                    law_);
}

double LifetimeLaw::sample(RandomStream& rng) const {
  return std::visit(overloaded{
                        [&](const Exponential& e) { return rng.exponential() / e.rate; },
                        [&](const GammaLaw& g) { return boost::math::gamma_q_inv(g.shape, rng.uniform_open()) / g.rate; },
                        [&](const ParetoTail& p) { return p.scale * std::expm1(-std::log(rng.uniform_open()) / p.gamma); },
                    },
                    law_);
}

double LifetimeLaw::sample_residual(double age, RandomStream& rng) const {
  if (age <= 0.0) return sample(rng);
  return std::visit(overloaded{
                        [&](const Exponential& e) { return rng.exponential() / e.rate; },
                        [&](const GammaLaw& g) {
                          // Q(total) = Q(age) * V with V uniform on (0, 1).
                          const double q = boost::math::gamma_q(g.shape, g.rate * age) * rng.uniform_open();
                          if (!(q > 0.0)) return 0.0;
                          return std::max(boost::math::gamma_q_inv(g.shape, q) / g.rate - age, 0.0);
                        },
                        [&](const ParetoTail& p) {
                          const double total = p.scale * ((1.0 + age / p.scale) * std::pow(rng.uniform_open(), -1.0 / p.gamma) - 1.0);
                          return std::max(total - age, 0.0);
                        },
                    },
                    law_);
}

std::optional<double> LifetimeLaw::mean() const {
  return std::visit(overloaded{
                        [](const Exponential& e) -> std::optional<double> { return 1.0 / e.rate; },
                        [](const GammaLaw& g) -> std::optional<double> { return g.shape / g.rate; },
                        [](const ParetoTail&) -> std::optional<double> { return std::nullopt; },
                    },
                    law_);
}

std::string LifetimeLaw::name() const {
  return std::visit(overloaded{
                        [](const Exponential&) { return std::string("exponential"); },
                        [](const GammaLaw&) { return std::string("gamma"); },
                        [](const ParetoTail&) { return std::string("pareto_tail"); },
                    },
                    law_);
}

std::string LifetimeLaw::describe() const {
  std::ostringstream os;
  os.precision(10);
  std::visit(overloaded{
                 [&](const Exponential& e) { os << "exponential(rate=" << e.rate << ")"; },
                 [&](const GammaLaw& g) { os << "gamma(shape=" << g.shape << ",rate=" << g.rate << ")"; },
                 [&](const ParetoTail& p) { os << "pareto_tail(gamma=" << p.gamma << ",scale=" << p.scale << ")"; },
             },
             law_);
  return os.str();
}

double hazard_moment(const LifetimeLaw& law, double cutoff) {
  // Integrate in log(1+u) so that the power-law tail is resolved uniformly.
  const double top = std::log1p(cutoff);
  auto integrand = [&](double v) {
    const double u = std::expm1(v);
    const double s = law.survival(u);
    if (!(s > 0.0)) return 0.0;
    const double f = law.density(u);
    return f * f / s * (1.0 + u);
  };
  return integrate_gl(integrand, 0.0, top, 256, 16);
}

}  // namespace stablebranch
