#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <variant>

#include "stablebranch/random_stream.hpp"

namespace stablebranch {

struct Exponential {
  double rate;
};

struct GammaLaw {
  double shape;
  double rate;
};

// F(u) = 1 - (1 + u/c)^{-gamma}. With c = Gamma(1-gamma)^{-1/gamma} the tail
// satisfies u^gamma Gamma(1-gamma) (1 - F(u)) -> 1.
struct ParetoTail {
  double gamma;
  double scale;
};

class DomainError : public std::domain_error {
 public:
  explicit DomainError(const std::string& what) : std::domain_error(what) {}
};

/// Lifetime distribution F of a particle. Immutable value type.
class LifetimeLaw {
 public:
  using Variant = std::variant<Exponential, GammaLaw, ParetoTail>;

  static LifetimeLaw exponential(double rate);
  static LifetimeLaw gamma(double shape, double rate);
  // Shifted Pareto with the tail normalization above.
  static LifetimeLaw pareto_tail(double gamma);
  static LifetimeLaw pareto_tail(double gamma, double scale);

  double cdf(double u) const;
  double survival(double u) const;  // 1 - F(u)
  double density(double u) const;
  // f(u) / (1 - F(u)); throws DomainError where 1 - F(u) underflows.
  double hazard(double u) const;
  // Inverse of F on (0, 1).
  double quantile(double p) const;

  double sample(RandomStream& rng) const;
  // Remaining lifetime of a particle that has already survived to `age`.
  double sample_residual(double age, RandomStream& rng) const;

  // Exact mean, or nullopt when the mean is infinite.
  std::optional<double> mean() const;

  const Variant& variant() const { return law_; }
  std::string name() const;
  std::string describe() const;

 private:
  explicit LifetimeLaw(Variant law) : law_(law) {}
  Variant law_;
};

LifetimeLaw make_pareto_tail(double gamma);
inline double sample_lifetime(const LifetimeLaw& law, RandomStream& rng) { return law.sample(rng); }
inline double hazard(const LifetimeLaw& law, double u) { return law.hazard(u); }
inline std::optional<double> mean_lifetime(const LifetimeLaw& law) { return law.mean(); }

// \int_0^cutoff hazard(u) f(u) du, the age-weighted branching intensity.
double hazard_moment(const LifetimeLaw& law, double cutoff);

}  // namespace stablebranch
