#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"
#include "stablebranch/experiment.hpp"

namespace stablebranch {

using nlohmann::json;

std::string to_string(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::lln_heavy_intermediate: return "lln_heavy_intermediate";
    case ExperimentKind::lln_heavy_large_d: return "lln_heavy_large_d";
    case ExperimentKind::lln_finite_mean: return "lln_finite_mean";
    case ExperimentKind::occupancy_subcritical: return "occupancy_subcritical";
    case ExperimentKind::validation: return "validation";
  }
  return "unknown";
}

ExperimentKind parse_experiment_kind(const std::string& s) {
  for (auto k : {ExperimentKind::lln_heavy_intermediate, ExperimentKind::lln_heavy_large_d, ExperimentKind::lln_finite_mean,
                 ExperimentKind::occupancy_subcritical, ExperimentKind::validation})
    if (to_string(k) == s) return k;
  throw ConfigError("unknown experiment kind '" + s + "'");
}

TestFunction FunctionSpec::build(int dim) const {
  Point c = center.empty() ? Point(static_cast<std::size_t>(dim), 0.0) : center;
  if (static_cast<int>(c.size()) != dim) throw ConfigError("test function center has the wrong dimension");
  return shape == Shape::bump ? TestFunction::bump(c, radius, amplitude) : TestFunction::indicator_ball(c, radius, amplitude);
}

SimConfig ExperimentConfig::sim_config(double horizon) const {
  SimConfig sc(kernel(), law);
  sc.window_half_side = window_half_side;
  sc.boundary = boundary;
  sc.obs_step = obs_step;
  sc.horizon = horizon;
  sc.population_cap = population_cap;
  sc.seed = seed;
  sc.initial_age = initial_age;
  sc.intensity = intensity;
  sc.two_offspring_probability = two_offspring_probability;
  return sc;
}

double ExperimentConfig::max_horizon() const {
  double m = 0.0;
  for (double t : t_ladder) m = std::max(m, t);
  return m;
}

namespace {

void reject_unknown(const json& j, const std::set<std::string>& allowed, const std::string& where) {
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!allowed.count(it.key())) throw ConfigError("unknown key '" + it.key() + "' in " + where);
}

LifetimeLaw law_from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("law must be an object");
  const std::string type = j.at("type").get<std::string>();
  try {
    if (type == "exponential") {
      reject_unknown(j, {"type", "rate"}, "law");
      return LifetimeLaw::exponential(j.value("rate", 1.0));
    }
    if (type == "gamma") {
      reject_unknown(j, {"type", "shape", "rate"}, "law");
      return LifetimeLaw::gamma(j.at("shape").get<double>(), j.at("rate").get<double>());
    }
    if (type == "pareto_tail") {
      reject_unknown(j, {"type", "gamma", "scale"}, "law");
      if (j.contains("scale")) return LifetimeLaw::pareto_tail(j.at("gamma").get<double>(), j.at("scale").get<double>());
      return LifetimeLaw::pareto_tail(j.at("gamma").get<double>());
    }
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("invalid law parameters: ") + e.what());
  }
  throw ConfigError("unknown law type '" + type + "'");
}

FunctionSpec function_from_json(const json& j, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + " must be an object");
  reject_unknown(j, {"shape", "radius", "amplitude", "center"}, where);
  FunctionSpec f;
  const std::string shape = j.value("shape", std::string(where == "ball" ? "indicator_ball" : "bump"));
  if (shape == "bump") f.shape = Shape::bump;
  else if (shape == "indicator_ball") f.shape = Shape::indicator_ball;
  else throw ConfigError("unknown test function shape '" + shape + "'");
  f.radius = j.value("radius", 1.0);
  f.amplitude = j.value("amplitude", 1.0);
  if (j.contains("center")) f.center = j.at("center").get<std::vector<double>>();
  if (!(f.radius > 0.0)) throw ConfigError(where + ".radius must be positive");
  if (!(f.amplitude >= 0.0)) throw ConfigError(where + ".amplitude must be nonnegative");
  return f;
}

}  // namespace

LifetimeLaw parse_law(const std::string& json_text) {
  try {
    return law_from_json(json::parse(json_text));
  } catch (const json::exception& e) {
    throw ConfigError(std::string("law: ") + e.what());
  }
}

ExperimentConfig parse_config(const std::string& json_text) {
  ExperimentConfig c;
  try {
    const json j = json::parse(json_text);
    if (!j.is_object()) throw ConfigError("config must be a JSON object");
    reject_unknown(j,
                   {"id", "kind", "alpha", "dim", "law", "window_half_side", "boundary", "obs_step", "population_cap",
                    "initial_age", "intensity", "two_offspring_probability", "T_ladder", "replicates", "phi", "ball",
                    "covariance_pairs", "renewal_horizon", "renewal_step", "output", "seed", "threads"},
                   "config");
    c.id = j.value("id", c.id);
    if (j.contains("kind")) c.kind = parse_experiment_kind(j.at("kind").get<std::string>());
    c.alpha = j.value("alpha", c.alpha);
    c.dim = j.value("dim", c.dim);
    if (j.contains("law")) c.law = law_from_json(j.at("law"));
    c.window_half_side = j.value("window_half_side", c.window_half_side);
    if (j.contains("boundary")) c.boundary = parse_boundary(j.at("boundary").get<std::string>());
    c.obs_step = j.value("obs_step", c.obs_step);
    c.population_cap = j.value("population_cap", c.population_cap);
    if (j.contains("initial_age")) c.initial_age = parse_initial_age(j.at("initial_age").get<std::string>());
    c.intensity = j.value("intensity", c.intensity);
    c.two_offspring_probability = j.value("two_offspring_probability", c.two_offspring_probability);
    if (j.contains("T_ladder")) c.t_ladder = j.at("T_ladder").get<std::vector<double>>();
    c.replicates = j.value("replicates", c.replicates);
    if (j.contains("phi")) c.phi = function_from_json(j.at("phi"), "phi");
    if (j.contains("ball")) c.ball = function_from_json(j.at("ball"), "ball");
    if (j.contains("covariance_pairs")) c.covariance_pairs = j.at("covariance_pairs").get<std::vector<std::pair<double, double>>>();
    c.renewal_horizon = j.value("renewal_horizon", c.renewal_horizon);
    c.renewal_step = j.value("renewal_step", c.renewal_step);
    c.output = j.value("output", c.output);
    c.seed = j.value("seed", c.seed);
    c.seed_set = j.contains("seed");
    c.threads = j.value("threads", c.threads);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed config: ") + e.what());
  } catch (const ConfigError&) {
    throw;
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  try {
    (void)c.kernel();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

void check_regime(ExperimentKind kind, int d, double alpha, const LifetimeLaw& law) {
  const auto* pareto = std::get_if<ParetoTail>(&law.variant());
  const double dd = d;
  constexpr double eps = 1e-12;
  const std::string where = " (d=" + format_number(dd) + ", alpha=" + format_number(alpha) + ")";
  auto need_heavy_tail = [&]() -> double {
    if (!pareto) throw RegimeError(to_string(kind) + " requires a heavy-tailed (pareto_tail) lifetime law");
    return pareto->gamma;
  };
  switch (kind) {
    case ExperimentKind::validation: return;
    case ExperimentKind::lln_heavy_intermediate: {
      const double g = need_heavy_tail();
      if (std::abs(dd - alpha * g) < eps)
        throw CriticalDimensionError("critical dimension d = alpha*gamma refused: the law of large numbers at this "
                                     "boundary remains to be investigated (open problem)" + where);
      if (!(alpha * g < dd && dd < 2.0 * alpha))
        throw RegimeError("lln_heavy_intermediate requires alpha*gamma < d < 2*alpha" + where +
                          ", gamma=" + format_number(g));
      return;
    }
    case ExperimentKind::lln_heavy_large_d: {
      need_heavy_tail();
      // Every supported law has a continuous density.
      if (!(dd >= 2.0 * alpha)) throw RegimeError("lln_heavy_large_d requires d >= 2*alpha" + where);
      return;
    }
    case ExperimentKind::lln_finite_mean: {
      if (!law.mean()) throw RegimeError("lln_finite_mean requires a lifetime law with finite mean");
      if (std::abs(dd - alpha) < eps)
        throw CriticalDimensionError("critical dimension d = alpha refused: the law of large numbers at this "
                                     "boundary remains to be investigated (open problem)" + where);
      if (!(dd > alpha)) throw RegimeError("lln_finite_mean requires d > alpha" + where);
      return;
    }
    case ExperimentKind::occupancy_subcritical: {
      const double g = need_heavy_tail();
      if (std::abs(dd - alpha * g) < eps)
        throw CriticalDimensionError("critical dimension d = alpha*gamma refused: behaviour at this boundary "
                                     "remains to be investigated (open problem)" + where);
      if (!(dd < alpha * g))
        throw RegimeError("occupancy_subcritical requires d < alpha*gamma" + where + ", gamma=" + format_number(g));
      return;
    }
  }
}

void validate_structure(const ExperimentConfig& c) {
  if (c.t_ladder.empty()) throw ConfigError("T_ladder must not be empty");
  if (!(c.obs_step > 0.0)) throw ConfigError("obs_step must be positive");
  for (std::size_t i = 0; i < c.t_ladder.size(); ++i) {
    const double T = c.t_ladder[i];
    if (!(T > 0.0)) throw ConfigError("T_ladder entries must be positive");
    if (i > 0 && !(T > c.t_ladder[i - 1])) throw ConfigError("T_ladder must be strictly increasing");
    const double k = T / c.obs_step;
    if (std::abs(k - std::round(k)) > 1e-9 * std::max(1.0, k))
      throw ConfigError("every T in T_ladder must be a multiple of obs_step");
  }
  try {
    c.sim_config(c.max_horizon()).validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  // Functions must sit inside the window interior so that the observed field is
  // the stationary one rather than an edge effect.
  auto inside = [&](const FunctionSpec& f, const std::string& name) {
    const TestFunction tf = f.build(c.dim);
    for (double x : tf.center())
      if (std::abs(x) + tf.radius() >= c.window_half_side)
        throw ConfigError(name + " does not fit inside the window interior (|center| + radius must be < window_half_side)");
  };
  inside(c.phi, "phi");
  if (c.ball) inside(*c.ball, "ball");
}

void validate_config(const ExperimentConfig& c) {
  validate_structure(c);
  check_regime(c.kind, c.dim, c.alpha, c.law);
}

}  // namespace stablebranch
