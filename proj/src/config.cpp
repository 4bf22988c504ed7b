#include "ranklab/config.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "ranklab/errors.hpp"
#include "ranklab/pme_solver.hpp"

namespace ranklab {

using nlohmann::json;

const char* to_string(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::kSolvePme: return "solve-pme";
    case ExperimentKind::kSimulate: return "simulate";
    case ExperimentKind::kFixedPoint: return "fixed-point";
    case ExperimentKind::kConverge: return "converge";
    case ExperimentKind::kSpdeResidual: return "spde-residual";
  }
  return "?";
}

std::optional<ExperimentKind> experiment_from_string(const std::string& name) {
  if (name == "solve-pme") return ExperimentKind::kSolvePme;
  if (name == "simulate") return ExperimentKind::kSimulate;
  if (name == "fixed-point") return ExperimentKind::kFixedPoint;
  if (name == "converge") return ExperimentKind::kConverge;
  if (name == "spde-residual") return ExperimentKind::kSpdeResidual;
  return std::nullopt;
}

RankFunctionSpec RankFunctionConfig::build() const {
  if (kind == "constant") return RankFunctionSpec::constant(value);
  if (kind == "affine") return RankFunctionSpec::affine(intercept, slope);
  if (kind == "table") {
    ArrayXd v(static_cast<Eigen::Index>(values.size()));
    for (std::size_t i = 0; i < values.size(); ++i) {
      v[static_cast<Eigen::Index>(i)] = values[i];
    }
    return RankFunctionSpec::table(std::move(v));
  }
  if (kind == "registry") return RankFunctionSpec::registry(name);
  throw DomainError("unknown rank-function kind: " + kind);
}

GammaSpec GammaConfig::build() const {
  if (kind == "zero") return GammaSpec::zero();
  if (kind == "constant") return GammaSpec::constant(value);
  if (kind == "time-function") {
    if (name == "sine") {
      const double a = amplitude;
      const double w = frequency;
      return GammaSpec::time_function(
          [a, w](double t) { return a * std::sin(w * t); }, std::abs(a),
          "sine");
    }
    throw DomainError("unknown time-function gamma: " + name);
  }
  if (kind == "mean-functional") {
    auto f = integrand_registry(integrand, amplitude);
    if (lipschitz) f.sup_abs_df = *lipschitz;
    return GammaSpec::mean_functional(std::move(f));
  }
  throw DomainError("unknown gamma kind: " + kind);
}

InitialLawSpec InitialLawConfig::build() const {
  if (kind == "gaussian") {
    return InitialLawSpec::gaussian(mean, sd, moment_exponent);
  }
  if (kind == "table") {
    ArrayXd v(static_cast<Eigen::Index>(values.size()));
    for (std::size_t i = 0; i < values.size(); ++i) {
      v[static_cast<Eigen::Index>(i)] = values[i];
    }
    return InitialLawSpec::table(GridCdf(x_min, x_max, std::move(v)),
                                 moment_exponent);
  }
  throw DomainError("unknown initial-law kind: " + kind);
}

std::pair<double, double> RunConfig::domain() const {
  if (x_min && x_max) return {*x_min, *x_max};
  return suggest_grid_domain(initial_law, coefficients.b, coefficients.sigma,
                             coefficients.gamma, horizon);
}

namespace {

// Collects issues instead of failing fast.
class Checker {
public:
  std::vector<std::string>& issues() { return issues_; }

  void complain(const std::string& what) { issues_.push_back(what); }

  void reject_unknown(const json& obj, const std::string& where,
                      std::initializer_list<const char*> allowed) {
    if (!obj.is_object()) {
      complain(where + ": expected an object");
      return;
    }
    for (const auto& [key, unused] : obj.items()) {
      (void)unused;
      bool ok = false;
      for (const char* a : allowed) {
        if (key == a) {
          ok = true;
          break;
        }
      }
      if (!ok) complain(where + ": unknown key \"" + key + "\"");
    }
  }

  template <typename T>
  void take(const json& obj, const char* key, T& out,
            const std::string& where) {
    if (!obj.is_object() || !obj.contains(key)) return;
    try {
      out = obj.at(key).get<T>();
    } catch (const json::exception&) {
      complain(where + "." + key + ": wrong type");
    }
  }

private:
  std::vector<std::string> issues_;
};

void parse_rank_function(Checker& check, const json& obj,
                         const std::string& where, RankFunctionConfig& out) {
  check.reject_unknown(obj, where,
                       {"kind", "value", "intercept", "slope", "values",
                        "name"});
  if (!obj.is_object()) return;
  check.take(obj, "kind", out.kind, where);
  check.take(obj, "value", out.value, where);
  check.take(obj, "intercept", out.intercept, where);
  check.take(obj, "slope", out.slope, where);
  check.take(obj, "values", out.values, where);
  check.take(obj, "name", out.name, where);
  if (out.kind != "constant" && out.kind != "affine" && out.kind != "table" &&
      out.kind != "registry") {
    check.complain(where + ".kind: must be one of constant, affine, table, "
                           "registry (got \"" +
                   out.kind + "\")");
  }
  if (out.kind == "table" && out.values.size() < 2) {
    check.complain(where + ".values: a table needs at least two values");
  }
  if (out.kind == "registry" && out.name.empty()) {
    check.complain(where + ".name: registry entries need a name");
  }
}

}  // namespace

RunConfig parse_config(const std::string& json_text) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::exception& e) {
    throw ConfigError("config is not valid JSON", {e.what()});
  }

  RunConfig cfg;
  Checker check;
  check.reject_unknown(root, "config",
                       {"experiment", "output_dir", "seed", "workers",
                        "time", "coefficients", "initial_law", "pde",
                        "particles", "fixed_point", "converge", "residual"});

  if (root.contains("experiment")) {
    std::string name;
    check.take(root, "experiment", name, "config");
    if (const auto kind = experiment_from_string(name)) {
      cfg.experiment = *kind;
    } else {
      check.complain("config.experiment: unknown experiment \"" + name +
                     "\"");
    }
  }
  check.take(root, "output_dir", cfg.output_dir, "config");
  check.take(root, "seed", cfg.seed, "config");
  check.take(root, "workers", cfg.workers, "config");

  if (root.contains("time")) {
    const auto& t = root["time"];
    check.reject_unknown(t, "time", {"horizon", "dt"});
    check.take(t, "horizon", cfg.horizon, "time");
    check.take(t, "dt", cfg.dt, "time");
  }
  if (!(cfg.horizon > 0.0)) check.complain("time.horizon: must be positive");
  if (!(cfg.dt > 0.0)) check.complain("time.dt: must be positive");

  if (root.contains("coefficients")) {
    const auto& c = root["coefficients"];
    check.reject_unknown(c, "coefficients", {"b", "sigma", "gamma"});
    if (c.is_object()) {
      if (c.contains("b")) {
        parse_rank_function(check, c["b"], "coefficients.b", cfg.b_config);
      }
      if (c.contains("sigma")) {
        parse_rank_function(check, c["sigma"], "coefficients.sigma",
                            cfg.sigma_config);
      }
      if (c.contains("gamma")) {
        const auto& g = c["gamma"];
        check.reject_unknown(g, "coefficients.gamma",
                             {"kind", "value", "name", "integrand",
                              "amplitude", "frequency", "lipschitz"});
        check.take(g, "kind", cfg.gamma_config.kind, "coefficients.gamma");
        check.take(g, "value", cfg.gamma_config.value, "coefficients.gamma");
        check.take(g, "name", cfg.gamma_config.name, "coefficients.gamma");
        check.take(g, "integrand", cfg.gamma_config.integrand,
                   "coefficients.gamma");
        check.take(g, "amplitude", cfg.gamma_config.amplitude,
                   "coefficients.gamma");
        check.take(g, "frequency", cfg.gamma_config.frequency,
                   "coefficients.gamma");
        if (g.is_object() && g.contains("lipschitz")) {
          double claimed = 0;
          check.take(g, "lipschitz", claimed, "coefficients.gamma");
          cfg.gamma_config.lipschitz = claimed;
        }
      }
    }
  }

  if (root.contains("initial_law")) {
    const auto& law = root["initial_law"];
    check.reject_unknown(law, "initial_law",
                         {"kind", "mean", "sd", "moment_exponent", "x_min",
                          "x_max", "values"});
    auto& lc = cfg.initial_law_config;
    check.take(law, "kind", lc.kind, "initial_law");
    check.take(law, "mean", lc.mean, "initial_law");
    check.take(law, "sd", lc.sd, "initial_law");
    check.take(law, "moment_exponent", lc.moment_exponent, "initial_law");
    check.take(law, "x_min", lc.x_min, "initial_law");
    check.take(law, "x_max", lc.x_max, "initial_law");
    check.take(law, "values", lc.values, "initial_law");
  }

  if (root.contains("pde")) {
    const auto& p = root["pde"];
    check.reject_unknown(p, "pde", {"x_min", "x_max", "m", "cfl_safety"});
    if (p.is_object()) {
      if (p.contains("x_min")) {
        double v = 0;
        check.take(p, "x_min", v, "pde");
        cfg.x_min = v;
      }
      if (p.contains("x_max")) {
        double v = 0;
        check.take(p, "x_max", v, "pde");
        cfg.x_max = v;
      }
      long m = cfg.m;
      check.take(p, "m", m, "pde");
      cfg.m = m;
      check.take(p, "cfl_safety", cfg.cfl_safety, "pde");
    }
  }
  if (cfg.m < 3) check.complain("pde.m: needs at least three nodes");
  if (!(cfg.cfl_safety > 0.0 && cfg.cfl_safety <= 1.0)) {
    check.complain("pde.cfl_safety: must lie in (0, 1]");
  }
  if (cfg.x_min.has_value() != cfg.x_max.has_value()) {
    check.complain("pde: x_min and x_max must be given together");
  }
  if (cfg.x_min && cfg.x_max && !(*cfg.x_min < *cfg.x_max)) {
    check.complain("pde: x_min must be below x_max");
  }

  if (root.contains("particles")) {
    const auto& p = root["particles"];
    check.reject_unknown(p, "particles",
                         {"n", "retain_positions", "dump_positions"});
    check.take(p, "n", cfg.n, "particles");
    check.take(p, "retain_positions", cfg.retain_positions, "particles");
    check.take(p, "dump_positions", cfg.dump_positions, "particles");
  }
  if (cfg.n < 1) check.complain("particles.n: must be >= 1");

  if (root.contains("fixed_point")) {
    const auto& f = root["fixed_point"];
    check.reject_unknown(f, "fixed_point", {"tol", "max_iter"});
    check.take(f, "tol", cfg.fixed_point.tol, "fixed_point");
    check.take(f, "max_iter", cfg.fixed_point.max_iter, "fixed_point");
  }
  if (!(cfg.fixed_point.tol > 0.0)) {
    check.complain("fixed_point.tol: must be positive");
  }
  if (cfg.fixed_point.max_iter < 1) {
    check.complain("fixed_point.max_iter: must be >= 1");
  }

  if (root.contains("converge")) {
    const auto& c = root["converge"];
    check.reject_unknown(c, "converge", {"n_ladder", "replicas"});
    check.take(c, "n_ladder", cfg.n_ladder, "converge");
    check.take(c, "replicas", cfg.replicas, "converge");
  }
  if (cfg.n_ladder.empty()) {
    check.complain("converge.n_ladder: must not be empty");
  }
  for (std::size_t i = 1; i < cfg.n_ladder.size(); ++i) {
    if (cfg.n_ladder[i] <= cfg.n_ladder[i - 1]) {
      check.complain("converge.n_ladder: must strictly increase");
      break;
    }
  }
  if (cfg.replicas < 1) check.complain("converge.replicas: must be >= 1");

  if (root.contains("residual")) {
    const auto& r = root["residual"];
    check.reject_unknown(r, "residual", {"levels", "test_functions"});
    check.take(r, "levels", cfg.residual_levels, "residual");
    check.take(r, "test_functions", cfg.residual_test_functions, "residual");
  }
  if (cfg.residual_levels < 1) {
    check.complain("residual.levels: must be >= 1");
  }
  if (cfg.residual_test_functions < 1) {
    check.complain("residual.test_functions: must be >= 1");
  }

  // Build and validate the specs; every violation is one more issue.
  bool coefficients_ok = true;
  try {
    cfg.coefficients.b = cfg.b_config.build();
  } catch (const Error& e) {
    coefficients_ok = false;
    check.complain(std::string("coefficients.b: ") + e.what());
  }
  try {
    cfg.coefficients.sigma = cfg.sigma_config.build();
  } catch (const Error& e) {
    coefficients_ok = false;
    check.complain(std::string("coefficients.sigma: ") + e.what());
  }
  try {
    cfg.coefficients.gamma = cfg.gamma_config.build();
  } catch (const Error& e) {
    coefficients_ok = false;
    check.complain(std::string("coefficients.gamma: ") + e.what());
  }
  try {
    cfg.initial_law = cfg.initial_law_config.build();
  } catch (const Error& e) {
    check.complain(std::string("initial_law: ") + e.what());
  }

  if (coefficients_ok) {
    try {
      validate_drift(cfg.coefficients.b);
    } catch (const SpecViolationError& e) {
      check.complain(std::string("coefficients.b: ") + e.what());
    }
    try {
      validate_diffusion(cfg.coefficients.sigma);
    } catch (const SpecViolationError& e) {
      check.complain(std::string("coefficients.sigma: ") + e.what());
    }
    try {
      lipschitz_probe(cfg.coefficients.gamma, 200);
    } catch (const SpecViolationError& e) {
      check.complain(std::string("coefficients.gamma: ") + e.what());
    }
  }

  if (!check.issues().empty()) {
    throw ConfigError("config validation failed with " +
                          std::to_string(check.issues().size()) + " issue(s)",
                      check.issues());
  }

  const int steps = static_cast<int>(std::llround(cfg.horizon / cfg.dt));
  if (std::abs(steps * cfg.dt - cfg.horizon) >
      1e-9 * std::max(1.0, cfg.horizon)) {
    cfg.warnings.push_back("time.horizon is not a whole multiple of time.dt; "
                           "runs use " +
                           std::to_string(steps) + " steps");
  }
  return cfg;
}

RunConfig parse_config_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read config file: " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_config(buffer.str());
}

std::string RunConfig::canonical() const {
  json root;
  root["experiment"] = to_string(experiment);
  root["output_dir"] = output_dir;
  root["seed"] = seed;
  root["workers"] = workers;
  root["time"] = {{"horizon", horizon}, {"dt", dt}};

  const auto rank_json = [](const RankFunctionConfig& r) {
    json j;
    j["kind"] = r.kind;
    if (r.kind == "constant") j["value"] = r.value;
    if (r.kind == "affine") {
      j["intercept"] = r.intercept;
      j["slope"] = r.slope;
    }
    if (r.kind == "table") j["values"] = r.values;
    if (r.kind == "registry") j["name"] = r.name;
    return j;
  };
  json gamma;
  gamma["kind"] = gamma_config.kind;
  if (gamma_config.kind == "constant") gamma["value"] = gamma_config.value;
  if (gamma_config.kind == "time-function") {
    gamma["name"] = gamma_config.name;
    gamma["amplitude"] = gamma_config.amplitude;
    gamma["frequency"] = gamma_config.frequency;
  }
  if (gamma_config.kind == "mean-functional") {
    gamma["integrand"] = gamma_config.integrand;
    gamma["amplitude"] = gamma_config.amplitude;
    if (gamma_config.lipschitz) gamma["lipschitz"] = *gamma_config.lipschitz;
  }
  root["coefficients"] = {{"b", rank_json(b_config)},
                          {"sigma", rank_json(sigma_config)},
                          {"gamma", gamma}};

  json law;
  law["kind"] = initial_law_config.kind;
  law["moment_exponent"] = initial_law_config.moment_exponent;
  if (initial_law_config.kind == "gaussian") {
    law["mean"] = initial_law_config.mean;
    law["sd"] = initial_law_config.sd;
  } else {
    law["x_min"] = initial_law_config.x_min;
    law["x_max"] = initial_law_config.x_max;
    law["values"] = initial_law_config.values;
  }
  root["initial_law"] = law;

  json pde;
  if (x_min) pde["x_min"] = *x_min;
  if (x_max) pde["x_max"] = *x_max;
  pde["m"] = m;
  pde["cfl_safety"] = cfl_safety;
  root["pde"] = pde;

  root["particles"] = {{"n", n},
                       {"retain_positions", retain_positions},
                       {"dump_positions", dump_positions}};
  root["fixed_point"] = {{"tol", fixed_point.tol},
                         {"max_iter", fixed_point.max_iter}};
  root["converge"] = {{"n_ladder", n_ladder}, {"replicas", replicas}};
  root["residual"] = {{"levels", residual_levels},
                      {"test_functions", residual_test_functions}};
  return root.dump(2) + "\n";
}

std::string RunConfig::config_hash() const {
  const std::string text = canonical();
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace ranklab
