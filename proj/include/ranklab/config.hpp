#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ranklab/coefficients.hpp"
#include "ranklab/limit_solver.hpp"

namespace ranklab {

inline constexpr const char* kVersion = "0.1.0";

enum class ExperimentKind {
  kSolvePme,
  kSimulate,
  kFixedPoint,
  kConverge,
  kSpdeResidual,
};

const char* to_string(ExperimentKind kind);
std::optional<ExperimentKind> experiment_from_string(const std::string& name);

// Parametric forms of the specs, kept so a parsed config can be serialized
// back canonically (the built specs hold closures).
struct RankFunctionConfig {
  std::string kind = "constant";  // constant | affine | table | registry
  double value = 1.0;             // constant
  double intercept = 1.0;         // affine
  double slope = 0.0;
  std::vector<double> values;     // table
  std::string name;               // registry

  RankFunctionSpec build() const;
};

struct GammaConfig {
  std::string kind = "zero";  // zero | constant | time-function | mean-functional
  double value = 0.0;         // constant
  std::string name = "sine";  // time-function entry
  std::string integrand;      // mean-functional entry
  double amplitude = 1.0;     // shared scale parameter
  double frequency = 1.0;     // time-function only
  // Claimed W1-Lipschitz constant; overrides the registry value and is
  // checked by the probe at parse time.
  std::optional<double> lipschitz;

  GammaSpec build() const;
};

struct InitialLawConfig {
  std::string kind = "gaussian";  // gaussian | table
  double mean = 0.0;
  double sd = 1.0;
  double moment_exponent = 2.0;
  double x_min = -1.0;  // table support
  double x_max = 1.0;
  std::vector<double> values;

  InitialLawSpec build() const;
};

// Fully validated run description. Every field has a documented default;
// parse_config fills them in and rejects unknown keys, reporting every
// problem it finds rather than only the first.
struct RunConfig {
  ExperimentKind experiment = ExperimentKind::kSolvePme;
  std::string output_dir = "out";
  std::uint64_t seed = 42;
  int workers = 0;
  bool quiet = false;

  double horizon = 1.0;
  double dt = 1e-3;

  RankFunctionConfig b_config;
  RankFunctionConfig sigma_config;
  GammaConfig gamma_config;
  InitialLawConfig initial_law_config;

  // Built from the configs at parse time.
  CoefficientTriple coefficients;
  InitialLawSpec initial_law = InitialLawSpec::gaussian(0.0, 1.0);

  // pde grid; domain is derived from the coefficients when not given
  std::optional<double> x_min;
  std::optional<double> x_max;
  Eigen::Index m = 1201;
  double cfl_safety = 0.9;

  int n = 1000;
  bool retain_positions = false;
  bool dump_positions = false;

  FixedPointConfig fixed_point;

  std::vector<int> n_ladder = {100, 400, 1600, 6400};
  int replicas = 20;

  int residual_levels = 3;
  int residual_test_functions = 5;

  std::vector<std::string> warnings;

  // Resolved spatial domain (explicit or suggested).
  std::pair<double, double> domain() const;

  // Canonical serialized form with every default materialized; stable key
  // order and shortest-round-trip floats.
  std::string canonical() const;

  // FNV-1a over the canonical form, hex encoded.
  std::string config_hash() const;
};

// Parses and fully validates a JSON config. Throws ConfigError carrying the
// complete list of issues (unknown keys, missing values, Assumption 1.1
// violations found by the coefficient validators and the gamma probe).
RunConfig parse_config(const std::string& json_text);

// Convenience: read a file and parse it. Throws IoError if unreadable.
RunConfig parse_config_file(const std::string& path);

}  // namespace ranklab
