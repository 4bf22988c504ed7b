#pragma once

#include <cstdint>
#include <functional>
#include <string>

#include "ranklab/measures.hpp"

namespace ranklab {

enum class RankFunctionKind { kConstant, kAffine, kTable, kRegistry };

// A rank coefficient (b or sigma) on [0,1]. Constant and affine kinds carry
// exact antiderivatives; table kinds integrate their linear interpolant in
// closed form; registry entries fall back to adaptive quadrature when no
// closed-form antiderivative is on file.
class RankFunctionSpec {
public:
  RankFunctionSpec() : kind_(RankFunctionKind::kConstant), c0_(1.0) {}

  static RankFunctionSpec constant(double value);
  static RankFunctionSpec affine(double intercept, double slope);
  static RankFunctionSpec table(ArrayXd values);  // uniform mesh on [0,1]
  static RankFunctionSpec registry(const std::string& name);

  double operator()(double r) const;

  RankFunctionKind kind() const { return kind_; }
  const std::string& registry_name() const { return name_; }

  // Extrema over [0,1]; exact for constant/affine/table, a 10^4-point mesh
  // scan for registry entries.
  double min_value() const;
  double max_value() const;

  // Whether the antiderivative ops below take a closed-form path (always
  // true except for registry entries without one on file).
  bool has_closed_form_B() const;
  bool has_closed_form_Sigma() const;

private:
  friend double antiderivative_B(const RankFunctionSpec&, double);
  friend double antiderivative_Sigma(const RankFunctionSpec&, double);

  RankFunctionKind kind_;
  double c0_, c1_{0};
  ArrayXd table_;
  std::string name_;
};

// B(r) = integral of b over [0, r].
double antiderivative_B(const RankFunctionSpec& b, double r);

// Sigma(r) = integral of sigma^2 / 2 over [0, r].
double antiderivative_Sigma(const RankFunctionSpec& sigma, double r);

// Positivity checks on the 10^4-point validation mesh; throw
// SpecViolationError with the offending mesh point on failure.
void validate_drift(const RankFunctionSpec& b);
void validate_diffusion(const RankFunctionSpec& sigma);

// Integrand of a mean-functional gamma: f with derivative and its bounds.
struct MeanIntegrand {
  std::string name;
  std::function<double(double)> f;
  std::function<double(double)> df;
  double sup_abs_f{0};
  double sup_abs_df{0};
};

// Named integrands: "tanh", "half_tanh", "scaled_tanh" (amplitude * tanh).
MeanIntegrand integrand_registry(const std::string& name,
                                 double amplitude = 1.0);

enum class GammaKind { kZero, kConstant, kTimeFunction, kMeanFunctional, kCustom };

// The common-noise loading gamma(t, nu), with declared Lipschitz constant
// (with respect to W_1) and sup bound. The bound is asserted at every
// evaluation; the Lipschitz constant can be spot-checked with
// lipschitz_probe.
class GammaSpec {
public:
  static GammaSpec zero();
  static GammaSpec constant(double c);
  static GammaSpec time_function(std::function<double(double)> f, double bound,
                                 std::string name = "time-function");
  static GammaSpec mean_functional(MeanIntegrand integrand);
  static GammaSpec custom(
      std::function<double(double, const EmpiricalMeasure&)> on_empirical,
      std::function<double(double, const GridCdf&)> on_grid,
      double lipschitz_constant, double bound, std::string name = "custom");

  double operator()(double t, const EmpiricalMeasure& nu) const;
  // Grid evaluation of a mean functional uses integration by parts on the
  // truncated domain: integral of f dnu = f(x_max) - integral of f' F dx.
  double operator()(double t, const GridCdf& nu) const;

  GammaKind kind() const { return kind_; }
  bool is_zero() const { return kind_ == GammaKind::kZero; }
  double lipschitz_constant() const { return lipschitz_; }
  double bound() const { return bound_; }
  const std::string& name() const { return name_; }

public:
  GammaSpec() = default;  // the zero loading

private:
  double check(double value) const;

  GammaKind kind_{GammaKind::kZero};
  double constant_{0};
  std::function<double(double)> time_fn_;
  MeanIntegrand integrand_;
  std::function<double(double, const EmpiricalMeasure&)> custom_empirical_;
  std::function<double(double, const GridCdf&)> custom_grid_;
  double lipschitz_{0};
  double bound_{0};
  std::string name_{"zero"};
};

// Max of |gamma(nu1) - gamma(nu2)| / W1(nu1, nu2) over `trials` random
// measure pairs. Throws SpecViolationError (with the witnessing pair) if the
// ratio exceeds the declared constant by more than a factor 1 + 1e-9.
double lipschitz_probe(const GammaSpec& gamma, int trials,
                       std::uint64_t seed = 0x9e3779b97f4a7c15ull);

// Initial law lambda: either gaussian or a tabulated CDF whose mass sits on
// the table nodes (so degenerate tables sample exactly).
class InitialLawSpec {
public:
  static InitialLawSpec gaussian(double mean, double sd,
                                 double moment_exponent = 2.0);
  static InitialLawSpec table(GridCdf cdf, double moment_exponent = 2.0);

  double cdf(double x) const;
  double quantile(double u) const;
  double moment_exponent() const { return moment_exponent_; }
  bool is_gaussian() const { return gaussian_; }
  double mean() const;
  double sd() const;

  // Largest second difference of the CDF over its mesh; recorded as a
  // smoothness smoke check (must be finite, not small).
  double smoothness_indicator() const { return smoothness_; }

  GridCdf grid_cdf(double x_min, double x_max, Eigen::Index m) const;

private:
  InitialLawSpec() = default;
  bool gaussian_{true};
  double mean_{0}, sd_{1};
  GridCdf table_{0.0, 1.0, ArrayXd::LinSpaced(2, 0.0, 1.0)};
  double moment_exponent_{2};
  double smoothness_{0};
};

// The triple (b, sigma, gamma). validate() runs the Assumption checks; the
// low-level kernels deliberately accept unvalidated triples so degenerate
// configurations remain expressible in tests.
struct CoefficientTriple {
  RankFunctionSpec b;
  RankFunctionSpec sigma;
  GammaSpec gamma;

  void validate(int probe_trials = 200) const;
};

}  // namespace ranklab
