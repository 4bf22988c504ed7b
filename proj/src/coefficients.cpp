#include "ranklab/coefficients.hpp"

#include <algorithm>
#include <cmath>

#include "ranklab/errors.hpp"
#include "ranklab/rng.hpp"
#include "ranklab/special.hpp"

namespace ranklab {

namespace {

constexpr int kValidationMeshPoints = 10000;
constexpr double kQuadratureTol = 1e-10;
constexpr double kPi = 3.141592653589793238462643383279502884;

struct RegistryEntry {
  std::function<double(double)> f;
  std::function<double(double)> antiderivative;             // may be null
  std::function<double(double)> square_half_antiderivative;  // may be null
};

const RegistryEntry& registry_entry(const std::string& name) {
  // Closed forms are kept where they are easy; quadrature covers the rest.
  static const RegistryEntry sin_entry{
      [](double a) { return 1.0 + 0.5 * std::sin(kPi * a); },
      [](double r) { return r + 0.5 * (1.0 - std::cos(kPi * r)) / kPi; },
      nullptr};
  static const RegistryEntry cos_entry{
      [](double a) { return 1.0 + 0.25 * std::cos(kPi * a); },
      [](double r) { return r + 0.25 * std::sin(kPi * r) / kPi; },
      nullptr};
  if (name == "one_plus_half_sin_pi") return sin_entry;
  if (name == "one_plus_quarter_cos_pi") return cos_entry;
  throw DomainError("unknown rank-function registry entry: " + name);
}

void require_unit_interval(double r, const char* what) {
  if (!(r >= 0.0 && r <= 1.0)) {
    throw DomainError(std::string(what) + ": argument must lie in [0,1]");
  }
}

}  // namespace

RankFunctionSpec RankFunctionSpec::constant(double value) {
  RankFunctionSpec s;
  s.kind_ = RankFunctionKind::kConstant;
  s.c0_ = value;
  return s;
}

RankFunctionSpec RankFunctionSpec::affine(double intercept, double slope) {
  RankFunctionSpec s;
  s.kind_ = RankFunctionKind::kAffine;
  s.c0_ = intercept;
  s.c1_ = slope;
  return s;
}

RankFunctionSpec RankFunctionSpec::table(ArrayXd values) {
  if (values.size() < 2) {
    throw DomainError("RankFunctionSpec::table: needs at least two values");
  }
  if (!values.allFinite()) {
    throw DomainError("RankFunctionSpec::table: values must be finite");
  }
  RankFunctionSpec s;
  s.kind_ = RankFunctionKind::kTable;
  s.table_ = std::move(values);
  return s;
}

RankFunctionSpec RankFunctionSpec::registry(const std::string& name) {
  registry_entry(name);  // validate the name now
  RankFunctionSpec s;
  s.kind_ = RankFunctionKind::kRegistry;
  s.name_ = name;
  return s;
}

double RankFunctionSpec::operator()(double r) const {
  switch (kind_) {
    case RankFunctionKind::kConstant:
      return c0_;
    case RankFunctionKind::kAffine:
      return c0_ + c1_ * r;
    case RankFunctionKind::kTable: {
      const auto k = table_.size() - 1;
      const double t = r * static_cast<double>(k);
      auto j = std::clamp<Eigen::Index>(static_cast<Eigen::Index>(t), 0, k - 1);
      const double frac = t - static_cast<double>(j);
      return table_[j] + frac * (table_[j + 1] - table_[j]);
    }
    case RankFunctionKind::kRegistry:
      return registry_entry(name_).f(r);
  }
  return 0.0;  // unreachable
}

double RankFunctionSpec::min_value() const {
  switch (kind_) {
    case RankFunctionKind::kConstant:
      return c0_;
    case RankFunctionKind::kAffine:
      return std::min(c0_, c0_ + c1_);
    case RankFunctionKind::kTable:
      return table_.minCoeff();
    case RankFunctionKind::kRegistry: {
      double lo = (*this)(0.0);
      for (int i = 1; i <= kValidationMeshPoints; ++i) {
        lo = std::min(lo, (*this)(static_cast<double>(i) / kValidationMeshPoints));
      }
      return lo;
    }
  }
  return 0.0;
}

double RankFunctionSpec::max_value() const {
  switch (kind_) {
    case RankFunctionKind::kConstant:
      return c0_;
    case RankFunctionKind::kAffine:
      return std::max(c0_, c0_ + c1_);
    case RankFunctionKind::kTable:
      return table_.maxCoeff();
    case RankFunctionKind::kRegistry: {
      double hi = (*this)(0.0);
      for (int i = 1; i <= kValidationMeshPoints; ++i) {
        hi = std::max(hi, (*this)(static_cast<double>(i) / kValidationMeshPoints));
      }
      return hi;
    }
  }
  return 0.0;
}

bool RankFunctionSpec::has_closed_form_B() const {
  if (kind_ != RankFunctionKind::kRegistry) return true;
  return static_cast<bool>(registry_entry(name_).antiderivative);
}

bool RankFunctionSpec::has_closed_form_Sigma() const {
  if (kind_ != RankFunctionKind::kRegistry) return true;
  return static_cast<bool>(registry_entry(name_).square_half_antiderivative);
}

namespace {

// Integral of the table interpolant from 0 to r (piecewise quadratic).
double table_integral(const ArrayXd& table, double r) {
  const auto k = table.size() - 1;
  const double h = 1.0 / static_cast<double>(k);
  const double t = r * static_cast<double>(k);
  const auto full = std::min<Eigen::Index>(static_cast<Eigen::Index>(t), k);
  double acc = 0.0;
  for (Eigen::Index j = 0; j < full; ++j) {
    acc += 0.5 * h * (table[j] + table[j + 1]);
  }
  if (full < k) {
    const double w = (t - static_cast<double>(full)) * h;
    const double v0 = table[full];
    const double slope = (table[full + 1] - table[full]) / h;
    acc += v0 * w + 0.5 * slope * w * w;
  }
  return acc;
}

// Integral of interpolant^2 / 2 from 0 to r (piecewise cubic, exact).
double table_square_half_integral(const ArrayXd& table, double r) {
  const auto k = table.size() - 1;
  const double h = 1.0 / static_cast<double>(k);
  const double t = r * static_cast<double>(k);
  const auto full = std::min<Eigen::Index>(static_cast<Eigen::Index>(t), k);
  const auto segment = [h](double v0, double v1, double w) {
    const double s = (v1 - v0) / h;
    return 0.5 * (v0 * v0 * w + v0 * s * w * w + s * s * w * w * w / 3.0);
  };
  double acc = 0.0;
  for (Eigen::Index j = 0; j < full; ++j) {
    acc += segment(table[j], table[j + 1], h);
  }
  if (full < k) {
    const double w = (t - static_cast<double>(full)) * h;
    acc += segment(table[full], table[full + 1], w);
  }
  return acc;
}

}  // namespace

double antiderivative_B(const RankFunctionSpec& b, double r) {
  require_unit_interval(r, "antiderivative_B");
  switch (b.kind_) {
    case RankFunctionKind::kConstant:
      return b.c0_ * r;
    case RankFunctionKind::kAffine:
      return b.c0_ * r + 0.5 * b.c1_ * r * r;
    case RankFunctionKind::kTable:
      return table_integral(b.table_, r);
    case RankFunctionKind::kRegistry: {
      const auto& entry = registry_entry(b.name_);
      if (entry.antiderivative) {
        return entry.antiderivative(r) - entry.antiderivative(0.0);
      }
      return adaptive_simpson(entry.f, 0.0, r, kQuadratureTol);
    }
  }
  return 0.0;  // unreachable
}

double antiderivative_Sigma(const RankFunctionSpec& sigma, double r) {
  require_unit_interval(r, "antiderivative_Sigma");
  switch (sigma.kind_) {
    case RankFunctionKind::kConstant:
      return 0.5 * sigma.c0_ * sigma.c0_ * r;
    case RankFunctionKind::kAffine: {
      const double a = sigma.c0_;
      const double s = sigma.c1_;
      return 0.5 * (a * a * r + a * s * r * r + s * s * r * r * r / 3.0);
    }
    case RankFunctionKind::kTable:
      return table_square_half_integral(sigma.table_, r);
    case RankFunctionKind::kRegistry: {
      const auto& entry = registry_entry(sigma.name_);
      if (entry.square_half_antiderivative) {
        return entry.square_half_antiderivative(r) -
               entry.square_half_antiderivative(0.0);
      }
      const auto& f = entry.f;
      return adaptive_simpson(
          [&f](double a) {
            const double v = f(a);
            return 0.5 * v * v;
          },
          0.0, r, kQuadratureTol);
    }
  }
  return 0.0;  // unreachable
}

void validate_drift(const RankFunctionSpec& b) {
  for (int i = 0; i <= kValidationMeshPoints; ++i) {
    const double r = static_cast<double>(i) / kValidationMeshPoints;
    if (!(b(r) > 0.0)) {
      throw SpecViolationError(
          "drift b must be strictly positive on [0,1]; b(" +
          std::to_string(r) + ") = " + std::to_string(b(r)));
    }
  }
}

void validate_diffusion(const RankFunctionSpec& sigma) {
  double lo = sigma(0.0);
  double at = 0.0;
  for (int i = 1; i <= kValidationMeshPoints; ++i) {
    const double r = static_cast<double>(i) / kValidationMeshPoints;
    if (sigma(r) < lo) {
      lo = sigma(r);
      at = r;
    }
  }
  if (!(lo > 0.0)) {
    throw SpecViolationError(
        "sigma must be bounded away from zero on [0,1]; min sigma(" +
        std::to_string(at) + ") = " + std::to_string(lo));
  }
}

MeanIntegrand integrand_registry(const std::string& name, double amplitude) {
  const auto scaled_tanh = [](double amp) {
    MeanIntegrand m;
    m.f = [amp](double x) { return amp * std::tanh(x); };
    m.df = [amp](double x) {
      const double c = std::cosh(x);
      return amp / (c * c);
    };
    m.sup_abs_f = std::abs(amp);
    m.sup_abs_df = std::abs(amp);
    return m;
  };
  MeanIntegrand m;
  if (name == "tanh") {
    m = scaled_tanh(1.0);
  } else if (name == "half_tanh") {
    m = scaled_tanh(0.5);
  } else if (name == "scaled_tanh") {
    m = scaled_tanh(amplitude);
  } else {
    throw DomainError("unknown mean-functional integrand: " + name);
  }
  m.name = name;
  return m;
}

GammaSpec GammaSpec::zero() {
  GammaSpec g;
  g.kind_ = GammaKind::kZero;
  g.name_ = "zero";
  return g;
}

GammaSpec GammaSpec::constant(double c) {
  GammaSpec g;
  g.kind_ = GammaKind::kConstant;
  g.constant_ = c;
  g.bound_ = std::abs(c);
  g.name_ = "constant";
  return g;
}

GammaSpec GammaSpec::time_function(std::function<double(double)> f,
                                   double bound, std::string name) {
  GammaSpec g;
  g.kind_ = GammaKind::kTimeFunction;
  g.time_fn_ = std::move(f);
  g.bound_ = bound;
  g.name_ = std::move(name);
  return g;
}

GammaSpec GammaSpec::mean_functional(MeanIntegrand integrand) {
  GammaSpec g;
  g.kind_ = GammaKind::kMeanFunctional;
  g.lipschitz_ = integrand.sup_abs_df;
  g.bound_ = integrand.sup_abs_f;
  g.name_ = "mean-functional(" + integrand.name + ")";
  g.integrand_ = std::move(integrand);
  return g;
}

GammaSpec GammaSpec::custom(
    std::function<double(double, const EmpiricalMeasure&)> on_empirical,
    std::function<double(double, const GridCdf&)> on_grid,
    double lipschitz_constant, double bound, std::string name) {
  GammaSpec g;
  g.kind_ = GammaKind::kCustom;
  g.custom_empirical_ = std::move(on_empirical);
  g.custom_grid_ = std::move(on_grid);
  g.lipschitz_ = lipschitz_constant;
  g.bound_ = bound;
  g.name_ = std::move(name);
  return g;
}

double GammaSpec::check(double value) const {
  if (std::abs(value) > bound_ + 1e-12 * (1.0 + bound_)) {
    throw SpecViolationError("gamma evaluation " + std::to_string(value) +
                             " exceeds its declared bound " +
                             std::to_string(bound_));
  }
  return value;
}

double GammaSpec::operator()(double t, const EmpiricalMeasure& nu) const {
  switch (kind_) {
    case GammaKind::kZero:
      return 0.0;
    case GammaKind::kConstant:
      return constant_;
    case GammaKind::kTimeFunction:
      return check(time_fn_(t));
    case GammaKind::kMeanFunctional: {
      const ArrayXd& pts = nu.points();
      double acc = 0.0;
      for (Eigen::Index i = 0; i < pts.size(); ++i) acc += integrand_.f(pts[i]);
      return check(acc / static_cast<double>(pts.size()));
    }
    case GammaKind::kCustom:
      return check(custom_empirical_(t, nu));
  }
  return 0.0;  // unreachable
}

double GammaSpec::operator()(double t, const GridCdf& nu) const {
  switch (kind_) {
    case GammaKind::kZero:
      return 0.0;
    case GammaKind::kConstant:
      return constant_;
    case GammaKind::kTimeFunction:
      return check(time_fn_(t));
    case GammaKind::kMeanFunctional: {
      const ArrayXd& v = nu.values();
      const auto m = v.size();
      double acc = 0.0;
      for (Eigen::Index j = 0; j < m; ++j) {
        const double w = (j == 0 || j == m - 1) ? 0.5 : 1.0;
        acc += w * integrand_.df(nu.x(j)) * v[j];
      }
      return check(integrand_.f(nu.x_max()) - acc * nu.dx());
    }
    case GammaKind::kCustom:
      return check(custom_grid_(t, nu));
  }
  return 0.0;  // unreachable
}

double lipschitz_probe(const GammaSpec& gamma, int trials,
                       std::uint64_t seed) {
  if (trials < 1) {
    throw DomainError("lipschitz_probe: trials must be >= 1");
  }
  if (gamma.kind() == GammaKind::kZero ||
      gamma.kind() == GammaKind::kConstant ||
      gamma.kind() == GammaKind::kTimeFunction) {
    return 0.0;  // no measure dependence at all
  }
  CounterStream stream(seed, StreamDomain::kProbe);
  std::uint64_t draw = 0;
  const auto next_size = [&]() {
    return 1 + static_cast<Eigen::Index>(stream.uniform(draw++) * 40.0);
  };
  const auto next_point = [&]() {
    // dyadic lattice in [-4, 4]
    const double u = stream.uniform(draw++);
    return (std::floor(u * 8192.0) - 4096.0) / 1024.0;
  };
  double worst = 0.0;
  for (int trial = 0; trial < trials; ++trial) {
    ArrayXd a(next_size());
    ArrayXd b(next_size());
    for (Eigen::Index i = 0; i < a.size(); ++i) a[i] = next_point();
    for (Eigen::Index i = 0; i < b.size(); ++i) b[i] = next_point();
    const EmpiricalMeasure mu{std::move(a)};
    const EmpiricalMeasure nu{std::move(b)};
    const double dist = wasserstein(mu, nu);
    if (dist == 0.0) continue;
    const double ratio = std::abs(gamma(0.0, mu) - gamma(0.0, nu)) / dist;
    if (ratio > worst) {
      worst = ratio;
      if (worst > gamma.lipschitz_constant() * (1.0 + 1e-9)) {
        throw SpecViolationError(
            "gamma violates its declared W1-Lipschitz constant " +
            std::to_string(gamma.lipschitz_constant()) + ": probe ratio " +
            std::to_string(worst) + " at trial " + std::to_string(trial));
      }
    }
  }
  return worst;
}

InitialLawSpec InitialLawSpec::gaussian(double mean, double sd,
                                        double moment_exponent) {
  if (!(sd > 0.0)) {
    throw SpecViolationError("initial law: sd must be positive");
  }
  if (!(moment_exponent > 1.0)) {
    throw SpecViolationError("initial law: moment exponent must exceed 1");
  }
  InitialLawSpec law;
  law.gaussian_ = true;
  law.mean_ = mean;
  law.sd_ = sd;
  law.moment_exponent_ = moment_exponent;
  law.smoothness_ = 0.2419707245191434 / (sd * sd);  // sup |F''|
  return law;
}

InitialLawSpec InitialLawSpec::table(GridCdf cdf, double moment_exponent) {
  if (!(moment_exponent > 1.0)) {
    throw SpecViolationError("initial law: moment exponent must exceed 1");
  }
  InitialLawSpec law;
  law.gaussian_ = false;
  law.moment_exponent_ = moment_exponent;
  const ArrayXd& v = cdf.values();
  double worst = 0.0;
  for (Eigen::Index j = 1; j + 1 < v.size(); ++j) {
    const double d2 = (v[j + 1] - 2.0 * v[j] + v[j - 1]) / (cdf.dx() * cdf.dx());
    if (!std::isfinite(d2)) {
      throw SpecViolationError("initial law table: second differences of the "
                               "CDF must be finite");
    }
    worst = std::max(worst, std::abs(d2));
  }
  law.smoothness_ = worst;
  law.table_ = std::move(cdf);
  return law;
}

double InitialLawSpec::cdf(double x) const {
  if (gaussian_) return normal_cdf((x - mean_) / sd_);
  return table_(x);
}

double InitialLawSpec::quantile(double u) const {
  if (gaussian_) return mean_ + sd_ * normal_quantile(u);
  if (!(u > 0.0 && u < 1.0)) {
    throw DomainError("InitialLawSpec::quantile: u must lie in (0,1)");
  }
  // Step inversion: the tabulated law carries its mass on the table nodes,
  // so a Heaviside table samples its atom exactly.
  const ArrayXd& v = table_.values();
  const auto j = std::lower_bound(v.begin(), v.end(), u) - v.begin();
  return table_.x(std::min<Eigen::Index>(j, v.size() - 1));
}

double InitialLawSpec::mean() const {
  if (gaussian_) return mean_;
  // Mass v[j] - v[j-1] at node x_j under the step reading.
  const ArrayXd& v = table_.values();
  double acc = table_.x(0) * v[0];
  for (Eigen::Index j = 1; j < v.size(); ++j) {
    acc += table_.x(j) * (v[j] - v[j - 1]);
  }
  return acc;
}

double InitialLawSpec::sd() const {
  if (gaussian_) return sd_;
  const ArrayXd& v = table_.values();
  const double m = mean();
  double acc = (table_.x(0) - m) * (table_.x(0) - m) * v[0];
  for (Eigen::Index j = 1; j < v.size(); ++j) {
    const double d = table_.x(j) - m;
    acc += d * d * (v[j] - v[j - 1]);
  }
  return std::sqrt(acc);
}

GridCdf InitialLawSpec::grid_cdf(double x_min, double x_max,
                                 Eigen::Index m) const {
  return GridCdf::from_function(x_min, x_max, m,
                                [this](double x) { return cdf(x); });
}

void CoefficientTriple::validate(int probe_trials) const {
  validate_drift(b);
  validate_diffusion(sigma);
  lipschitz_probe(gamma, probe_trials);
}

}  // namespace ranklab
