#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <vector>

#include "ranklab/errors.hpp"
#include "ranklab/particle_sim.hpp"

using namespace ranklab;

namespace {

ArrayXd make(std::initializer_list<double> xs) {
  ArrayXd a(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs) a[i++] = x;
  return a;
}

SimConfig base_config() {
  SimConfig cfg;
  cfg.coefficients = {RankFunctionSpec::constant(1.0),
                      RankFunctionSpec::constant(1.0), GammaSpec::zero()};
  cfg.initial_law = InitialLawSpec::gaussian(0.0, 1.0);
  return cfg;
}

std::vector<Eigen::Index> stable_order(const ArrayXd& v) {
  std::vector<Eigen::Index> idx(v.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&v](Eigen::Index a, Eigen::Index b) {
    return v[a] < v[b] || (v[a] == v[b] && a < b);
  });
  return idx;
}

}  // namespace

TEST_CASE("rank counts match the brute-force <=-count, ties included") {
  std::mt19937 gen(3);
  std::uniform_int_distribution<int> lattice(-4, 4);
  for (int trial = 0; trial < 100; ++trial) {
    ArrayXd v(9);
    for (int i = 0; i < 9; ++i) v[i] = lattice(gen) * 0.5;  // plenty of ties
    const auto counts = rank_counts(v);
    for (int i = 0; i < 9; ++i) {
      int direct = 0;
      for (int j = 0; j < 9; ++j) {
        if (v[j] <= v[i]) ++direct;
      }
      CHECK(counts[i] == direct);
    }
  }
}

TEST_CASE("em_step on degenerate configurations") {
  // common noise only: everything moves by gamma * dW
  CoefficientTriple common_only{RankFunctionSpec::constant(0.0),
                                RankFunctionSpec::constant(0.0),
                                GammaSpec::constant(1.0)};
  ArrayXd x0 = make({0.25});
  ArrayXd x1 = em_step(x0, 0.0, 0.5, make({0.0}), common_only, 1e-3);
  CHECK(x1[0] == 0.75);

  // pure drift: both particles advance by b * dt
  CoefficientTriple drift_only{RankFunctionSpec::constant(1.0),
                               RankFunctionSpec::constant(0.0),
                               GammaSpec::zero()};
  ArrayXd y0 = make({-1.0, 2.0});
  ArrayXd y1 = em_step(y0, 0.0, 0.0, make({0.0, 0.0}), drift_only, 0.1);
  CHECK(y1[0] == -1.0 + 1.0 * 0.1);
  CHECK(y1[1] == 2.0 + 1.0 * 0.1);
}

TEST_CASE("em_step gives tied particles identical coefficients") {
  ArrayXd ramp(3);
  ramp << 0.5, 1.0, 2.0;
  CoefficientTriple specs{RankFunctionSpec::table(ramp),
                          RankFunctionSpec::constant(0.0), GammaSpec::zero()};
  ArrayXd x = make({1.0, 2.0, 2.0});
  ArrayXd out = em_step(x, 0.0, 0.0, make({0.0, 0.0, 0.0}), specs, 0.1);
  CHECK(out[1] - x[1] == out[2] - x[2]);
  // brute-force rank oracle: the <=-count of the tied pair is 3
  const auto counts = rank_counts(x);
  CHECK(counts[1] == 3);
  CHECK(counts[2] == 3);
  CHECK(out[0] - x[0] == doctest::Approx(specs.b(1.0 / 3.0) * 0.1));
  CHECK(out[1] - x[1] == doctest::Approx(specs.b(1.0) * 0.1));
}

TEST_CASE("sample_initial") {
  SimConfig cfg = base_config();
  cfg.n = 3;
  const auto heavi = GridCdf::from_function(
      -2.0, 2.0, 41, [](double x) { return x >= 0.0 ? 1.0 : 0.0; });
  cfg.initial_law = InitialLawSpec::table(heavi);
  const auto dirac_sample = sample_initial(cfg);
  for (Eigen::Index i = 0; i < 3; ++i) CHECK(dirac_sample.points()[i] == 0.0);

  SimConfig gauss = base_config();
  gauss.n = 10000;
  const auto sample = sample_initial(gauss);
  CHECK(std::abs(sample.points().mean()) < 4.0 / std::sqrt(10000.0));
  const auto again = sample_initial(gauss);
  CHECK((sample.points() == again.points()).all());
}

TEST_CASE("simulate: gamma structure identities") {
  SimConfig cfg = base_config();
  cfg.n = 16;
  cfg.horizon = 0.2;
  cfg.dt = 1e-2;
  cfg.retain_positions = true;

  // gamma == 0: the integral is identically zero
  const auto plain = simulate(cfg);
  for (Eigen::Index j = 0; j < plain.gamma_integral.size(); ++j) {
    CHECK(plain.gamma_integral[j] == 0.0);
  }

  // gamma == c: Gamma(t_j) = c * sum of dW, exactly for dyadic c
  SimConfig withc = cfg;
  withc.coefficients.gamma = GammaSpec::constant(0.5);
  const auto traj = simulate(withc);
  NoiseBundle bundle(cfg.seed, cfg.dt, cfg.num_steps());
  double wsum = 0.0;
  for (int j = 0; j < cfg.num_steps(); ++j) {
    wsum += bundle.common_increment(j);
    CHECK(traj.gamma_integral[j + 1] == 0.5 * wsum);
  }

  // the Y-path of the gamma == c run is bitwise the gamma == 0 run
  const auto decomposed = decompose_y(traj);
  CHECK(decomposed.raw_decomposed() == plain.raw_decomposed());
  CHECK(decomposed.raw_decomposed() == plain.raw_positions());

  // gamma == 0 decomposition is the identity
  const auto same = decompose_y(plain);
  CHECK(same.raw_decomposed() == plain.raw_decomposed());
  for (std::size_t j = 0; j < plain.states.size(); ++j) {
    CHECK((same.states[j].points() == plain.states[j].points()).all());
  }
}

TEST_CASE("simulate: determinism and raw-position bookkeeping") {
  SimConfig cfg = base_config();
  cfg.n = 8;
  cfg.horizon = 0.1;
  cfg.dt = 1e-2;
  cfg.retain_positions = true;
  cfg.coefficients.gamma = GammaSpec::constant(0.3);
  const auto a = simulate(cfg);
  const auto b = simulate(cfg);
  CHECK(a.raw_decomposed() == b.raw_decomposed());
  CHECK((a.gamma_integral == b.gamma_integral).all());

  // states are the sorted raw positions
  const MatrixXd x = a.raw_positions();
  for (Eigen::Index j = 0; j < x.rows(); ++j) {
    ArrayXd row = x.row(j).transpose().array();
    std::sort(row.begin(), row.end());
    CHECK((a.states[j].points() == row).all());
  }

  SimConfig no_raw = cfg;
  no_raw.retain_positions = false;
  const auto lean = simulate(no_raw);
  CHECK_THROWS_AS(decompose_y(lean), DomainError);
  CHECK_THROWS_AS(lean.raw_positions(), DomainError);
}

TEST_CASE("common shift preserves the rank order exactly") {
  SimConfig cfg = base_config();
  cfg.n = 64;
  cfg.horizon = 0.2;
  cfg.dt = 1e-2;
  cfg.retain_positions = true;
  cfg.coefficients.gamma =
      GammaSpec::mean_functional(integrand_registry("tanh"));
  const auto traj = simulate(cfg);
  const auto y = decompose_y(traj);
  const MatrixXd x = traj.raw_positions();
  for (Eigen::Index j = 0; j < x.rows(); ++j) {
    const ArrayXd xr = x.row(j).transpose().array();
    const ArrayXd yr = y.raw_decomposed().row(j).transpose().array();
    CHECK(stable_order(xr) == stable_order(yr));
  }
}

TEST_CASE("common-noise-only dynamics preserve the shape") {
  SimConfig cfg = base_config();
  cfg.n = 32;
  cfg.horizon = 0.3;
  cfg.dt = 1e-2;
  cfg.coefficients = {RankFunctionSpec::constant(0.0),
                      RankFunctionSpec::constant(0.0),
                      GammaSpec::mean_functional(integrand_registry("tanh"))};
  const auto traj = simulate(cfg);
  const double var0 =
      (traj.states.front().points() - traj.states.front().points().mean())
          .square()
          .mean();
  for (const auto& state : traj.states) {
    const double var =
        (state.points() - state.points().mean()).square().mean();
    CHECK(var == doctest::Approx(var0).epsilon(1e-12));
  }
}

TEST_CASE("constant-coefficient run hits the mean-drift law") {
  SimConfig cfg = base_config();
  cfg.n = 4000;
  cfg.horizon = 0.5;
  cfg.dt = 1e-2;
  cfg.coefficients = {RankFunctionSpec::constant(0.3),
                      RankFunctionSpec::constant(0.8), GammaSpec::zero()};
  const auto traj = simulate(cfg);
  const double terminal_mean = traj.states.back().points().mean();
  const double sd_total = std::sqrt(1.0 + 0.8 * 0.8 * 0.5);
  CHECK(std::abs(terminal_mean - 0.3 * 0.5) <
        4.0 * sd_total / std::sqrt(4000.0));
}

TEST_CASE("blowup raises with the step index") {
  SimConfig cfg = base_config();
  cfg.n = 2;
  cfg.horizon = 2.0;
  cfg.dt = 1.0;
  cfg.coefficients.b = RankFunctionSpec::constant(1.7e308);
  try {
    simulate(cfg);
    FAIL("expected BlowupError");
  } catch (const BlowupError& e) {
    CHECK(e.step() == 1);
  }
}

TEST_CASE("step rounding is recorded") {
  SimConfig cfg = base_config();
  cfg.horizon = 1.0;
  cfg.dt = 3e-1;
  cfg.validate_steps();
  CHECK(cfg.num_steps() == 3);
  CHECK(cfg.warnings.size() == 1);
}
