#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "ranklab/limit_solver.hpp"
#include "ranklab/particle_sim.hpp"

namespace ranklab {

// Gaps between one coupled n-particle run and the limit law on a shared
// common-noise realization, all sups taken over the time grid.
struct CoupledGap {
  double sup_w1 = 0.0;         // sup_t W1(rho_n(t), rho(t))
  double sup_cdf = 0.0;        // sup_t sup_x |F_n(t,x) - R(t, x - Gamma(t))|
  double sup_gamma_gap = 0.0;  // sup_t |Gamma_n(t) - Gamma(t)|
};

// Runs the particle system of `config` against a limit path solved on the
// same seed's common stream. The CDF sup is evaluated at the PDE grid nodes
// plus all particle positions. Throws on time-grid or seed mismatch.
CoupledGap coupled_gap(const SimConfig& config, const LimitPath& limit);

// Least-squares slope of log(mean gap) against log(n). Requires at least
// three distinct n values with positive mean gaps; otherwise the slope is
// undefined and a DomainError is thrown.
double fit_loglog_slope(const std::vector<double>& n_values,
                        const std::vector<double>& mean_gaps,
                        double* stderr_out = nullptr);

// sup over time of the empirical p-th absolute moment; p > 1.
double moment_check(const TrajectoryRecord& traj, double p);

struct GapRow {
  int n = 0;
  int replica = 0;
  double sup_w1 = 0.0;
  double sup_cdf = 0.0;
  double sup_gamma_gap = 0.0;
  double wall_ms = 0.0;
};

struct ConvergenceConfig {
  std::vector<int> n_ladder = {100, 400, 1600, 6400};
  int replicas = 20;
  double horizon = 0.5;
  double dt = 1e-3;
  std::uint64_t seed = 42;
  CoefficientTriple coefficients;
  InitialLawSpec initial_law = InitialLawSpec::gaussian(0.0, 1.0);
  // PDE grid; domain defaults to suggest_grid_domain when unset.
  std::optional<double> x_min;
  std::optional<double> x_max;
  Eigen::Index m = 1201;
  FixedPointConfig fixed_point;
  int workers = 0;
  bool validate = true;  // run the Assumption checks before computing
};

struct ConvergenceReport {
  std::vector<GapRow> rows;           // n-major, replica-minor
  std::vector<int> n_values;
  std::vector<double> mean_w1;        // per n, averaged over replicas
  std::vector<double> mean_cdf;       // per n
  double slope = 0.0;                 // fitted on mean_w1
  double slope_stderr = 0.0;
  double pme_c_star = 0.0;
};

// Same-seed replica over the whole ladder: the PME field is solved once,
// each replica's limit path is solved once and reused across all n.
ConvergenceReport run_convergence(const ConvergenceConfig& config);

// rate_fit over report rows, per the harness contract: needs >= 3 distinct
// n and >= 5 replicas each.
double rate_fit(const ConvergenceReport& report);

}  // namespace ranklab
