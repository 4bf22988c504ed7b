#include "ranklab/convergence.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <map>

#include "ranklab/errors.hpp"
#include "ranklab/parallel.hpp"

namespace ranklab {

CoupledGap coupled_gap(const SimConfig& config, const LimitPath& limit) {
  const int steps = config.num_steps();
  if (limit.times.size() != steps + 1) {
    throw GridMismatchError("coupled_gap: simulation and limit use different "
                            "time grids");
  }
  if (limit.seed != config.seed) {
    throw DomainError("coupled_gap: limit path was solved on a different "
                      "common-noise seed");
  }
  if (std::abs(limit.times[steps] - config.horizon) >
      1e-9 * std::max(1.0, config.horizon)) {
    throw GridMismatchError("coupled_gap: horizons differ");
  }

  const TrajectoryRecord traj = simulate(config);

  CoupledGap gap;
  const auto m = limit.m();
  for (int j = 0; j <= steps; ++j) {
    const EmpiricalMeasure& mu = traj.states[j];
    const GridCdf g = limit.slice(j);

    gap.sup_w1 = std::max(gap.sup_w1, w1(mu, g));

    double sup_cdf = 0.0;
    for (Eigen::Index k = 0; k < m; ++k) {
      sup_cdf = std::max(sup_cdf,
                         std::abs(mu.cdf(g.x(k)) - limit.field(j, k)));
    }
    const ArrayXd& pts = mu.points();
    const auto n = pts.size();
    Eigen::Index i = 0;
    while (i < n) {
      Eigen::Index e = i + 1;
      while (e < n && pts[e] == pts[i]) ++e;
      const double fn = static_cast<double>(e) / static_cast<double>(n);
      sup_cdf = std::max(sup_cdf, std::abs(fn - g(pts[i])));
      i = e;
    }
    gap.sup_cdf = std::max(gap.sup_cdf, sup_cdf);

    gap.sup_gamma_gap =
        std::max(gap.sup_gamma_gap,
                 std::abs(traj.gamma_integral[j] - limit.gamma_integral[j]));
  }
  return gap;
}

double fit_loglog_slope(const std::vector<double>& n_values,
                        const std::vector<double>& mean_gaps,
                        double* stderr_out) {
  if (n_values.size() != mean_gaps.size()) {
    throw DomainError("fit_loglog_slope: size mismatch");
  }
  const auto k = n_values.size();
  if (k < 3) {
    throw DomainError("fit_loglog_slope: undefined slope, needs at least 3 "
                      "distinct n values");
  }
  for (double g : mean_gaps) {
    if (!(g > 0.0)) {
      throw DomainError("fit_loglog_slope: undefined slope, gaps must be "
                        "positive");
    }
  }
  std::vector<double> x(k), y(k);
  for (std::size_t i = 0; i < k; ++i) {
    x[i] = std::log(n_values[i]);
    y[i] = std::log(mean_gaps[i]);
  }
  double xbar = 0.0, ybar = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    xbar += x[i];
    ybar += y[i];
  }
  xbar /= static_cast<double>(k);
  ybar /= static_cast<double>(k);
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    sxx += (x[i] - xbar) * (x[i] - xbar);
    sxy += (x[i] - xbar) * (y[i] - ybar);
  }
  if (!(sxx > 0.0)) {
    throw DomainError("fit_loglog_slope: undefined slope, n values are all "
                      "identical");
  }
  const double slope = sxy / sxx;
  if (stderr_out) {
    double rss = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
      const double resid = y[i] - ybar - slope * (x[i] - xbar);
      rss += resid * resid;
    }
    *stderr_out =
        k > 2 ? std::sqrt(rss / static_cast<double>(k - 2) / sxx) : 0.0;
  }
  return slope;
}

double moment_check(const TrajectoryRecord& traj, double p) {
  if (!(p > 1.0)) {
    throw DomainError("moment_check: p must exceed 1");
  }
  double sup = 0.0;
  for (const auto& state : traj.states) {
    sup = std::max(sup, state.points().abs().pow(p).mean());
  }
  return sup;
}

ConvergenceReport run_convergence(const ConvergenceConfig& config) {
  if (config.n_ladder.empty()) {
    throw DomainError("run_convergence: empty n ladder");
  }
  for (std::size_t i = 1; i < config.n_ladder.size(); ++i) {
    if (config.n_ladder[i] <= config.n_ladder[i - 1]) {
      throw DomainError("run_convergence: n ladder must strictly increase");
    }
  }
  if (config.replicas < 1) {
    throw DomainError("run_convergence: needs at least one replica");
  }
  if (config.validate) {
    config.coefficients.validate();
  }

  double x_min, x_max;
  if (config.x_min && config.x_max) {
    x_min = *config.x_min;
    x_max = *config.x_max;
  } else {
    std::tie(x_min, x_max) = suggest_grid_domain(
        config.initial_law, config.coefficients.b, config.coefficients.sigma,
        config.coefficients.gamma, config.horizon);
  }

  SimConfig proto;
  proto.horizon = config.horizon;
  proto.dt = config.dt;
  proto.coefficients = config.coefficients;
  proto.initial_law = config.initial_law;
  proto.n = config.n_ladder.front();
  proto.validate_steps();
  const int steps = proto.num_steps();

  ArrayXd sde_times(steps + 1);
  for (int j = 0; j <= steps; ++j) sde_times[j] = j * config.dt;

  const PmeGrid grid =
      PmeGrid::with_cfl(x_min, x_max, config.m, config.horizon,
                        config.coefficients.b, config.coefficients.sigma);
  const PmeSolution pme =
      solve_pme(config.initial_law.grid_cdf(x_min, x_max, config.m),
                config.coefficients.b, config.coefficients.sigma, grid,
                sde_times);

  // One limit path per replica, shared across the whole ladder.
  std::vector<LimitPath> limits(config.replicas);
  std::vector<std::uint64_t> replica_seeds(config.replicas);
  parallel_for(config.replicas, config.workers, [&](int r) {
    replica_seeds[r] = derive_seed(config.seed, static_cast<std::uint64_t>(r));
    const NoiseBundle bundle(replica_seeds[r], config.dt, steps);
    limits[r] = fixed_point_solve(pme, config.coefficients.gamma,
                                  bundle.common_increments(),
                                  config.fixed_point, nullptr,
                                  replica_seeds[r]);
  });

  ConvergenceReport report;
  report.pme_c_star = pme.c_star;
  report.n_values = config.n_ladder;
  const int num_levels = static_cast<int>(config.n_ladder.size());
  report.rows.resize(static_cast<std::size_t>(num_levels) * config.replicas);

  parallel_for(num_levels * config.replicas, config.workers, [&](int task) {
    const int level = task / config.replicas;
    const int r = task % config.replicas;
    SimConfig sim = proto;
    sim.n = config.n_ladder[level];
    sim.seed = replica_seeds[r];
    const auto started = std::chrono::steady_clock::now();
    const CoupledGap gap = coupled_gap(sim, limits[r]);
    const auto elapsed = std::chrono::duration<double, std::milli>(
                             std::chrono::steady_clock::now() - started)
                             .count();
    report.rows[task] = GapRow{sim.n, r, gap.sup_w1, gap.sup_cdf,
                               gap.sup_gamma_gap, elapsed};
  });

  report.mean_w1.assign(num_levels, 0.0);
  report.mean_cdf.assign(num_levels, 0.0);
  for (int level = 0; level < num_levels; ++level) {
    for (int r = 0; r < config.replicas; ++r) {
      const auto& row = report.rows[level * config.replicas + r];
      report.mean_w1[level] += row.sup_w1;
      report.mean_cdf[level] += row.sup_cdf;
    }
    report.mean_w1[level] /= config.replicas;
    report.mean_cdf[level] /= config.replicas;
  }
  if (num_levels >= 3) {
    std::vector<double> ns(config.n_ladder.begin(), config.n_ladder.end());
    report.slope = fit_loglog_slope(ns, report.mean_w1, &report.slope_stderr);
  }
  return report;
}

double rate_fit(const ConvergenceReport& report) {
  std::map<int, std::pair<double, int>> groups;
  for (const auto& row : report.rows) {
    auto& [sum, count] = groups[row.n];
    sum += row.sup_w1;
    count += 1;
  }
  if (groups.size() < 3) {
    throw DomainError("rate_fit: needs at least 3 distinct n values");
  }
  std::vector<double> ns, gaps;
  for (const auto& [n, acc] : groups) {
    if (acc.second < 5) {
      throw DomainError("rate_fit: needs at least 5 replicas per n");
    }
    ns.push_back(n);
    gaps.push_back(acc.first / acc.second);
  }
  return fit_loglog_slope(ns, gaps);
}

}  // namespace ranklab
