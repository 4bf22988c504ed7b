#include "ranklab/pme_solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "ranklab/errors.hpp"

namespace ranklab {

PmeGrid PmeGrid::with_cfl(double x_min, double x_max, Eigen::Index m,
                          double horizon, const RankFunctionSpec& b,
                          const RankFunctionSpec& sigma, double cfl_safety) {
  PmeGrid grid;
  grid.x_min = x_min;
  grid.x_max = x_max;
  grid.m = m;
  grid.horizon = horizon;
  grid.cfl_safety = cfl_safety;
  const double dx = grid.dx();
  const double max_b = std::max(std::abs(b.max_value()), std::abs(b.min_value()));
  const double max_s = std::max(std::abs(sigma.max_value()),
                                std::abs(sigma.min_value()));
  const double denom = max_b / dx + max_s * max_s / (dx * dx);
  grid.dt_pde = denom > 0.0 ? cfl_safety / denom : horizon;
  return grid;
}

void PmeGrid::validate(const RankFunctionSpec& b,
                       const RankFunctionSpec& sigma) const {
  if (m < 3) throw DomainError("PmeGrid: needs at least three nodes");
  if (!(x_min < x_max)) throw DomainError("PmeGrid: empty domain");
  if (!(dt_pde > 0.0)) throw DomainError("PmeGrid: dt_pde must be positive");
  const double dx_ = dx();
  const double max_b = std::max(std::abs(b.max_value()), std::abs(b.min_value()));
  const double max_s = std::max(std::abs(sigma.max_value()),
                                std::abs(sigma.min_value()));
  double limit = std::numeric_limits<double>::infinity();
  if (max_b > 0.0) limit = std::min(limit, dx_ / max_b);
  if (max_s > 0.0) limit = std::min(limit, dx_ * dx_ / (max_s * max_s));
  if (dt_pde > cfl_safety * limit * (1.0 + 1e-12)) {
    throw DomainError("PmeGrid: CFL violated, dt_pde = " +
                      std::to_string(dt_pde) + " exceeds " +
                      std::to_string(cfl_safety * limit));
  }
}

GridCdf PmeSolution::slice(Eigen::Index j) const {
  return GridCdf(x_min, x_max, field.row(j).transpose().array());
}

GridCdf PmeSolution::at_time(double t) const {
  const auto k = times.size();
  if (t <= times[0]) return slice(0);
  if (t >= times[k - 1]) return slice(k - 1);
  Eigen::Index j = 0;
  while (j + 2 < k && times[j + 1] <= t) ++j;
  const double w = (t - times[j]) / (times[j + 1] - times[j]);
  ArrayXd mix = (1.0 - w) * field.row(j).transpose().array() +
                w * field.row(j + 1).transpose().array();
  return GridCdf(x_min, x_max, std::move(mix));
}

PmeSolution solve_pme(const GridCdf& initial, const RankFunctionSpec& b,
                      const RankFunctionSpec& sigma, const PmeGrid& grid,
                      const ArrayXd& sample_times) {
  grid.validate(b, sigma);
  const auto m = grid.m;
  if (initial.size() != m || initial.x_min() != grid.x_min ||
      initial.x_max() != grid.x_max) {
    throw GridMismatchError("solve_pme: initial CDF is not on the PDE grid");
  }

  ArrayXd times;
  if (sample_times.size() > 0) {
    times = sample_times;
    if (times[0] != 0.0) {
      throw DomainError("solve_pme: sample times must start at 0");
    }
    for (Eigen::Index k = 1; k < times.size(); ++k) {
      if (!(times[k] > times[k - 1])) {
        throw DomainError("solve_pme: sample times must increase");
      }
    }
    if (times[times.size() - 1] > grid.horizon * (1.0 + 1e-12)) {
      throw DomainError("solve_pme: sample times exceed the horizon");
    }
  } else {
    const auto steps =
        static_cast<Eigen::Index>(std::ceil(grid.horizon / grid.dt_pde - 1e-9));
    times.resize(steps + 1);
    const double dt = grid.horizon / static_cast<double>(steps);
    for (Eigen::Index k = 0; k <= steps; ++k) {
      times[k] = static_cast<double>(k) * dt;
    }
  }

  const auto big_b = make_antiderivative_B(b);
  const auto big_sigma = make_antiderivative_Sigma(sigma);

  PmeSolution sol;
  sol.x_min = grid.x_min;
  sol.x_max = grid.x_max;
  sol.dt_pde = grid.dt_pde;
  sol.times = times;
  sol.field.resize(times.size(), m);

  const double dx = grid.dx();
  ArrayXd r = initial.values();
  ArrayXd bv(m), sv(m), next(m);

  const auto slope_sup = [&](const ArrayXd& row) {
    double worst = std::abs(row[1] - row[0]) / dx;
    for (Eigen::Index j = 1; j + 1 < m; ++j) {
      worst = std::max(worst, std::abs(row[j + 1] - row[j - 1]) / (2.0 * dx));
    }
    worst = std::max(worst, std::abs(row[m - 1] - row[m - 2]) / dx);
    return worst;
  };

  sol.c_star = slope_sup(r);
  sol.field.row(0) = r.transpose();
  long step_index = 0;

  for (Eigen::Index k = 1; k < times.size(); ++k) {
    const double interval = times[k] - times[k - 1];
    const auto substeps = std::max<Eigen::Index>(
        1, static_cast<Eigen::Index>(std::ceil(interval / grid.dt_pde - 1e-9)));
    const double dt = interval / static_cast<double>(substeps);
    const double adv = dt / dx;
    const double dif = dt / (dx * dx);
    for (Eigen::Index s = 0; s < substeps; ++s, ++step_index) {
      bv = r.unaryExpr(big_b);
      sv = r.unaryExpr(big_sigma);
      next.segment(1, m - 2) =
          r.segment(1, m - 2) -
          adv * (bv.segment(1, m - 2) - bv.segment(0, m - 2)) +
          dif * (sv.segment(2, m - 2) - 2.0 * sv.segment(1, m - 2) +
                 sv.segment(0, m - 2));
      next[0] = 0.0;
      next[m - 1] = 1.0;
      if (!next.allFinite()) {
        throw BlowupError("solve_pme: non-finite value", step_index);
      }
      const double violation = monotone_repair(next);
      sol.max_monotonicity_violation =
          std::max(sol.max_monotonicity_violation, violation);
      r.swap(next);
      sol.c_star = std::max(sol.c_star, slope_sup(r));
    }
    sol.field.row(k) = r.transpose();
  }
  return sol;
}

double density_bound(const PmeSolution& sol) {
  const auto m = sol.m();
  const double dx = sol.dx();
  double worst = 0.0;
  for (Eigen::Index k = 0; k < sol.times.size(); ++k) {
    const auto row = sol.field.row(k);
    worst = std::max(worst, std::abs(row[1] - row[0]) / dx);
    for (Eigen::Index j = 1; j + 1 < m; ++j) {
      worst = std::max(worst, std::abs(row[j + 1] - row[j - 1]) / (2.0 * dx));
    }
    worst = std::max(worst, std::abs(row[m - 1] - row[m - 2]) / dx);
  }
  return worst;
}

double pme_weak_residual(const PmeSolution& sol, const RankFunctionSpec& b,
                         const RankFunctionSpec& sigma,
                         std::span<const BumpTestFunction> test_fns) {
  return weak_form_residual(sol.field, sol.times, sol.x_min, sol.dx(),
                            make_antiderivative_B(b),
                            make_antiderivative_Sigma(sigma), ArrayXd(),
                            ArrayXd(), test_fns);
}

std::pair<double, double> suggest_grid_domain(const InitialLawSpec& law,
                                              const RankFunctionSpec& b,
                                              const RankFunctionSpec& sigma,
                                              const GammaSpec& gamma,
                                              double horizon, double eps) {
  const double max_b = std::max(std::abs(b.max_value()), std::abs(b.min_value()));
  const double max_s = std::max(std::abs(sigma.max_value()),
                                std::abs(sigma.min_value()));
  const double sqrt_t = std::sqrt(horizon);
  const double margin =
      max_b * horizon + 6.0 * max_s * sqrt_t + 6.0 * gamma.bound() * sqrt_t;
  return {law.quantile(eps) - margin, law.quantile(1.0 - eps) + margin};
}

}  // namespace ranklab
