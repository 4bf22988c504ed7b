#include "ranklab/limit_solver.hpp"

#include <algorithm>
#include <cmath>

#include "ranklab/errors.hpp"

namespace ranklab {

GridCdf LimitPath::slice(Eigen::Index j) const {
  return GridCdf(x_min, x_max, field.row(j).transpose().array());
}

LimitPath LimitPath::pme_anchor(const PmeSolution& R, std::uint64_t seed) {
  LimitPath path;
  path.x_min = R.x_min;
  path.x_max = R.x_max;
  path.times = R.times;
  path.field = R.field;
  path.gamma_integral = ArrayXd::Zero(R.times.size());
  path.seed = seed;
  return path;
}

LimitPath phi_map(const LimitPath& candidate, const PmeSolution& R,
                  const GammaSpec& gamma, const ArrayXd& dW) {
  const auto num_times = candidate.times.size();
  if (R.times.size() != num_times || R.field.cols() != candidate.field.cols() ||
      R.x_min != candidate.x_min || R.x_max != candidate.x_max) {
    throw GridMismatchError("phi_map: candidate and PME solution grids differ");
  }
  if (dW.size() != num_times - 1) {
    throw GridMismatchError("phi_map: increment count != time steps");
  }

  LimitPath next;
  next.x_min = candidate.x_min;
  next.x_max = candidate.x_max;
  next.times = candidate.times;
  next.seed = candidate.seed;
  next.iteration_log = candidate.iteration_log;
  next.gamma_integral = ArrayXd::Zero(num_times);
  next.gamma_values.resize(num_times - 1);
  next.field.resize(num_times, candidate.field.cols());

  for (Eigen::Index j = 0; j + 1 < num_times; ++j) {
    const double g = gamma(candidate.times[j], candidate.slice(j));
    next.gamma_values[j] = g;
    next.gamma_integral[j + 1] = next.gamma_integral[j] + g * dW[j];
  }
  for (Eigen::Index j = 0; j < num_times; ++j) {
    try {
      next.field.row(j) =
          R.slice(j).shifted(next.gamma_integral[j]).values().transpose();
    } catch (const TruncationOverflowError& e) {
      throw TruncationOverflowError(
          std::string(e.what()) +
          "; enlarge the PDE domain (gamma margin too small) at t = " +
          std::to_string(next.times[j]));
    }
  }
  return next;
}

namespace {

// sup over grid times of the trapezoidal W1 between two stored paths.
double sup_grid_w1(const LimitPath& a, const LimitPath& b) {
  const double dx = a.dx();
  double worst = 0.0;
  for (Eigen::Index j = 0; j < a.times.size(); ++j) {
    const ArrayXd diff =
        (a.field.row(j) - b.field.row(j)).array().abs().transpose();
    const auto m = diff.size();
    const double w1 = (diff.sum() - 0.5 * (diff[0] + diff[m - 1])) * dx;
    worst = std::max(worst, w1);
  }
  return worst;
}

}  // namespace

LimitPath fixed_point_solve(const PmeSolution& R, const GammaSpec& gamma,
                            const ArrayXd& dW, const FixedPointConfig& cfg,
                            const LimitPath* initial_candidate,
                            std::uint64_t seed) {
  if (!(cfg.tol > 0.0)) {
    throw DomainError("fixed_point_solve: tol must be positive");
  }
  if (cfg.max_iter < 1) {
    throw DomainError("fixed_point_solve: max_iter must be >= 1");
  }
  LimitPath candidate =
      initial_candidate ? *initial_candidate : LimitPath::pme_anchor(R, seed);
  candidate.seed = seed;
  candidate.iteration_log.clear();

  std::vector<double> log;
  for (int iter = 1; iter <= cfg.max_iter; ++iter) {
    LimitPath next = phi_map(candidate, R, gamma, dW);
    const double dist = sup_grid_w1(next, candidate);
    log.push_back(dist);
    candidate = std::move(next);
    if (dist < cfg.tol) {
      candidate.iteration_log = log;
      return candidate;
    }
  }
  throw NonConvergenceError(
      "fixed_point_solve: no convergence within " +
          std::to_string(cfg.max_iter) + " iterations (last distance " +
          std::to_string(log.back()) + ")",
      log);
}

double spde_weak_residual(const LimitPath& path, const RankFunctionSpec& b,
                          const RankFunctionSpec& sigma, const GammaSpec& gamma,
                          const ArrayXd& dW,
                          std::span<const BumpTestFunction> test_fns) {
  const auto num_times = path.times.size();
  if (dW.size() != num_times - 1) {
    throw GridMismatchError("spde_weak_residual: increment count mismatch");
  }
  ArrayXd gamma_values = path.gamma_values;
  if (gamma_values.size() == 0) {
    gamma_values.resize(num_times - 1);
    for (Eigen::Index j = 0; j + 1 < num_times; ++j) {
      gamma_values[j] = gamma(path.times[j], path.slice(j));
    }
  }
  return weak_form_residual(path.field, path.times, path.x_min, path.dx(),
                            make_antiderivative_B(b),
                            make_antiderivative_Sigma(sigma), gamma_values, dW,
                            test_fns);
}

}  // namespace ranklab
