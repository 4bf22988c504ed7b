#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "ranklab/pme_solver.hpp"

namespace ranklab {

struct FixedPointConfig {
  double tol = 1e-8;   // sup-W1 stopping threshold
  int max_iter = 30;
};

// A candidate (or converged) law path for the common-noise limit: grid CDFs
// G(t_j, .) = R(t_j, . - Gamma(t_j)) together with the shift path Gamma.
struct LimitPath {
  double x_min = 0.0;
  double x_max = 1.0;
  ArrayXd times;
  MatrixXd field;          // G(t_j, .) rows
  ArrayXd gamma_integral;  // Gamma(t_j), Gamma(0) = 0
  ArrayXd gamma_values;    // gamma(t_j, G(t_j)) at the left points
  std::vector<double> iteration_log;  // sup-W1 distance per iteration
  std::uint64_t seed = 0;  // seed of the common path this was solved on

  Eigen::Index m() const { return field.cols(); }
  double dx() const { return (x_max - x_min) / static_cast<double>(m() - 1); }
  GridCdf slice(Eigen::Index j) const;

  // Candidate with Gamma == 0, i.e. the PME law itself.
  static LimitPath pme_anchor(const PmeSolution& R, std::uint64_t seed = 0);
};

// One application of the fixed-point map: recompute Gamma from the candidate
// by a left-point Ito sum and shift the PME solution by it.
LimitPath phi_map(const LimitPath& candidate, const PmeSolution& R,
                  const GammaSpec& gamma, const ArrayXd& dW);

// Picard iteration of phi_map from the PME anchor (or a supplied candidate)
// until the sup over grid times of grid-W1 between successive iterates drops
// below cfg.tol. Throws NonConvergenceError (with the decay log) when
// max_iter is exhausted.
LimitPath fixed_point_solve(const PmeSolution& R, const GammaSpec& gamma,
                            const ArrayXd& dW, const FixedPointConfig& cfg,
                            const LimitPath* initial_candidate = nullptr,
                            std::uint64_t seed = 0);

// Weak-form defect of the SPDE
//   dG = [-B(G)_x + Sigma(G)_xx + (1/2) gamma^2 G_xx] dt - gamma G_x dW
// against a family of bumps, all spatial derivatives moved onto the test
// function. Uses the path's stored left-point gamma values when present,
// otherwise evaluates `gamma` on the slices.
double spde_weak_residual(const LimitPath& path, const RankFunctionSpec& b,
                          const RankFunctionSpec& sigma, const GammaSpec& gamma,
                          const ArrayXd& dW,
                          std::span<const BumpTestFunction> test_fns);

}  // namespace ranklab
