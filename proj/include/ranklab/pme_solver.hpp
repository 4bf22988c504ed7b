#pragma once

#include <span>
#include <utility>

#include <Eigen/Dense>

#include "ranklab/coefficients.hpp"
#include "ranklab/measures.hpp"
#include "ranklab/weak_form.hpp"

namespace ranklab {

// Space-time discretisation of the porous medium equation
//   R_t = -B(R)_x + Sigma(R)_xx.
struct PmeGrid {
  double x_min = -8.0;
  double x_max = 8.0;
  Eigen::Index m = 801;
  double dt_pde = 1e-4;
  double horizon = 1.0;
  double cfl_safety = 0.9;

  double dx() const { return (x_max - x_min) / static_cast<double>(m - 1); }

  // Picks the largest dt that respects both the advective and diffusive
  // constraints jointly (which also keeps the explicit update monotone).
  static PmeGrid with_cfl(double x_min, double x_max, Eigen::Index m,
                          double horizon, const RankFunctionSpec& b,
                          const RankFunctionSpec& sigma,
                          double cfl_safety = 0.9);

  // Enforces dt_pde <= cfl_safety * min(dx / max b, dx^2 / max sigma^2).
  void validate(const RankFunctionSpec& b, const RankFunctionSpec& sigma) const;
};

struct PmeSolution {
  double x_min = 0.0;
  double x_max = 1.0;
  double dt_pde = 0.0;
  ArrayXd times;   // stored sample times
  MatrixXd field;  // times.size() x m, each row a valid CDF slice
  double c_star = 0.0;  // sup over every internal step of |R_x| (central diff)
  double max_monotonicity_violation = 0.0;  // worst pre-repair defect

  Eigen::Index m() const { return field.cols(); }
  double dx() const { return (x_max - x_min) / static_cast<double>(m() - 1); }
  GridCdf slice(Eigen::Index j) const;
  // Linear interpolation in time between stored slices.
  GridCdf at_time(double t) const;
};

// Explicit conservative scheme: upwind (left) difference for B since b > 0,
// centred second difference for Sigma, Dirichlet boundaries 0 and 1, and a
// monotone repair after each step. Slices are recorded by substepping so
// they land exactly on `sample_times` (empty = every internal step).
PmeSolution solve_pme(const GridCdf& initial, const RankFunctionSpec& b,
                      const RankFunctionSpec& sigma, const PmeGrid& grid,
                      const ArrayXd& sample_times = ArrayXd());

// Max central-difference slope over stored slices. The solution's c_star
// field is the same sup taken over every internal step.
double density_bound(const PmeSolution& sol);

// Weak-form defect of the stored solution against a family of bumps.
double pme_weak_residual(const PmeSolution& sol, const RankFunctionSpec& b,
                         const RankFunctionSpec& sigma,
                         std::span<const BumpTestFunction> test_fns);

// Truncation domain wide enough for the initial mass, the drift, six
// standard deviations of diffusion, and the common-noise shift margin.
std::pair<double, double> suggest_grid_domain(const InitialLawSpec& law,
                                              const RankFunctionSpec& b,
                                              const RankFunctionSpec& sigma,
                                              const GammaSpec& gamma,
                                              double horizon,
                                              double eps = kBoundaryMassTol);

}  // namespace ranklab
