#pragma once

#include <Eigen/Dense>
#include <iosfwd>

namespace ranklab {

using Eigen::ArrayXd;

// Default tolerance for mass allowed to fall off a truncated grid.
inline constexpr double kBoundaryMassTol = 1e-6;

// Uniform probability measure on n real atoms, kept sorted nondecreasing.
// Immutable after construction; every atom carries mass exactly 1/n.
class EmpiricalMeasure {
public:
  // Sorts the given points.
  explicit EmpiricalMeasure(ArrayXd points);

  // Trusts that the points are already nondecreasing.
  static EmpiricalMeasure from_sorted(ArrayXd points);

  Eigen::Index size() const { return points_.size(); }
  const ArrayXd& points() const { return points_; }

  // Right-continuous CDF: (# atoms <= x) / n.
  double cdf(double x) const;

  // Left-continuous generalized inverse inf{x : F(x) >= u}, u in (0,1).
  double quantile(double u) const;

  EmpiricalMeasure shifted(double c) const;

  // One sorted point per line.
  void write_csv(std::ostream& out) const;

private:
  EmpiricalMeasure() = default;
  ArrayXd points_;
};

// Monotone CDF sampled on a uniform grid over [x_min, x_max], with the
// boundary values clamped to exactly 0 and 1. Construction rejects inputs
// whose truncated tail mass exceeds boundary_mass_tol, repairs sub-ulp
// monotonicity violations by running maximum, and clamps to [0,1].
class GridCdf {
public:
  GridCdf(double x_min, double x_max, ArrayXd values,
          double boundary_mass_tol = kBoundaryMassTol);

  // Samples a continuous CDF at the grid nodes.
  template <typename F>
  static GridCdf from_function(double x_min, double x_max, Eigen::Index m,
                               F&& cdf, double boundary_mass_tol = kBoundaryMassTol) {
    ArrayXd v(m);
    const double dx = (x_max - x_min) / static_cast<double>(m - 1);
    for (Eigen::Index j = 0; j < m; ++j) {
      v[j] = cdf(x_min + static_cast<double>(j) * dx);
    }
    return GridCdf(x_min, x_max, std::move(v), boundary_mass_tol);
  }

  // Projection of an empirical measure: F_n evaluated at the grid nodes.
  static GridCdf of_empirical(const EmpiricalMeasure& mu, double x_min,
                              double x_max, Eigen::Index m,
                              double boundary_mass_tol = kBoundaryMassTol);

  Eigen::Index size() const { return values_.size(); }
  double x_min() const { return x_min_; }
  double x_max() const { return x_max_; }
  double dx() const { return dx_; }
  double x(Eigen::Index j) const { return x_min_ + static_cast<double>(j) * dx_; }
  const ArrayXd& values() const { return values_; }

  // Linear interpolation between nodes; 0 left of the grid, 1 right of it.
  double operator()(double x) const;

  // inf{x : F(x) >= u} for the interpolated CDF, u in (0,1).
  double quantile(double u) const;

  // Translation by c, resampled onto the original grid. Throws
  // TruncationOverflowError if more than boundary_mass_tol of mass would
  // leave [x_min, x_max]. shifted(0) is the exact identity.
  GridCdf shifted(double c, double boundary_mass_tol = kBoundaryMassTol) const;

  bool same_grid(const GridCdf& other) const;

  // Two columns: x, F.
  void write_csv(std::ostream& out) const;

private:
  struct RawTag {};
  GridCdf(RawTag, double x_min, double x_max, ArrayXd values);
  double x_min_{0}, x_max_{1}, dx_{1};
  ArrayXd values_;
};

// Exponent of a Wasserstein distance; validates p >= 1.
struct WassersteinOrder {
  double p;
  explicit WassersteinOrder(double order);
};

// W_p between empirical measures. Equal atom counts use the order-statistics
// coupling; unequal counts are handled by quantile evaluation at the
// midpoints (j - 1/2)/N of a common refinement N = 4 * max(n1, n2).
double wasserstein(const EmpiricalMeasure& mu, const EmpiricalMeasure& nu,
                   WassersteinOrder order = WassersteinOrder(1.0));

// W_1 as the trapezoidal integral of |f - g| over the (shared) grid.
double w1_from_cdfs(const GridCdf& f, const GridCdf& g);

// W_1 between an empirical measure and a grid CDF, computed exactly as the
// integral of |Q_mu - Q_g| over (0,1) (both quantile functions are piecewise
// linear/constant, so the integral has a closed form per cell).
double w1(const EmpiricalMeasure& mu, const GridCdf& g);

// In-place running-maximum repair and clamp to [0,1]; returns the largest
// downward violation that was repaired.
double monotone_repair(ArrayXd& values);

}  // namespace ranklab
