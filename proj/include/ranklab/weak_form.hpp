#pragma once

#include <functional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "ranklab/coefficients.hpp"

namespace ranklab {

using Eigen::MatrixXd;

// Smooth compactly supported bump phi(x) = psi((x - center)/width) with
// psi(u) = exp(-1/(1-u^2)) for |u| < 1 and 0 outside.
class BumpTestFunction {
public:
  BumpTestFunction(double center, double width);

  double operator()(double x) const;
  double dx(double x) const;
  double dxx(double x) const;

  double center() const { return center_; }
  double width() const { return width_; }

private:
  double center_;
  double width_;
};

// A family of `count` bumps with staggered centers and widths, all supported
// strictly inside (x_min, x_max).
std::vector<BumpTestFunction> default_bumps(double x_min, double x_max,
                                            int count);

// Fast antiderivative evaluators for the PDE kernels: closed forms where the
// spec kind has one, otherwise a precomputed cumulative-Simpson table with
// linear interpolation (resolution 2^-12, error far below scheme error).
std::function<double(double)> make_antiderivative_B(const RankFunctionSpec& b);
std::function<double(double)> make_antiderivative_Sigma(
    const RankFunctionSpec& sigma);

// Weak-form defect shared by the PME and SPDE residual checks:
//   int G(T) phi - int G(0) phi
//     - sum_j dt_j [ int B(G_j) phi_x + int Sigma(G_j) phi_xx
//                    + (1/2) gamma_j^2 int G_j phi_xx ]
//     - sum_j gamma_j dW_j int G_j phi_x
// with left-point (Ito) time evaluation and trapezoidal space quadrature.
// Passing empty gamma_values/dW gives the deterministic PME defect. Returns
// the max |defect| over the test family. Throws DomainError if any bump's
// support reaches the grid boundary.
double weak_form_residual(const MatrixXd& field, const ArrayXd& times,
                          double x_min, double dx,
                          const std::function<double(double)>& big_b,
                          const std::function<double(double)>& big_sigma,
                          const ArrayXd& gamma_values, const ArrayXd& dW,
                          std::span<const BumpTestFunction> test_fns);

}  // namespace ranklab
