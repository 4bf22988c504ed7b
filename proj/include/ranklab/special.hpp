#pragma once

#include <functional>

namespace ranklab {

// Standard normal density.
double normal_pdf(double x);

// Standard normal CDF, accurate over the whole line (erfc-based).
double normal_cdf(double x);

// Inverse of normal_cdf on (0,1). Rational initial guess refined by one
// Halley step; absolute error is a few ulps. Throws DomainError outside (0,1).
double normal_quantile(double u);

// Adaptive Simpson quadrature of f over [a,b] to absolute tolerance tol.
double adaptive_simpson(const std::function<double(double)>& f, double a,
                        double b, double tol);

}  // namespace ranklab
