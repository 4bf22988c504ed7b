#include "ranklab/weak_form.hpp"

#include <cmath>
#include <memory>

#include "ranklab/errors.hpp"

namespace ranklab {

BumpTestFunction::BumpTestFunction(double center, double width)
    : center_(center), width_(width) {
  if (!(width > 0.0)) {
    throw DomainError("BumpTestFunction: width must be positive");
  }
}

double BumpTestFunction::operator()(double x) const {
  const double u = (x - center_) / width_;
  if (std::abs(u) >= 1.0) return 0.0;
  return std::exp(-1.0 / (1.0 - u * u));
}

double BumpTestFunction::dx(double x) const {
  const double u = (x - center_) / width_;
  if (std::abs(u) >= 1.0) return 0.0;
  const double q = 1.0 / (1.0 - u * u);
  return std::exp(-q) * (-2.0 * u * q * q) / width_;
}

double BumpTestFunction::dxx(double x) const {
  const double u = (x - center_) / width_;
  if (std::abs(u) >= 1.0) return 0.0;
  const double q = 1.0 / (1.0 - u * u);
  const double q2 = q * q;
  const double psi = std::exp(-q);
  const double d2 = -2.0 * q2 - 8.0 * u * u * q2 * q + 4.0 * u * u * q2 * q2;
  return psi * d2 / (width_ * width_);
}

std::vector<BumpTestFunction> default_bumps(double x_min, double x_max,
                                            int count) {
  if (count < 1) throw DomainError("default_bumps: count must be >= 1");
  const double span = x_max - x_min;
  std::vector<BumpTestFunction> bumps;
  bumps.reserve(count);
  for (int k = 0; k < count; ++k) {
    const double frac = (count == 1) ? 0.5
                                     : 0.25 + 0.5 * static_cast<double>(k) /
                                                  static_cast<double>(count - 1);
    const double width = span * (0.10 + 0.02 * (k % 3));
    bumps.emplace_back(x_min + frac * span, width);
  }
  return bumps;
}

namespace {

// Cumulative Simpson table of an integrand over [0,1], linearly interpolated.
std::function<double(double)> tabulated_antiderivative(
    std::function<double(double)> integrand) {
  constexpr int kCells = 4096;
  auto table = std::make_shared<ArrayXd>(kCells + 1);
  (*table)[0] = 0.0;
  const double h = 1.0 / kCells;
  for (int j = 0; j < kCells; ++j) {
    const double a = j * h;
    (*table)[j + 1] = (*table)[j] +
                      h / 6.0 *
                          (integrand(a) + 4.0 * integrand(a + 0.5 * h) +
                           integrand(a + h));
  }
  return [table](double r) {
    const double t = r * kCells;
    const auto j =
        std::min<Eigen::Index>(static_cast<Eigen::Index>(t), kCells - 1);
    const double frac = t - static_cast<double>(j);
    return (*table)[j] + frac * ((*table)[j + 1] - (*table)[j]);
  };
}

}  // namespace

std::function<double(double)> make_antiderivative_B(const RankFunctionSpec& b) {
  if (b.kind() != RankFunctionKind::kRegistry || b.has_closed_form_B()) {
    return [b](double r) { return antiderivative_B(b, r); };
  }
  return tabulated_antiderivative([b](double a) { return b(a); });
}

std::function<double(double)> make_antiderivative_Sigma(
    const RankFunctionSpec& sigma) {
  if (sigma.kind() != RankFunctionKind::kRegistry ||
      sigma.has_closed_form_Sigma()) {
    return [sigma](double r) { return antiderivative_Sigma(sigma, r); };
  }
  return tabulated_antiderivative([sigma](double a) {
    const double v = sigma(a);
    return 0.5 * v * v;
  });
}

double weak_form_residual(const MatrixXd& field, const ArrayXd& times,
                          double x_min, double dx,
                          const std::function<double(double)>& big_b,
                          const std::function<double(double)>& big_sigma,
                          const ArrayXd& gamma_values, const ArrayXd& dW,
                          std::span<const BumpTestFunction> test_fns) {
  const auto num_times = field.rows();
  const auto m = field.cols();
  if (times.size() != num_times) {
    throw GridMismatchError("weak_form_residual: times/field mismatch");
  }
  const bool stochastic = gamma_values.size() > 0;
  if (stochastic && (gamma_values.size() != num_times - 1 ||
                     dW.size() != num_times - 1)) {
    throw GridMismatchError("weak_form_residual: gamma/dW length mismatch");
  }
  const double x_max = x_min + dx * static_cast<double>(m - 1);
  const auto num_fns = static_cast<Eigen::Index>(test_fns.size());

  MatrixXd phi(num_fns, m), phix(num_fns, m), phixx(num_fns, m);
  for (Eigen::Index f = 0; f < num_fns; ++f) {
    const auto& bump = test_fns[f];
    if (bump.center() - bump.width() <= x_min ||
        bump.center() + bump.width() >= x_max) {
      throw DomainError("weak_form_residual: test-function support touches "
                        "the grid boundary");
    }
    for (Eigen::Index j = 0; j < m; ++j) {
      const double x = x_min + static_cast<double>(j) * dx;
      phi(f, j) = bump(x);
      phix(f, j) = bump.dx(x);
      phixx(f, j) = bump.dxx(x);
    }
  }

  const auto trapz = [m, dx](const ArrayXd& weights, const ArrayXd& values) {
    double s = (weights * values).sum() -
               0.5 * (weights[0] * values[0] + weights[m - 1] * values[m - 1]);
    return s * dx;
  };

  ArrayXd defect = ArrayXd::Zero(num_fns);
  ArrayXd row(m), brow(m), srow(m), w(m);
  for (Eigen::Index k = 0; k + 1 < num_times; ++k) {
    row = field.row(k).transpose().array();
    brow = row.unaryExpr(big_b);
    srow = row.unaryExpr(big_sigma);
    const double dt = times[k + 1] - times[k];
    for (Eigen::Index f = 0; f < num_fns; ++f) {
      w = phix.row(f).transpose().array();
      double drift = trapz(brow, w);
      double ito = 0.0;
      if (stochastic) {
        const double g = gamma_values[k];
        ito = g * dW[k] * trapz(row, w);
        w = phixx.row(f).transpose().array();
        drift += trapz(srow, w) + 0.5 * g * g * trapz(row, w);
      } else {
        w = phixx.row(f).transpose().array();
        drift += trapz(srow, w);
      }
      defect[f] += dt * drift + ito;
    }
  }
  row = field.row(num_times - 1).transpose().array();
  ArrayXd first = field.row(0).transpose().array();
  for (Eigen::Index f = 0; f < num_fns; ++f) {
    w = phi.row(f).transpose().array();
    defect[f] = trapz(row, w) - trapz(first, w) - defect[f];
  }
  return defect.abs().maxCoeff();
}

}  // namespace ranklab
