#include "ranklab/measures.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "ranklab/errors.hpp"

namespace ranklab {

namespace {
// Input CDFs may wobble by roundoff; anything worse is a real error.
constexpr double kMaxMonotoneViolation = 1e-9;

void print_float(std::ostream& out, double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  out << buf;
}
}  // namespace

double monotone_repair(ArrayXd& values) {
  double worst = 0.0;
  double running = values[0];
  for (Eigen::Index j = 0; j < values.size(); ++j) {
    if (values[j] < running) {
      worst = std::max(worst, running - values[j]);
      values[j] = running;
    } else {
      running = values[j];
    }
    values[j] = std::clamp(values[j], 0.0, 1.0);
    running = values[j];
  }
  return worst;
}

EmpiricalMeasure::EmpiricalMeasure(ArrayXd points) : points_(std::move(points)) {
  if (points_.size() < 1) {
    throw DomainError("EmpiricalMeasure: needs at least one atom");
  }
  std::sort(points_.begin(), points_.end());
}

EmpiricalMeasure EmpiricalMeasure::from_sorted(ArrayXd points) {
  if (points.size() < 1) {
    throw DomainError("EmpiricalMeasure: needs at least one atom");
  }
  EmpiricalMeasure mu;
  mu.points_ = std::move(points);
  return mu;
}

double EmpiricalMeasure::cdf(double x) const {
  const auto count =
      std::upper_bound(points_.begin(), points_.end(), x) - points_.begin();
  return static_cast<double>(count) / static_cast<double>(points_.size());
}

double EmpiricalMeasure::quantile(double u) const {
  if (!(u > 0.0 && u < 1.0)) {
    throw DomainError("EmpiricalMeasure::quantile: u must lie in (0,1)");
  }
  const auto n = points_.size();
  auto k = static_cast<Eigen::Index>(
      std::ceil(u * static_cast<double>(n)));
  k = std::clamp<Eigen::Index>(k, 1, n);
  return points_[k - 1];
}

EmpiricalMeasure EmpiricalMeasure::shifted(double c) const {
  return from_sorted(points_ + c);
}

void EmpiricalMeasure::write_csv(std::ostream& out) const {
  out << "x\n";
  for (Eigen::Index i = 0; i < points_.size(); ++i) {
    print_float(out, points_[i]);
    out << '\n';
  }
}

GridCdf::GridCdf(RawTag, double x_min, double x_max, ArrayXd values)
    : x_min_(x_min),
      x_max_(x_max),
      dx_((x_max - x_min) / static_cast<double>(values.size() - 1)),
      values_(std::move(values)) {}

GridCdf::GridCdf(double x_min, double x_max, ArrayXd values,
                 double boundary_mass_tol)
    : GridCdf(RawTag{}, x_min, x_max, std::move(values)) {
  if (!(x_min < x_max)) {
    throw DomainError("GridCdf: x_min must be below x_max");
  }
  if (values_.size() < 2) {
    throw DomainError("GridCdf: needs at least two nodes");
  }
  if (values_[0] > boundary_mass_tol ||
      values_[values_.size() - 1] < 1.0 - boundary_mass_tol) {
    throw DomainError("GridCdf: more than boundary_mass_tol of mass lies "
                      "outside the grid");
  }
  double worst = 0.0;
  for (Eigen::Index j = 1; j < values_.size(); ++j) {
    worst = std::max(worst, values_[j - 1] - values_[j]);
  }
  if (worst > kMaxMonotoneViolation) {
    throw DomainError("GridCdf: values decrease by more than roundoff");
  }
  monotone_repair(values_);
  values_[0] = 0.0;
  values_[values_.size() - 1] = 1.0;
}

GridCdf GridCdf::of_empirical(const EmpiricalMeasure& mu, double x_min,
                              double x_max, Eigen::Index m,
                              double boundary_mass_tol) {
  return from_function(
      x_min, x_max, m, [&mu](double x) { return mu.cdf(x); },
      boundary_mass_tol);
}

double GridCdf::operator()(double x) const {
  if (x <= x_min_) return x == x_min_ ? values_[0] : 0.0;
  if (x >= x_max_) return x == x_max_ ? values_[values_.size() - 1] : 1.0;
  const double t = (x - x_min_) / dx_;
  auto j = static_cast<Eigen::Index>(t);
  j = std::clamp<Eigen::Index>(j, 0, values_.size() - 2);
  const double frac = t - static_cast<double>(j);
  return values_[j] + frac * (values_[j + 1] - values_[j]);
}

double GridCdf::quantile(double u) const {
  if (!(u > 0.0 && u < 1.0)) {
    throw DomainError("GridCdf::quantile: u must lie in (0,1)");
  }
  const auto first = std::lower_bound(values_.begin(), values_.end(), u);
  auto j = first - values_.begin();
  if (j == 0) return x_min_;
  const double lo = values_[j - 1];
  const double hi = values_[j];
  return x(j - 1) + dx_ * (u - lo) / (hi - lo);
}

GridCdf GridCdf::shifted(double c, double boundary_mass_tol) const {
  if (c == 0.0) return *this;
  const double lost_left = (*this)(x_min_ - c);
  const double lost_right = 1.0 - (*this)(x_max_ - c);
  if (lost_left > boundary_mass_tol || lost_right > boundary_mass_tol) {
    throw TruncationOverflowError(
        "GridCdf::shifted: shift by " + std::to_string(c) +
        " would move more than boundary_mass_tol of mass off the grid");
  }
  ArrayXd v(values_.size());
  for (Eigen::Index j = 0; j < values_.size(); ++j) {
    v[j] = (*this)(x(j) - c);
  }
  GridCdf out(RawTag{}, x_min_, x_max_, std::move(v));
  monotone_repair(out.values_);
  out.values_[0] = 0.0;
  out.values_[out.values_.size() - 1] = 1.0;
  return out;
}

bool GridCdf::same_grid(const GridCdf& other) const {
  return x_min_ == other.x_min_ && x_max_ == other.x_max_ &&
         values_.size() == other.values_.size();
}

void GridCdf::write_csv(std::ostream& out) const {
  out << "x,F\n";
  for (Eigen::Index j = 0; j < values_.size(); ++j) {
    print_float(out, x(j));
    out << ',';
    print_float(out, values_[j]);
    out << '\n';
  }
}

WassersteinOrder::WassersteinOrder(double order) : p(order) {
  if (!(p >= 1.0)) {
    throw DomainError("WassersteinOrder: p must be >= 1");
  }
}

namespace {

double power_mean(const ArrayXd& abs_diffs, double p) {
  if (p == 1.0) return abs_diffs.mean();
  if (p == 2.0) return std::sqrt(abs_diffs.square().mean());
  return std::pow(abs_diffs.pow(p).mean(), 1.0 / p);
}

}  // namespace

double wasserstein(const EmpiricalMeasure& mu, const EmpiricalMeasure& nu,
                   WassersteinOrder order) {
  if (mu.size() == nu.size()) {
    const ArrayXd diffs = (mu.points() - nu.points()).abs();
    return power_mean(diffs, order.p);
  }
  const auto n = 4 * std::max(mu.size(), nu.size());
  ArrayXd diffs(n);
  for (Eigen::Index j = 0; j < n; ++j) {
    const double u = (static_cast<double>(j) + 0.5) / static_cast<double>(n);
    diffs[j] = std::abs(mu.quantile(u) - nu.quantile(u));
  }
  return power_mean(diffs, order.p);
}

double w1_from_cdfs(const GridCdf& f, const GridCdf& g) {
  if (!f.same_grid(g)) {
    throw GridMismatchError("w1_from_cdfs: CDFs live on different grids");
  }
  const ArrayXd diff = (f.values() - g.values()).abs();
  const auto m = diff.size();
  double sum = diff.sum() - 0.5 * (diff[0] + diff[m - 1]);
  return sum * f.dx();
}

// Integrates |piecewise-constant - piecewise-linear| in the quantile
// variable. Both pieces are walked in lockstep over the union of their
// breakpoints, and each cell is integrated in closed form.
double w1(const EmpiricalMeasure& mu, const GridCdf& g) {
  const auto n = mu.size();
  const ArrayXd& pts = mu.points();
  const ArrayXd& v = g.values();

  const auto segment_abs = [](double da, double db, double width) {
    if ((da >= 0.0) == (db >= 0.0)) {
      return 0.5 * (std::abs(da) + std::abs(db)) * width;
    }
    return 0.5 * width * (da * da + db * db) / (std::abs(da) + std::abs(db));
  };

  double total = 0.0;
  Eigen::Index seg = 0;  // invariant: v[seg] <= u, so runs have positive width
  double u = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double u_top = static_cast<double>(i + 1) / static_cast<double>(n);
    const double q_emp = pts[i];
    while (u < u_top) {
      while (seg + 2 < v.size() && v[seg + 1] <= u) ++seg;
      const double cell_top = std::min(u_top, v[seg + 1]);
      const double slope = g.dx() / (v[seg + 1] - v[seg]);
      const double q_lo = g.x(seg) + slope * (u - v[seg]);
      const double q_hi = g.x(seg) + slope * (cell_top - v[seg]);
      total += segment_abs(q_emp - q_lo, q_emp - q_hi, cell_top - u);
      u = cell_top;
    }
    u = u_top;
  }
  return total;
}

}  // namespace ranklab
