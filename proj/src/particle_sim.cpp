#include "ranklab/particle_sim.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "ranklab/errors.hpp"

namespace ranklab {

int SimConfig::num_steps() const {
  return static_cast<int>(std::llround(horizon / dt));
}

void SimConfig::validate_steps() {
  if (n < 1) throw DomainError("SimConfig: n must be >= 1");
  if (!(dt > 0.0)) throw DomainError("SimConfig: dt must be positive");
  if (!(horizon > 0.0)) throw DomainError("SimConfig: horizon must be positive");
  const int steps = num_steps();
  const double covered = steps * dt;
  if (std::abs(covered - horizon) > 1e-9 * std::max(1.0, horizon)) {
    warnings.push_back("horizon/dt is not a whole number of steps; using " +
                       std::to_string(steps) + " steps covering " +
                       std::to_string(covered));
  }
}

Eigen::ArrayXi rank_counts(const ArrayXd& values) {
  const auto n = values.size();
  std::vector<Eigen::Index> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  std::sort(perm.begin(), perm.end(), [&values](Eigen::Index a, Eigen::Index b) {
    return values[a] < values[b] || (values[a] == values[b] && a < b);
  });
  Eigen::ArrayXi counts(n);
  Eigen::Index k = 0;
  while (k < n) {
    Eigen::Index g = k + 1;
    while (g < n && values[perm[g]] == values[perm[k]]) ++g;
    for (Eigen::Index a = k; a < g; ++a) {
      counts[perm[a]] = static_cast<int>(g);  // <=-count shared across ties
    }
    k = g;
  }
  return counts;
}

EmpiricalMeasure sample_initial(const SimConfig& config) {
  NoiseBundle bundle(config.seed, config.dt, config.num_steps());
  ArrayXd draws(config.n);
  for (int i = 0; i < config.n; ++i) {
    draws[i] = config.initial_law.quantile(bundle.initial_uniform(i));
  }
  return EmpiricalMeasure(std::move(draws));
}

ArrayXd em_step(const ArrayXd& positions, double t, double dW,
                const ArrayXd& dB, const CoefficientTriple& specs, double dt) {
  const auto n = positions.size();
  if (dB.size() != n) {
    throw DomainError("em_step: idiosyncratic increment count != n");
  }
  const double gamma =
      specs.gamma(t, EmpiricalMeasure::from_sorted(positions));
  const double common = gamma * dW;

  ArrayXd next(n);
  Eigen::Index k = 0;
  while (k < n) {
    Eigen::Index g = k + 1;
    while (g < n && positions[g] == positions[k]) ++g;
    const double rank = static_cast<double>(g) / static_cast<double>(n);
    const double drift = specs.b(rank) * dt;
    const double vol = specs.sigma(rank);
    for (Eigen::Index a = k; a < g; ++a) {
      next[a] = positions[a] + drift + vol * dB[a] + common;
    }
    k = g;
  }
  if (!next.allFinite()) {
    throw BlowupError("em_step: non-finite position", -1);
  }
  std::sort(next.begin(), next.end());
  return next;
}

TrajectoryRecord simulate(const SimConfig& config) {
  const int n = config.n;
  const int steps = config.num_steps();
  NoiseBundle bundle(config.seed, config.dt, steps);

  // Coefficients only ever see ranks k/n, so evaluate them once per rank.
  ArrayXd drift_dt(n), vol(n);
  for (int k = 1; k <= n; ++k) {
    const double rank = static_cast<double>(k) / static_cast<double>(n);
    drift_dt[k - 1] = config.coefficients.b(rank) * config.dt;
    vol[k - 1] = config.coefficients.sigma(rank);
  }

  ArrayXd y(n);
  for (int i = 0; i < n; ++i) {
    y[i] = config.initial_law.quantile(bundle.initial_uniform(i));
  }

  TrajectoryRecord traj;
  traj.times.resize(steps + 1);
  for (int j = 0; j <= steps; ++j) traj.times[j] = j * config.dt;
  traj.gamma_integral = ArrayXd::Zero(steps + 1);
  traj.states.reserve(steps + 1);
  traj.lineage = bundle.lineage();
  if (config.retain_positions) {
    traj.raw_y_.resize(steps + 1, n);
  }

  std::vector<Eigen::Index> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  ArrayXd sorted_y(n);
  const bool gamma_off = config.coefficients.gamma.is_zero();

  for (int j = 0; j <= steps; ++j) {
    std::sort(perm.begin(), perm.end(), [&y](Eigen::Index a, Eigen::Index b) {
      return y[a] < y[b] || (y[a] == y[b] && a < b);
    });
    for (int k = 0; k < n; ++k) sorted_y[k] = y[perm[k]];

    const double shift = traj.gamma_integral[j];
    traj.states.push_back(
        EmpiricalMeasure::from_sorted(shift == 0.0 ? sorted_y
                                                   : (sorted_y + shift).eval()));
    if (config.retain_positions) {
      traj.raw_y_.row(j) = y.transpose();
    }
    if (j == steps) break;

    if (!gamma_off) {
      const double g =
          config.coefficients.gamma(traj.times[j], traj.states.back());
      traj.gamma_integral[j + 1] =
          traj.gamma_integral[j] + g * bundle.common_increment(j);
    }

    // Rank-based update of the decomposed process; the common shift does
    // not enter Y at all.
    Eigen::Index k = 0;
    while (k < n) {
      Eigen::Index g = k + 1;
      while (g < n && sorted_y[g] == sorted_y[k]) ++g;
      for (Eigen::Index a = k; a < g; ++a) {
        const Eigen::Index i = perm[a];
        y[i] += drift_dt[g - 1] + vol[g - 1] * bundle.idio_increment(
                                                   static_cast<int>(i), j);
      }
      k = g;
    }
    if (!y.allFinite()) {
      throw BlowupError("simulate: non-finite particle position", j);
    }
  }
  return traj;
}

MatrixXd TrajectoryRecord::raw_positions() const {
  if (!has_raw()) {
    throw DomainError("TrajectoryRecord: raw positions were not retained");
  }
  MatrixXd x = raw_y_;
  for (Eigen::Index j = 0; j < x.rows(); ++j) {
    x.row(j).array() += gamma_integral[j];
  }
  return x;
}

const MatrixXd& TrajectoryRecord::raw_decomposed() const {
  if (!has_raw()) {
    throw DomainError("TrajectoryRecord: raw positions were not retained");
  }
  return raw_y_;
}

TrajectoryRecord decompose_y(const TrajectoryRecord& traj) {
  if (!traj.has_raw()) {
    throw DomainError("decompose_y: trajectory has no retained raw positions");
  }
  TrajectoryRecord out;
  out.times = traj.times;
  out.gamma_integral = ArrayXd::Zero(traj.gamma_integral.size());
  out.raw_y_ = traj.raw_y_;
  out.lineage = traj.lineage;
  out.lineage.push_back("decomposed: Y = X - Gamma");
  out.states.reserve(traj.states.size());
  for (Eigen::Index j = 0; j < out.raw_y_.rows(); ++j) {
    ArrayXd row = out.raw_y_.row(j).transpose().array();
    out.states.emplace_back(std::move(row));
  }
  return out;
}

}  // namespace ranklab
