#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ranklab/rng.hpp"

namespace ranklab {

using Eigen::ArrayXd;

// Seeded Brownian increments for one run. The common stream depends only on
// (seed), and particle i's idiosyncratic and initial-condition streams only
// on (seed, i), so increments are identical across system sizes: growing n
// adds particles without disturbing the ones already there.
class NoiseBundle {
public:
  NoiseBundle(std::uint64_t seed, double dt, int num_steps);

  std::uint64_t seed() const { return seed_; }
  double dt() const { return dt_; }
  int num_steps() const { return num_steps_; }

  // Common-noise increment over [t_j, t_j+1], i.e. sqrt(dt) * N(0,1).
  double common_increment(int j) const;
  // Particle i's idiosyncratic increment over the same interval.
  double idio_increment(int i, int j) const;
  // Particle i's inverse-CDF sampling uniform for the initial condition.
  double initial_uniform(int i) const;

  ArrayXd common_increments() const;  // length num_steps

  std::vector<std::string> lineage() const;

private:
  std::uint64_t seed_;
  double dt_;
  double sqrt_dt_;
  int num_steps_;
  CounterStream common_;
};

// A discretised common-noise path that can be refined in place by Brownian
// bridge midpoint sampling: coarse increments are preserved exactly as sums
// of their two children, so refinement studies stay on one realization.
class BrownianPath {
public:
  static BrownianPath from_bundle(const NoiseBundle& bundle);

  BrownianPath refined() const;

  double dt() const { return dt_; }
  int level() const { return level_; }
  const ArrayXd& increments() const { return increments_; }

  // W(t_j) for j = 0..num_steps, starting at 0.
  ArrayXd path() const;

private:
  BrownianPath(std::uint64_t seed, double dt, int level, ArrayXd increments);
  std::uint64_t seed_;
  double dt_;
  int level_;
  ArrayXd increments_;
};

}  // namespace ranklab
