#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ranklab/coefficients.hpp"
#include "ranklab/measures.hpp"
#include "ranklab/noise.hpp"

namespace ranklab {

using Eigen::MatrixXd;

// Configuration of one n-particle Euler-Maruyama run.
struct SimConfig {
  int n = 100;
  double horizon = 1.0;
  double dt = 1e-3;
  std::uint64_t seed = 42;
  CoefficientTriple coefficients;
  InitialLawSpec initial_law = InitialLawSpec::gaussian(0.0, 1.0);
  bool retain_positions = false;

  // horizon/dt rounded to the nearest whole step; a warning is recorded in
  // `warnings` by validate_steps() when the rounding is not exact.
  int num_steps() const;
  void validate_steps();
  std::vector<std::string> warnings;
};

// One simulated path of the particle system. The simulator evolves the
// common-shift decomposition (Y, Gamma) with X = Y + Gamma, which is what
// makes decompose_y exact and the gamma == const Y-path bit-identical to the
// gamma == 0 run on the same seeds.
class TrajectoryRecord {
public:
  ArrayXd times;                         // length M+1
  std::vector<EmpiricalMeasure> states;  // X-law per time
  ArrayXd gamma_integral;                // Gamma(t_j), Gamma(0) = 0

  bool has_raw() const { return raw_y_.size() > 0; }
  // Identity-ordered raw positions X[i] at each time (rows = times).
  MatrixXd raw_positions() const;
  // The decomposed process Y = X - Gamma, exact by construction.
  const MatrixXd& raw_decomposed() const;

  std::vector<std::string> lineage;

private:
  friend TrajectoryRecord simulate(const SimConfig&);
  friend TrajectoryRecord decompose_y(const TrajectoryRecord&);
  MatrixXd raw_y_;
};

// n i.i.d. draws from the initial law via inverse-CDF sampling on the
// per-particle streams, returned sorted.
EmpiricalMeasure sample_initial(const SimConfig& config);

// One explicit Euler-Maruyama step of Eq. system: rank-dependent drift and
// diffusion plus the common term gamma(t, rho) * dW applied to everyone.
// `positions` must be sorted; the result is sorted. Tied particles share the
// same rank (the <=-count), hence identical coefficients.
ArrayXd em_step(const ArrayXd& positions, double t, double dW,
                const ArrayXd& dB, const CoefficientTriple& specs, double dt);

// Full trajectory; deterministic given the config (seed included).
TrajectoryRecord simulate(const SimConfig& config);

// Removes the accumulated common-noise shift: Y[i,j] = X[i,j] - Gamma(t_j).
// Requires retained raw positions.
TrajectoryRecord decompose_y(const TrajectoryRecord& traj);

// Ranks (<=-counts) of each entry of an arbitrarily ordered state vector.
Eigen::ArrayXi rank_counts(const ArrayXd& values);

}  // namespace ranklab
