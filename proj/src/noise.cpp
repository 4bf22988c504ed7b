#include "ranklab/noise.hpp"

#include <cmath>

#include "ranklab/errors.hpp"

namespace ranklab {

NoiseBundle::NoiseBundle(std::uint64_t seed, double dt, int num_steps)
    : seed_(seed),
      dt_(dt),
      sqrt_dt_(std::sqrt(dt)),
      num_steps_(num_steps),
      common_(seed, StreamDomain::kCommon) {
  if (!(dt > 0.0)) throw DomainError("NoiseBundle: dt must be positive");
  if (num_steps < 0) throw DomainError("NoiseBundle: negative step count");
}

double NoiseBundle::common_increment(int j) const {
  return sqrt_dt_ * common_.normal(static_cast<std::uint64_t>(j));
}

double NoiseBundle::idio_increment(int i, int j) const {
  CounterStream stream(seed_, StreamDomain::kIdiosyncratic,
                       static_cast<std::uint64_t>(i));
  return sqrt_dt_ * stream.normal(static_cast<std::uint64_t>(j));
}

double NoiseBundle::initial_uniform(int i) const {
  CounterStream stream(seed_, StreamDomain::kInitial,
                       static_cast<std::uint64_t>(i));
  return stream.uniform(0);
}

ArrayXd NoiseBundle::common_increments() const {
  ArrayXd out(num_steps_);
  for (int j = 0; j < num_steps_; ++j) out[j] = common_increment(j);
  return out;
}

std::vector<std::string> NoiseBundle::lineage() const {
  return {
      "common=" + CounterStream(seed_, StreamDomain::kCommon).describe(),
      "idiosyncratic[i]=" +
          CounterStream(seed_, StreamDomain::kIdiosyncratic, 0).describe() +
          " with substream=i",
      "initial[i]=" +
          CounterStream(seed_, StreamDomain::kInitial, 0).describe() +
          " with substream=i",
  };
}

BrownianPath::BrownianPath(std::uint64_t seed, double dt, int level,
                           ArrayXd increments)
    : seed_(seed), dt_(dt), level_(level), increments_(std::move(increments)) {}

BrownianPath BrownianPath::from_bundle(const NoiseBundle& bundle) {
  return BrownianPath(bundle.seed(), bundle.dt(), 0,
                      bundle.common_increments());
}

BrownianPath BrownianPath::refined() const {
  const auto m = increments_.size();
  ArrayXd fine(2 * m);
  CounterStream mids(seed_, StreamDomain::kBridge,
                     static_cast<std::uint64_t>(level_));
  const double half_sd = 0.5 * std::sqrt(dt_);
  for (Eigen::Index j = 0; j < m; ++j) {
    const double offset = half_sd * mids.normal(static_cast<std::uint64_t>(j));
    fine[2 * j] = 0.5 * increments_[j] + offset;
    fine[2 * j + 1] = 0.5 * increments_[j] - offset;
  }
  return BrownianPath(seed_, 0.5 * dt_, level_ + 1, std::move(fine));
}

ArrayXd BrownianPath::path() const {
  ArrayXd w(increments_.size() + 1);
  w[0] = 0.0;
  for (Eigen::Index j = 0; j < increments_.size(); ++j) {
    w[j + 1] = w[j] + increments_[j];
  }
  return w;
}

}  // namespace ranklab
