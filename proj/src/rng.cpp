#include "ranklab/rng.hpp"

#include <cmath>

#include "ranklab/errors.hpp"

namespace ranklab {

namespace {

constexpr std::uint32_t kPhiloxM0 = 0xD2511F53u;
constexpr std::uint32_t kPhiloxM1 = 0xCD9E8D57u;
constexpr std::uint32_t kPhiloxW0 = 0x9E3779B9u;
constexpr std::uint32_t kPhiloxW1 = 0xBB67AE85u;

inline void round_once(std::array<std::uint32_t, 4>& x,
                       const std::array<std::uint32_t, 2>& key) {
  const std::uint64_t p0 = static_cast<std::uint64_t>(kPhiloxM0) * x[0];
  const std::uint64_t p1 = static_cast<std::uint64_t>(kPhiloxM1) * x[2];
  const std::uint32_t hi0 = static_cast<std::uint32_t>(p0 >> 32);
  const std::uint32_t lo0 = static_cast<std::uint32_t>(p0);
  const std::uint32_t hi1 = static_cast<std::uint32_t>(p1 >> 32);
  const std::uint32_t lo1 = static_cast<std::uint32_t>(p1);
  x = {hi1 ^ x[1] ^ key[0], lo1, hi0 ^ x[3] ^ key[1], lo0};
}

constexpr double kTwoNeg53 = 1.0 / 9007199254740992.0;  // 2^-53

}  // namespace

std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> counter,
                                        std::array<std::uint32_t, 2> key) {
  for (int r = 0; r < 10; ++r) {
    round_once(counter, key);
    key[0] += kPhiloxW0;
    key[1] += kPhiloxW1;
  }
  return counter;
}

CounterStream::CounterStream(std::uint64_t seed, StreamDomain domain,
                             std::uint64_t substream)
    : seed_(seed), domain_(domain), substream_(substream) {
  if (substream >> 60 != 0) {
    throw DomainError("CounterStream: substream must be below 2^60");
  }
}

std::uint64_t CounterStream::raw(std::uint64_t index) const {
  const std::array<std::uint32_t, 4> counter = {
      static_cast<std::uint32_t>(index),
      static_cast<std::uint32_t>(index >> 32),
      static_cast<std::uint32_t>(substream_),
      static_cast<std::uint32_t>(substream_ >> 32) |
          (static_cast<std::uint32_t>(domain_) << 28)};
  const std::array<std::uint32_t, 2> key = {
      static_cast<std::uint32_t>(seed_),
      static_cast<std::uint32_t>(seed_ >> 32)};
  const auto block = philox4x32(counter, key);
  return static_cast<std::uint64_t>(block[0]) |
         (static_cast<std::uint64_t>(block[1]) << 32);
}

double CounterStream::uniform(std::uint64_t index) const {
  const std::uint64_t bits = raw(index);
  return (static_cast<double>(bits >> 12) * 2.0 + 1.0) * kTwoNeg53;
}

double CounterStream::normal(std::uint64_t index) const {
  const std::array<std::uint32_t, 4> counter = {
      static_cast<std::uint32_t>(index),
      static_cast<std::uint32_t>(index >> 32),
      static_cast<std::uint32_t>(substream_),
      static_cast<std::uint32_t>(substream_ >> 32) |
          (static_cast<std::uint32_t>(domain_) << 28)};
  const std::array<std::uint32_t, 2> key = {
      static_cast<std::uint32_t>(seed_),
      static_cast<std::uint32_t>(seed_ >> 32)};
  const auto block = philox4x32(counter, key);
  const std::uint64_t w1 = static_cast<std::uint64_t>(block[0]) |
                           (static_cast<std::uint64_t>(block[1]) << 32);
  const std::uint64_t w2 = static_cast<std::uint64_t>(block[2]) |
                           (static_cast<std::uint64_t>(block[3]) << 32);
  const double u1 = (static_cast<double>(w1 >> 12) * 2.0 + 1.0) * kTwoNeg53;
  const double u2 = (static_cast<double>(w2 >> 12) * 2.0 + 1.0) * kTwoNeg53;
  return std::sqrt(-2.0 * std::log(u1)) *
         std::cos(6.283185307179586476925286766559 * u2);
}

std::string CounterStream::describe() const {
  return "philox4x32(seed=" + std::to_string(seed_) +
         ",domain=" + std::to_string(static_cast<std::uint32_t>(domain_)) +
         ",substream=" + std::to_string(substream_) + ")";
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) {
  return CounterStream(seed, StreamDomain::kReplica, 0).raw(index);
}

}  // namespace ranklab
