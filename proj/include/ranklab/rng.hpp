#pragma once

#include <array>
#include <cstdint>
#include <string>

namespace ranklab {

// One Philox-4x32-10 block: 128-bit counter, 64-bit key, 128 bits out.
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> counter,
                                        std::array<std::uint32_t, 2> key);

// Stream namespaces. A stream is identified by (seed, domain, substream);
// the domain tag occupies the top nibble of counter word 3, so substreams
// up to 2^60 never collide across domains.
enum class StreamDomain : std::uint32_t {
  kCommon = 1,        // the shared Brownian motion W
  kIdiosyncratic = 2, // per-particle Brownian motions B_i (substream = i)
  kInitial = 3,       // per-particle initial-condition uniforms (substream = i)
  kBridge = 4,        // Brownian-bridge midpoint refinements (substream = level)
  kProbe = 5,         // Lipschitz probe measure generation
  kReplica = 6,       // replica seed derivation in the harness
};

// Counter-based random stream with O(1) random access by draw index.
// Draws with the same (seed, domain, substream, index) are identical in any
// process, thread, or system size; that is the whole point.
class CounterStream {
public:
  CounterStream(std::uint64_t seed, StreamDomain domain,
                std::uint64_t substream = 0);

  std::uint64_t raw(std::uint64_t index) const;

  // Uniform on the open interval (0,1): (2k+1)/2^53 for k < 2^52.
  double uniform(std::uint64_t index) const;

  // Standard normal via Box-Muller on one block (the sine branch is
  // discarded to keep index -> value a pure function of one block).
  double normal(std::uint64_t index) const;

  std::uint64_t seed() const { return seed_; }
  std::string describe() const;

private:
  std::uint64_t seed_;
  StreamDomain domain_;
  std::uint64_t substream_;
};

// Derives a child seed, used for per-replica seeds in the harness.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index);

}  // namespace ranklab
