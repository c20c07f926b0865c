#pragma once

#include <cstdint>
#include <random>

namespace spellkit {

/// Deterministic random stream keyed by (seed, stream id).
///
/// Substreams are derived by hashing the parent stream id with the child
/// index, so a master seed plus a fixed task numbering yields the same
/// draws no matter how the work is scheduled across threads. All mapping
/// from raw bits to doubles is done here, not with std::distributions,
/// to keep sequences identical across standard-library implementations.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed, std::uint64_t stream = 0);

  std::uint64_t next_u64();

  /// Uniform double in [0, 1) with 53-bit resolution.
  double uniform();

  /// Independent child stream; substream(i) != substream(j) for i != j.
  RngStream substream(std::uint64_t index) const;

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream() const { return stream_; }

 private:
  std::uint64_t seed_;
  std::uint64_t stream_;
  std::mt19937_64 gen_;
};

}  // namespace spellkit
