#pragma once

#include <cstdint>
#include <random>

#include "mimo_ppsnr/cxmat.hpp"

namespace mimo {

/// What a substream is used for. Mixed into the key so that, for example, the
/// data noise of a packet does not depend on whether channel estimation drew
/// anything first.
enum class DrawPurpose : std::uint64_t {
  kChannel = 1,
  kPacket = 2,
  kTrainingNoise = 3,
  kEstimationError = 4,
  kData = 5,
  kTrial = 6,
  kUser = 7,
};

struct StreamId {
  std::uint64_t channel = 0;
  std::uint64_t packet = 0;
};

/// Keyed random stream. The generator state is a pure function of
/// (seed, channel, packet, purpose, lane), so any work unit can be replayed
/// in isolation and in any order.
class RngStream {
 public:
  RngStream(std::uint64_t seed, StreamId id, DrawPurpose purpose = DrawPurpose::kUser,
            std::uint64_t lane = 0);

  /// Independent child stream; does not advance this stream.
  RngStream fork(DrawPurpose purpose, std::uint64_t lane = 0) const;

  std::uint64_t next_u64() { return engine_(); }
  /// Uniform on (0, 1].
  double uniform();
  /// Standard normal via Box-Muller. Spare values are cached.
  double gaussian();
  /// Zero-mean circularly symmetric complex Gaussian with E|z|^2 = variance.
  Cx complex_gaussian(double variance);

  std::uint64_t key() const noexcept { return key_; }

 private:
  explicit RngStream(std::uint64_t key);

  std::uint64_t key_;
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

/// SplitMix64 finalizer; exposed for deterministic key derivation.
std::uint64_t mix64(std::uint64_t x) noexcept;

}  // namespace mimo
