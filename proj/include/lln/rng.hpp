#pragma once

// Counter-based random streams. A replica's stream is a pure function of
// (key, replica index), so results do not depend on how replicas are
// scheduled across threads.

#include <array>
#include <cstdint>

namespace lln {

/// Philox4x32 with 10 rounds.
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> counter,
                                        std::array<std::uint32_t, 2> key);

std::uint64_t splitmix64(std::uint64_t x);

/// Mixes a master seed with a tag (e.g. the horizon n) into a stream key.
std::uint64_t derive_key(std::uint64_t master_seed, std::uint64_t tag);

class ReplicaStream {
 public:
  ReplicaStream(std::uint64_t key, std::uint64_t replica);

  std::uint32_t next_u32();
  std::uint64_t next_u64();
  /// Uniform on the open interval (0, 1), 53-bit resolution.
  double next_uniform();

 private:
  void refill();

  std::array<std::uint32_t, 2> key_;
  std::uint64_t replica_;
  std::uint64_t block_ = 0;
  std::array<std::uint32_t, 4> buffer_{};
  int used_ = 4;
};

}  // namespace lln
