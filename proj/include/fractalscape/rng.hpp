#pragma once

#include <cstdint>

namespace fractalscape {

/// Purpose tags for the named substreams derived from one master seed.
enum class StreamTag : std::uint64_t {
  rollout = 1,
  holder = 2,
  grad = 3,
  init = 4,
  mle = 5,
  smoothing = 6,
};

std::uint64_t mix64(std::uint64_t z) noexcept;

/// Counter-based stream: the i-th draw is a pure function of
/// (master seed, tag, index, i), so the order in which threads consume
/// streams can never change the numbers any stream produces.
class RngStream {
 public:
  RngStream(std::uint64_t master_seed, StreamTag tag, std::uint64_t index) noexcept;

  std::uint64_t next_u64() noexcept;
  /// Uniform on the open interval (0, 1).
  double uniform() noexcept;
  /// Standard normal (Box-Muller, both branches used).
  double normal() noexcept;

  std::uint64_t key() const noexcept { return key_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

/// Combines a seed with an index into a new seed (used for nested substreams).
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) noexcept;

}  // namespace fractalscape
