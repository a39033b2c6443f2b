#pragma once

#include <cstdint>

namespace ionctx {

// SplitMix64 finalizer.
std::uint64_t mix64(std::uint64_t x) noexcept;

// Key of an independent stream, derived from (master seed, domain, index).
// Domains separate e.g. trial contexts from repeatability runs.
std::uint64_t stream_key(std::uint64_t seed, std::uint64_t domain, std::uint64_t index) noexcept;

// Counter-based generator: the k-th draw is mix64(key + k·γ), so any stream
// can be reproduced from its key alone regardless of scheduling.
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t key) noexcept : key_(key) {}

  std::uint64_t next_u64() noexcept;
  // Uniform on [0, 1) with 53 random bits.
  double uniform() noexcept;
  // Uniform integer in [0, n), n > 0.
  std::uint64_t below(std::uint64_t n) noexcept;
  bool bernoulli(double p) noexcept { return uniform() < p; }

  std::uint64_t key() const noexcept { return key_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

namespace stream_domain {
inline constexpr std::uint64_t kContextOrder = 0x10;
inline constexpr std::uint64_t kTrial = 0x20;  // + context id
inline constexpr std::uint64_t kRepeatability = 0x40;  // + observable index
inline constexpr std::uint64_t kBootstrap = 0x80;
}  // namespace stream_domain

}  // namespace ionctx
