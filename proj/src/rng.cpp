#include "ionctx/rng.hpp"

namespace ionctx {

namespace {
constexpr std::uint64_t kGamma = 0x9e3779b97f4a7c15ULL;
}

std::uint64_t mix64(std::uint64_t x) noexcept {
  x ^= x >> 30;
  x *= 0xbf58476d1ce4e5b9ULL;
  x ^= x >> 27;
  x *= 0x94d049bb133111ebULL;
  x ^= x >> 31;
  return x;
}

std::uint64_t stream_key(std::uint64_t seed, std::uint64_t domain, std::uint64_t index) noexcept {
  return mix64(mix64(mix64(seed + kGamma) ^ (domain * kGamma)) + index * kGamma);
}

std::uint64_t CounterRng::next_u64() noexcept {
  ++counter_;
  return mix64(key_ + counter_ * kGamma);
}

double CounterRng::uniform() noexcept {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

std::uint64_t CounterRng::below(std::uint64_t n) noexcept {
  // Lemire's multiply-shift with rejection of the biased low range.
  const std::uint64_t threshold = (0 - n) % n;
  for (;;) {
    const unsigned __int128 m = static_cast<unsigned __int128>(next_u64()) * n;
    if (static_cast<std::uint64_t>(m) >= threshold) return static_cast<std::uint64_t>(m >> 64);
  }
}

}  // namespace ionctx
