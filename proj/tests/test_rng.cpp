#include <doctest.h>

#include <array>
#include <cmath>
#include <set>

#include "ionctx/rng.hpp"

using namespace ionctx;

TEST_CASE("SplitMix64 finalizer matches the reference sequence") {
  // Reference SplitMix64 with state 0: outputs are mix64(k·γ) for k = 1, 2, ...
  CounterRng rng(0);
  CHECK(rng.next_u64() == 0xe220a8397b1dcdafULL);
  CHECK(rng.next_u64() == 0x6e789e6aa1b965f4ULL);
  CHECK(rng.next_u64() == 0x06c45d188009454fULL);
}

TEST_CASE("streams are reproducible from their key") {
  CounterRng a(stream_key(42, 0x20, 17));
  CounterRng b(stream_key(42, 0x20, 17));
  for (int k = 0; k < 100; ++k) REQUIRE(a.next_u64() == b.next_u64());
  CHECK(stream_key(42, 0x20, 17) != stream_key(42, 0x21, 17));
  CHECK(stream_key(42, 0x20, 17) != stream_key(43, 0x20, 17));
  CHECK(stream_key(42, 0x20, 17) != stream_key(42, 0x20, 18));
}

TEST_CASE("stream keys do not collide over a large index range") {
  std::set<std::uint64_t> keys;
  for (std::uint64_t d = 0; d < 4; ++d)
    for (std::uint64_t i = 0; i < 20000; ++i) keys.insert(stream_key(7, 0x20 + d, i));
  CHECK(keys.size() == 80000);
}

TEST_CASE("uniform draws lie in [0, 1) with the right mean") {
  CounterRng rng(99);
  double sum = 0.0;
  const int n = 200000;
  for (int k = 0; k < n; ++k) {
    const double u = rng.uniform();
    REQUIRE(u >= 0.0);
    REQUIRE(u < 1.0);
    sum += u;
  }
  CHECK(std::abs(sum / n - 0.5) < 5.0 * std::sqrt(1.0 / 12.0 / n));
}

TEST_CASE("below is unbiased over small ranges") {
  CounterRng rng(3);
  std::array<int, 7> hist{};
  const int n = 70000;
  for (int k = 0; k < n; ++k) {
    const auto v = rng.below(7);
    REQUIRE(v < 7);
    ++hist[v];
  }
  double chi2 = 0.0;
  for (int h : hist) chi2 += (h - n / 7.0) * (h - n / 7.0) / (n / 7.0);
  CHECK(chi2 < 30.0);  // 6 degrees of freedom
  CHECK(rng.below(1) == 0);
}
