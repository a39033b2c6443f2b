#include "ionctx/fixture.hpp"

#include <cmath>
#include <string>

#include "ionctx/errors.hpp"

namespace ionctx {

std::array<std::size_t, 4> joint_counts(const ContextSummary& s, std::size_t n) {
  const double nd = static_cast<double>(n);
  // Number of +1 outcomes for O_i, O_j and of equal outcomes.
  const auto plus = [nd](double mean) { return std::llround(nd * (1.0 + mean) / 2.0); };
  const long long a = plus(s.marginal_i);
  const long long b = plus(s.marginal_j);
  const long long e = plus(s.correlator);
  const long long total = static_cast<long long>(n);
  const long long twice_pp = a + b + e - total;
  if (twice_pp % 2 != 0) throw Error("means are not jointly attainable at n = " + std::to_string(n));
  const long long pp = twice_pp / 2;
  const long long pm = a - pp;
  const long long mp = b - pp;
  const long long mm = total - pp - pm - mp;
  if (pp < 0 || pm < 0 || mp < 0 || mm < 0) throw Error("means imply a negative outcome count");
  return {static_cast<std::size_t>(pp), static_cast<std::size_t>(pm), static_cast<std::size_t>(mp),
          static_cast<std::size_t>(mm)};
}

std::vector<TrialRecord> synthesize_trials(const std::array<ContextSummary, 4>& summaries, std::size_t n) {
  std::vector<TrialRecord> trials;
  trials.reserve(4 * n);
  constexpr int kValues[4][2] = {{+1, +1}, {+1, -1}, {-1, +1}, {-1, -1}};
  std::uint64_t index = 0;
  for (int c = 0; c < 4; ++c) {
    const auto counts = joint_counts(summaries[static_cast<std::size_t>(c)], n);
    for (int cell = 0; cell < 4; ++cell) {
      for (std::size_t k = 0; k < counts[static_cast<std::size_t>(cell)]; ++k) {
        trials.push_back(TrialRecord{c, kValues[cell][0], kValues[cell][1], index++, 0});
      }
    }
  }
  return trials;
}

std::array<ContextSummary, 4> golden_summaries() {
  return {{{0.6164, -0.0008, 0.1096},
           {0.6250, 0.1066, 0.1236},
           {0.6678, 0.1356, 0.1078},
           {-0.6166, 0.1114, -0.0056}}};
}

}  // namespace ionctx
