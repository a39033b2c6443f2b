#pragma once

// Synthetic trial sets reproducing given per-context means exactly.

#include <array>
#include <cstddef>
#include <vector>

#include "ionctx/measurement.hpp"

namespace ionctx {

struct ContextSummary {
  double correlator = 0.0;  // ⟨O_i O_j⟩
  double marginal_i = 0.0;  // ⟨O_i⟩ in this context
  double marginal_j = 0.0;
};

// Joint outcome counts [++, +−, −+, −−] with the three means rounded to the
// nearest attainable value at n trials. Throws when no non-negative
// assignment exists.
std::array<std::size_t, 4> joint_counts(const ContextSummary& summary, std::size_t n);

// n trials per context, contexts in order, with outcomes grouped by cell.
std::vector<TrialRecord> synthesize_trials(const std::array<ContextSummary, 4>& summaries, std::size_t n);

// Published means of the four contexts (10⁴ trials each).
std::array<ContextSummary, 4> golden_summaries();
inline constexpr std::size_t kGoldenTrialsPerContext = 10000;

}  // namespace ionctx
