#pragma once

// Line-oriented trial and repeatability files. One tab-separated record per
// line after a versioned header, e.g.
//
//   #ionctx-trials v1 fields=setting,outcome_i,outcome_j,trial_index,rng_stream_id
//   0-1	+1	-1	17	9324871203
//
// Empty lines are ignored; anything else that does not parse raises a
// ParseError carrying the 1-based line number.

#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ionctx/measurement.hpp"

namespace ionctx {

inline constexpr std::string_view kTrialHeader =
    "#ionctx-trials v1 fields=setting,outcome_i,outcome_j,trial_index,rng_stream_id";
inline constexpr std::string_view kRepeatabilityHeader =
    "#ionctx-repeatability v1 fields=observable,branch,first_outcome,second_outcome,post_selected,run_index";

// "0-1" → 0, ..., "3-0" → 3. Throws std::invalid_argument otherwise.
int parse_setting(std::string_view text);

void write_trials(std::ostream& out, std::span<const TrialRecord> trials);
void write_trials(const std::filesystem::path& path, std::span<const TrialRecord> trials);
std::vector<TrialRecord> read_trials(std::istream& in);
std::vector<TrialRecord> read_trials(const std::filesystem::path& path);

void write_repeatability(std::ostream& out, std::span<const RepeatabilityRecord> records);
void write_repeatability(const std::filesystem::path& path, std::span<const RepeatabilityRecord> records);
std::vector<RepeatabilityRecord> read_repeatability(std::istream& in);
std::vector<RepeatabilityRecord> read_repeatability(const std::filesystem::path& path);

}  // namespace ionctx
