#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>

#include <json.hpp>

#include "ionctx/analysis.hpp"

namespace ionctx {

struct ReportOptions {
  // Mean repeatability R̄ over the four observables; without it the
  // fraction and sequential models are reported as not computed.
  std::optional<double> mean_repeatability;
  EpsilonModels models;
  std::size_t bootstrap_resamples = 1000;  // 0 skips the bootstrap
  std::uint64_t bootstrap_seed = 1;
};

struct EpsilonEntry {
  double epsilon = 0.0;
  std::optional<double> sem;
  double significance = 0.0;
};

struct ContextualityReport {
  std::array<std::size_t, 4> counts{};
  CorrelatorSet correlators;
  MarginalTable marginals;
  ChshValue c;
  EpsilonModels models;
  double significance_no_epsilon = 0.0;

  std::optional<double> mean_repeatability;
  std::optional<EpsilonEntry> fraction;    // f = R̄²
  std::optional<EpsilonEntry> mnc;         // sem from linear propagation
  std::optional<BootstrapResult> mnc_bootstrap;
  std::optional<EpsilonEntry> sequential;
};

// Throws when a context is missing or holds fewer than two trials.
ContextualityReport build_report(const ContextBatches& batches, const ReportOptions& options);

std::string format_text(const ContextualityReport& report);
nlohmann::json to_json(const ContextualityReport& report);

std::string context_label(int context);  // "0-1", "1-2", "2-3", "3-0"

}  // namespace ionctx
