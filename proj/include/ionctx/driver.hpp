#pragma once

// End-to-end runs: state preparation, seeded trial generation, persistence,
// ingestion and reporting.

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "ionctx/config.hpp"
#include "ionctx/report.hpp"

namespace ionctx {

inline constexpr std::string_view kArtifactVersion = "ionctx-run/1";

struct PreparedExperiment {
  QuantumState state = QuantumState::target_bell();  // after depolarization
  QuantumState pure_state = QuantumState::target_bell();
  MeasurementSetup setup;                            // calibrated offsets applied
  NoiseModel noise;
  std::optional<CalibrationResult> calibration;
  double depolarization = 0.0;
  double exact_c = 0.0;        // noiseless readout
  double exact_noisy_c = 0.0;  // including readout flips
};

// Throws TruncationError from the gate simulation unchanged.
PreparedExperiment prepare_experiment(const ExperimentConfig& config);

// Context order for n_per_setting trials of each context, shuffled under the
// seed. Entry k is the context of global trial k.
std::vector<int> context_schedule(std::size_t n_per_setting, std::uint64_t seed);

// Trial k uses the stream (seed, context, k), so the result does not depend
// on `threads`.
std::vector<TrialRecord> generate_trials(const PreparedExperiment& prepared, std::size_t n_per_setting,
                                         std::uint64_t seed, unsigned threads = 0);

struct RepeatabilityBatch {
  std::vector<RepeatabilityRecord> records;
  std::array<RepeatabilityEstimate, 4> estimates{};
  double mean = 0.0;
};

RepeatabilityBatch run_repeatability(const PreparedExperiment& prepared, std::size_t runs, std::uint64_t seed);
// Empty input gives nullopt.
std::optional<RepeatabilityBatch> summarize_repeatability(std::vector<RepeatabilityRecord> records);

struct RunManifest {
  std::string config_hash;
  std::uint64_t seed = 0;
  std::string artifact_version{kArtifactVersion};
  std::string started_utc;
  std::string finished_utc;
  std::array<std::size_t, 4> trials_per_context{};
  std::vector<std::pair<std::string, std::string>> outputs;  // role, path

  nlohmann::json to_json() const;
};

struct SimulationResult {
  PreparedExperiment prepared;
  std::vector<TrialRecord> trials;
  RepeatabilityBatch repeatability;
  ContextualityReport report;
  RunManifest manifest;
};

ReportOptions report_options(const ExperimentConfig& config, std::optional<double> mean_repeatability);

// Writes trials.tsv, repeatability.tsv, report.txt, report.json and
// manifest.json (plus ms_trace.csv and parity_scan.csv for gate-prepared
// states) into `out_dir`; an empty path skips all file output.
SimulationResult run_simulation(const ExperimentConfig& config, const std::filesystem::path& out_dir = {});

ContextBatches ingest(const std::filesystem::path& trial_file);

// Full report from stored batches; `repeatability` may be empty.
ContextualityReport report(const ContextBatches& batches, const ExperimentConfig& config,
                           std::span<const RepeatabilityRecord> repeatability = {});

void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace ionctx
