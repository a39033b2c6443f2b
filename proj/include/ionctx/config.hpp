#pragma once

// Experiment configuration, read from a single JSON document. Every field
// has a default, so "{}" plus a seed is a valid simulate config.

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include <json.hpp>

#include "ionctx/analysis.hpp"
#include "ionctx/measurement.hpp"
#include "ionctx/ms_dynamics.hpp"

namespace ionctx {

enum class StateSource { Ideal, MsGate };

struct StateConfig {
  StateSource source = StateSource::Ideal;
  MsParams ms;                          // used when source is MsGate
  double depolarization = 0.0;          // applied after preparation
  std::optional<double> target_exact_c; // overrides depolarization when set
};

struct ObservableConfig {
  std::array<double, 4> phases_pi{1.25, 1.5, 0.75, 1.0};  // in units of π
  std::array<int, 4> convention_signs{+1, +1, +1, -1};
  bool calibrate = true;  // fit per-ion frame offsets to the prepared state
  double offset_yb = 0.0; // used when calibrate is false
  double offset_ba = 0.0;
};

struct ExperimentConfig {
  std::size_t trials_per_setting = 10000;
  std::size_t repeatability_runs = 1000;  // per observable
  std::optional<std::uint64_t> seed;
  unsigned threads = 0;                   // 0 picks hardware concurrency
  int dark_outcome = +1;
  NoiseModel noise = NoiseModel::reference();
  StateConfig state;
  ObservableConfig observables;
  EpsilonModels epsilon;
  std::size_t bootstrap_resamples = 1000;
  std::size_t ms_trace_points = 101;
  std::size_t parity_scan_points = 64;

  MeasurementSetup setup() const;  // before calibration
  void validate() const;
  // Throws when no seed is set.
  std::uint64_t require_seed() const;

  static ExperimentConfig from_json(const nlohmann::json& doc);
  static ExperimentConfig load(const std::filesystem::path& path);
  nlohmann::json to_json() const;

  // FNV-1a of the canonical JSON without seed and thread count, as 16 hex digits.
  std::string hash() const;
};

}  // namespace ionctx
