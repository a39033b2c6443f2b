#pragma once

// Correlators, the four-cycle statistic C, ε-corrected bounds and frame
// calibration.

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "ionctx/kernel.hpp"
#include "ionctx/measurement.hpp"

namespace ionctx {

struct CorrelatorEstimate {
  double mean = 0.0;
  double sem = 0.0;  // sample standard deviation / √n
  std::size_t n = 0;
};

// Count, mean and M2 with Chan's pairwise merge, so shards can be combined in
// any order.
class RunningMoments {
 public:
  void add(double x) noexcept;
  void merge(const RunningMoments& other) noexcept;

  std::size_t count() const noexcept { return n_; }
  double mean() const noexcept { return mean_; }
  double m2() const noexcept { return m2_; }
  double sample_variance() const noexcept { return n_ > 1 ? m2_ / static_cast<double>(n_ - 1) : 0.0; }
  // Throws when fewer than two samples.
  CorrelatorEstimate estimate() const;

 private:
  std::size_t n_ = 0;
  double mean_ = 0.0;
  double m2_ = 0.0;
};

// Trials grouped by context id.
struct ContextBatches {
  std::array<std::vector<TrialRecord>, 4> by_context;

  static ContextBatches group(std::span<const TrialRecord> trials);
  std::size_t total() const;
};

// Mean of outcome_i · outcome_j over one context's trials (n ≥ 2).
CorrelatorEstimate correlator(std::span<const TrialRecord> trials);

// ⟨O_i⟩^(j): the 8 single-observable means, two per context.
class MarginalTable {
 public:
  // slot 0 is observable i of context {i, j}, slot 1 is observable j.
  void set(int context, int slot, const CorrelatorEstimate& est);
  const std::optional<CorrelatorEstimate>& get(int context, int slot) const;
  // ⟨O_obs⟩ measured jointly with O_partner.
  const std::optional<CorrelatorEstimate>& joint(int obs, int partner) const;
  bool complete() const;

  static MarginalTable from_batches(const ContextBatches& batches);

 private:
  std::array<std::array<std::optional<CorrelatorEstimate>, 2>, 4> entries_{};
};

using CorrelatorSet = std::array<std::optional<CorrelatorEstimate>, 4>;

CorrelatorSet correlators(const ContextBatches& batches);

struct ChshValue {
  double value = 0.0;
  double sem = 0.0;
};

// C = E01 + E12 + E23 − E30, SEM combined in quadrature. Throws on a missing context.
ChshValue chsh_statistic(const CorrelatorSet& estimates);

struct EpsilonModels {
  double noncontextual_bound = 2.0;
  double max_algebraic = 4.0;
  // Linear stand-in for the sequential-disturbance correction, ε = coeff·(1 − R̄);
  // 8 makes R̄ = 0.984 give 0.128.
  double sequential_coefficient = 8.0;
};

// ε = (1 − f)(C_max − bound)
double epsilon_fraction(double f, const EpsilonModels& models = {});

struct EpsilonWithError {
  double value = 0.0;
  double sem = 0.0;
};

// Σ_i |⟨O_i⟩^(i⊕1) − ⟨O_i⟩^(i⊖1)|, SEM by linear propagation (each term
// contributes both of its SEMs even when the difference is near zero).
EpsilonWithError epsilon_mnc(const MarginalTable& marginals);

struct BootstrapResult {
  double mean = 0.0;
  double sem = 0.0;  // standard deviation over resamples
  std::size_t resamples = 0;
};

// Resamples every context with replacement and recomputes ε_mnc.
BootstrapResult epsilon_mnc_bootstrap(const ContextBatches& batches, std::size_t resamples, std::uint64_t seed);

double epsilon_sequential(double mean_repeatability, const EpsilonModels& models = {});

// (C − bound − ε) / sem_C
double violation_significance(double c, double sem_c, double epsilon, const EpsilonModels& models = {});

// ---- Exact evaluation and calibration --------------------------------------

double exact_chsh(const QuantumState& two_qubit, const MeasurementSetup& setup);
// C of the recorded outcomes including readout noise.
double exact_noisy_chsh(const QuantumState& two_qubit, const MeasurementSetup& setup, const NoiseModel& noise);

struct CalibrationResult {
  double offset_yb = 0.0;
  double offset_ba = 0.0;
  double achieved_c = 0.0;
  bool degenerate = false;
};

// Per-ion frame offsets maximizing the exact C: 64×64 grid over [0, 2π)²,
// then alternating exact maximization along each axis (C is a pure
// sinusoid in either offset). Offsets already present in `base` are
// replaced. Flags `degenerate` when C does not vary over the grid.
CalibrationResult calibrate_phases(const QuantumState& two_qubit, const MeasurementSetup& base);

// Depolarizing probability p making exact_noisy_chsh equal `target` for the
// calibrated setup; throws if it falls outside [0, 1].
double depolarization_for_target(const QuantumState& two_qubit, const MeasurementSetup& setup,
                                 const NoiseModel& noise, double target);

}  // namespace ionctx
