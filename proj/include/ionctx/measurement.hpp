#pragma once

// Basis rotations, Born-rule sampling and fluorescence readout noise.

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "ionctx/kernel.hpp"
#include "ionctx/rng.hpp"

namespace ionctx {

// Classical misidentification rates of a fluorescence readout.
struct ConfusionMatrix {
  double p_report1_given0 = 0.0;  // dark read as bright
  double p_report0_given1 = 0.0;  // bright read as dark

  static ConfusionMatrix yb_default() { return {0.0096, 0.0225}; }
  static ConfusionMatrix ba_default() { return {0.0210, 0.0001}; }

  // Slope and intercept of E[reported | true] for ±1 values with dark ↦ +1.
  double shrink() const { return 1.0 - p_report1_given0 - p_report0_given1; }
  double bias() const { return p_report0_given1 - p_report1_given0; }

  void validate() const;
};

struct NoiseModel {
  ConfusionMatrix yb;
  ConfusionMatrix ba;

  const ConfusionMatrix& for_ion(Ion ion) const { return ion == Ion::Yb ? yb : ba; }
  static NoiseModel none() { return {}; }
  static NoiseModel reference() { return {ConfusionMatrix::yb_default(), ConfusionMatrix::ba_default()}; }
  void validate() const { yb.validate(); ba.validate(); }
};

// The four edges of the compatibility cycle: {0,1}, {1,2}, {2,3}, {3,0}.
struct ContextPair {
  int i;
  int j;
};
inline constexpr std::array<ContextPair, 4> kContexts{{{0, 1}, {1, 2}, {2, 3}, {3, 0}}};
inline constexpr std::array<int, 4> kChshSigns{+1, +1, +1, -1};

int context_id(int i, int j);  // throws for pairs off the cycle

struct TrialRecord {
  int context = 0;  // index into kContexts
  int outcome_i = 1;
  int outcome_j = 1;
  std::uint64_t trial_index = 0;
  std::uint64_t rng_stream_id = 0;

  friend bool operator==(const TrialRecord&, const TrialRecord&) = default;
};

// Observable specs plus the bit-to-value convention.
struct MeasurementSetup {
  std::array<ObservableSpec, 4> specs;
  int dark_outcome = +1;  // value recorded for the dark level |0⟩

  // Analysis phases 5π/4, 3π/2, 3π/4, π. O3 carries convention sign −1: with a
  // uniform sign the four correlators of any state with only xy correlations
  // cancel exactly and no frame calibration can recover a violation.
  static MeasurementSetup reference_default();

  void set_frame_offsets(double offset_yb, double offset_ba);
  // +1 or −1 value for a true level (0 dark, 1 bright) of observable `index`.
  int value_for_level(int index, int level) const;
  void validate() const;
};

// Joint probabilities of the true levels of (O_i, O_j) for one context,
// indexed [level_i][level_j].
struct OutcomeDistribution {
  int context = 0;
  std::array<std::array<double, 2>, 2> prob{};
};

OutcomeDistribution outcome_distribution(const QuantumState& two_qubit, int context,
                                         const MeasurementSetup& setup);

// Samples one trial from a precomputed distribution using `rng`.
TrialRecord sample_trial(const OutcomeDistribution& dist, const MeasurementSetup& setup,
                         const NoiseModel& noise, CounterRng& rng, std::uint64_t trial_index);

TrialRecord measure_trial(const QuantumState& two_qubit, int context, const MeasurementSetup& setup,
                          const NoiseModel& noise, CounterRng& rng, std::uint64_t trial_index = 0);

// Exact noiseless ⟨O_i O_j⟩ and single-observable expectations.
double exact_correlator(const QuantumState& two_qubit, int context, const MeasurementSetup& setup);
double exact_marginal(const QuantumState& two_qubit, int observable, const MeasurementSetup& setup);

// Correlator of recorded outcomes including readout flips:
// a_i a_j E + a_i b_j ⟨O_i⟩ + b_i a_j ⟨O_j⟩ + b_i b_j, with a, b the slope and
// intercept of each ion's confusion matrix (sign-adjusted per observable).
double exact_noisy_correlator(const QuantumState& two_qubit, int context, const MeasurementSetup& setup,
                              const NoiseModel& noise);

// Lüders update for observable `basis` (2×2, eigenvalues ±1) on `ion`.
QuantumState collapse_after_measurement(const QuantumState& two_qubit, int outcome,
                                        const ComplexMatrix& basis, Ion ion);

// Probability of `outcome` for `basis` on `ion`.
double outcome_probability(const QuantumState& two_qubit, int outcome, const ComplexMatrix& basis, Ion ion);

ComplexMatrix on_ion(const ComplexMatrix& single, Ion ion);

// ---- Repeatability ---------------------------------------------------------

enum class ReadoutBranch { Dark = 0, Bright = 1 };

struct RepeatabilityRecord {
  int observable = 0;
  int branch = 0;  // 0 tests the dark level directly, 1 through a π sandwich
  int first_outcome = 1;
  int second_outcome = 1;
  bool post_selected = false;
  std::uint64_t run_index = 0;

  friend bool operator==(const RepeatabilityRecord&, const RepeatabilityRecord&) = default;
};

struct RepeatabilityEstimate {
  int observable = 0;
  double value = 0.0;  // fraction of retained runs with equal outcomes
  double sem = 0.0;
  std::size_t retained = 0;
  std::size_t attempted = 0;
};

// Each of `n_runs` runs executes the prepare → rotate → PM → unrotate →
// rotate → PM sequence twice, once per readout branch, on fresh copies of
// `prepared`. A PM keeps the run only when the first detection reports no
// fluorescence; the bright branch reaches that through π pulses around the
// detection. The post-measurement state follows the true level, the
// recorded value follows the confusion matrix.
std::vector<RepeatabilityRecord> simulate_repeatability(const QuantumState& prepared, int observable,
                                                        const MeasurementSetup& setup, const NoiseModel& noise,
                                                        std::size_t n_runs, std::uint64_t seed);

// Throws when no run survived post-selection.
RepeatabilityEstimate estimate_repeatability(std::span<const RepeatabilityRecord> records, int observable);

RepeatabilityEstimate repeatability_protocol(const QuantumState& prepared, int observable,
                                             const MeasurementSetup& setup, const NoiseModel& noise,
                                             std::size_t n_runs, std::uint64_t seed);

}  // namespace ionctx
