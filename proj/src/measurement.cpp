#include "ionctx/measurement.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "ionctx/errors.hpp"

namespace ionctx {

void ConfusionMatrix::validate() const {
  auto in_range = [](double p) { return p >= 0.0 && p <= 1.0; };
  if (!in_range(p_report1_given0) || !in_range(p_report0_given1)) {
    throw std::invalid_argument("confusion probabilities must lie in [0, 1]");
  }
}

int context_id(int i, int j) {
  for (std::size_t c = 0; c < kContexts.size(); ++c) {
    if (kContexts[c].i == i && kContexts[c].j == j) return static_cast<int>(c);
  }
  throw std::invalid_argument("{" + std::to_string(i) + "," + std::to_string(j) +
                              "} is not a context of the cycle");
}

MeasurementSetup MeasurementSetup::reference_default() {
  MeasurementSetup s;
  s.specs[0] = {0, Ion::Yb, 5.0 * kPi / 4.0, +1, 0.0};
  s.specs[1] = {1, Ion::Ba, 3.0 * kPi / 2.0, +1, 0.0};
  s.specs[2] = {2, Ion::Yb, 3.0 * kPi / 4.0, +1, 0.0};
  s.specs[3] = {3, Ion::Ba, kPi, -1, 0.0};
  return s;
}

void MeasurementSetup::set_frame_offsets(double offset_yb, double offset_ba) {
  for (auto& spec : specs) spec.frame_offset = spec.ion == Ion::Yb ? offset_yb : offset_ba;
}

int MeasurementSetup::value_for_level(int index, int level) const {
  const int dark = specs[static_cast<std::size_t>(index)].convention_sign * dark_outcome;
  return level == 0 ? dark : -dark;
}

void MeasurementSetup::validate() const {
  for (std::size_t k = 0; k < specs.size(); ++k) {
    specs[k].validate();
    if (specs[k].index != static_cast<int>(k)) throw std::invalid_argument("observable specs out of order");
  }
  if (dark_outcome != 1 && dark_outcome != -1) throw std::invalid_argument("dark_outcome must be +1 or -1");
}

ComplexMatrix on_ion(const ComplexMatrix& single, Ion ion) {
  return ion == Ion::Yb ? tensor(single, identity(2)) : tensor(identity(2), single);
}

namespace {

void require_two_qubit(const QuantumState& s) {
  if (s.dims() != std::vector<int>{2, 2}) throw DimensionError("expected a two-qubit state");
}

const ObservableSpec& spec_of(const MeasurementSetup& setup, int index) {
  if (index < 0 || index > 3) throw std::invalid_argument("observable index must be 0..3");
  return setup.specs[static_cast<std::size_t>(index)];
}

int flip_readout(int level, const ConfusionMatrix& cm, CounterRng& rng) {
  const double p_flip = level == 0 ? cm.p_report1_given0 : cm.p_report0_given1;
  return rng.bernoulli(p_flip) ? 1 - level : level;
}

ComplexMatrix level_projector(int level, Ion ion) {
  ComplexMatrix p = ComplexMatrix::Zero(2, 2);
  p(level, level) = 1.0;
  return on_ion(p, ion);
}

}  // namespace

OutcomeDistribution outcome_distribution(const QuantumState& two_qubit, int context,
                                         const MeasurementSetup& setup) {
  require_two_qubit(two_qubit);
  if (context < 0 || context > 3) throw std::invalid_argument("context id must be 0..3");
  const auto& pair = kContexts[static_cast<std::size_t>(context)];
  const ObservableSpec& a = spec_of(setup, pair.i);
  const ObservableSpec& b = spec_of(setup, pair.j);
  const ObservableSpec& yb = a.ion == Ion::Yb ? a : b;
  const ObservableSpec& ba = a.ion == Ion::Yb ? b : a;
  if (yb.ion != Ion::Yb || ba.ion != Ion::Ba) throw std::invalid_argument("context must span both ions");

  const ComplexMatrix u =
      tensor(rotation(kPi / 2.0, yb.effective_phase()), rotation(kPi / 2.0, ba.effective_phase()));
  const ComplexMatrix rotated = u * two_qubit.rho() * u.adjoint();

  OutcomeDistribution dist;
  dist.context = context;
  for (int q_yb = 0; q_yb < 2; ++q_yb) {
    for (int q_ba = 0; q_ba < 2; ++q_ba) {
      const double p = std::max(0.0, rotated(2 * q_yb + q_ba, 2 * q_yb + q_ba).real());
      const int level_i = a.ion == Ion::Yb ? q_yb : q_ba;
      const int level_j = a.ion == Ion::Yb ? q_ba : q_yb;
      dist.prob[static_cast<std::size_t>(level_i)][static_cast<std::size_t>(level_j)] = p;
    }
  }
  return dist;
}

TrialRecord sample_trial(const OutcomeDistribution& dist, const MeasurementSetup& setup, const NoiseModel& noise,
                         CounterRng& rng, std::uint64_t trial_index) {
  const auto& pair = kContexts[static_cast<std::size_t>(dist.context)];
  const double total = dist.prob[0][0] + dist.prob[0][1] + dist.prob[1][0] + dist.prob[1][1];
  double u = rng.uniform() * total;
  int level_i = 1;
  int level_j = 1;
  for (int li = 0, done = 0; li < 2 && !done; ++li) {
    for (int lj = 0; lj < 2; ++lj) {
      const double p = dist.prob[static_cast<std::size_t>(li)][static_cast<std::size_t>(lj)];
      if (u < p) {
        level_i = li;
        level_j = lj;
        done = 1;
        break;
      }
      u -= p;
    }
  }
  level_i = flip_readout(level_i, noise.for_ion(ion_for_observable(pair.i)), rng);
  level_j = flip_readout(level_j, noise.for_ion(ion_for_observable(pair.j)), rng);

  TrialRecord rec;
  rec.context = dist.context;
  rec.outcome_i = setup.value_for_level(pair.i, level_i);
  rec.outcome_j = setup.value_for_level(pair.j, level_j);
  rec.trial_index = trial_index;
  rec.rng_stream_id = rng.key();
  return rec;
}

TrialRecord measure_trial(const QuantumState& two_qubit, int context, const MeasurementSetup& setup,
                          const NoiseModel& noise, CounterRng& rng, std::uint64_t trial_index) {
  return sample_trial(outcome_distribution(two_qubit, context, setup), setup, noise, rng, trial_index);
}

double exact_correlator(const QuantumState& two_qubit, int context, const MeasurementSetup& setup) {
  require_two_qubit(two_qubit);
  const auto& pair = kContexts.at(static_cast<std::size_t>(context));
  const ComplexMatrix oi = on_ion(observable_from_phase(spec_of(setup, pair.i)), ion_for_observable(pair.i));
  const ComplexMatrix oj = on_ion(observable_from_phase(spec_of(setup, pair.j)), ion_for_observable(pair.j));
  return expectation(two_qubit, oi * oj);
}

double exact_marginal(const QuantumState& two_qubit, int observable, const MeasurementSetup& setup) {
  require_two_qubit(two_qubit);
  const ComplexMatrix o = on_ion(observable_from_phase(spec_of(setup, observable)), ion_for_observable(observable));
  return setup.dark_outcome * expectation(two_qubit, o);
}

double exact_noisy_correlator(const QuantumState& two_qubit, int context, const MeasurementSetup& setup,
                              const NoiseModel& noise) {
  const auto& pair = kContexts.at(static_cast<std::size_t>(context));
  auto slope = [&](int obs) { return noise.for_ion(ion_for_observable(obs)).shrink(); };
  auto intercept = [&](int obs) {
    return setup.value_for_level(obs, 0) * noise.for_ion(ion_for_observable(obs)).bias();
  };
  const double e = exact_correlator(two_qubit, context, setup);
  const double mi = exact_marginal(two_qubit, pair.i, setup);
  const double mj = exact_marginal(two_qubit, pair.j, setup);
  return slope(pair.i) * slope(pair.j) * e + slope(pair.i) * intercept(pair.j) * mi +
         intercept(pair.i) * slope(pair.j) * mj + intercept(pair.i) * intercept(pair.j);
}

double outcome_probability(const QuantumState& two_qubit, int outcome, const ComplexMatrix& basis, Ion ion) {
  require_two_qubit(two_qubit);
  if (outcome != 1 && outcome != -1) throw std::invalid_argument("outcome must be +1 or -1");
  const ComplexMatrix proj = on_ion(0.5 * (identity(2) + static_cast<double>(outcome) * basis), ion);
  return expectation(two_qubit, proj);
}

QuantumState collapse_after_measurement(const QuantumState& two_qubit, int outcome, const ComplexMatrix& basis,
                                        Ion ion) {
  const double p = outcome_probability(two_qubit, outcome, basis, ion);
  if (p < 1e-14) throw Error("measurement outcome has zero probability");
  const ComplexMatrix proj = on_ion(0.5 * (identity(2) + static_cast<double>(outcome) * basis), ion);
  ComplexMatrix rho = proj * two_qubit.rho() * proj / p;
  rho = 0.5 * (rho + rho.adjoint()).eval();
  return QuantumState(two_qubit.dims(), std::move(rho));
}

// ---- Repeatability ---------------------------------------------------------

namespace {

using Mat4 = Eigen::Matrix4cd;

struct DetectionResult {
  int logical_level;
  bool reported_dark;
};

class RepeatabilitySequence {
 public:
  RepeatabilitySequence(const ObservableSpec& spec, const ConfusionMatrix& readout)
      : ion_(spec.ion), readout_(readout) {
    map_ = on_ion(rotation(kPi / 2.0, spec.effective_phase()), ion_);
    flip_ = on_ion(rotation(kPi, 0.0), ion_);
    proj_[0] = level_projector(0, ion_);
    proj_[1] = level_projector(1, ion_);
  }

  // Projective measurement in the rotated frame. The bright branch swaps the
  // levels with π pulses so that the post-selected (dark) detection tests |1⟩.
  DetectionResult measure(Mat4& rho, ReadoutBranch branch, CounterRng& rng) const {
    if (branch == ReadoutBranch::Bright) rho = flip_ * rho * flip_.adjoint();
    const double p0 = std::clamp((proj_[0] * rho).trace().real(), 0.0, 1.0);
    const int level = rng.uniform() < p0 ? 0 : 1;
    const int reported = flip_readout(level, readout_, rng);
    const Mat4& proj = proj_[static_cast<std::size_t>(level)];
    rho = proj * rho * proj;
    rho /= rho.trace().real();
    if (branch == ReadoutBranch::Bright) rho = flip_ * rho * flip_.adjoint();
    const int logical = branch == ReadoutBranch::Bright ? 1 - reported : reported;
    return {logical, reported == 0};
  }

  RepeatabilityRecord run(const Mat4& prepared, ReadoutBranch branch, CounterRng& rng) const {
    Mat4 rho = map_ * prepared * map_.adjoint();
    const DetectionResult first = measure(rho, branch, rng);
    rho = map_.adjoint() * rho * map_;
    rho = map_ * rho * map_.adjoint();
    const DetectionResult second = measure(rho, branch, rng);
    RepeatabilityRecord rec;
    rec.branch = static_cast<int>(branch);
    rec.first_outcome = first.logical_level;
    rec.second_outcome = second.logical_level;
    rec.post_selected = first.reported_dark;
    return rec;
  }

 private:
  Ion ion_;
  ConfusionMatrix readout_;
  Mat4 map_;
  Mat4 flip_;
  std::array<Mat4, 2> proj_;
};

}  // namespace

std::vector<RepeatabilityRecord> simulate_repeatability(const QuantumState& prepared, int observable,
                                                        const MeasurementSetup& setup, const NoiseModel& noise,
                                                        std::size_t n_runs, std::uint64_t seed) {
  require_two_qubit(prepared);
  if (n_runs < 1) throw std::invalid_argument("repeatability needs at least one run");
  const ObservableSpec& spec = spec_of(setup, observable);
  const RepeatabilitySequence sequence(spec, noise.for_ion(spec.ion));
  const Mat4 rho0 = prepared.rho();

  std::vector<RepeatabilityRecord> records;
  records.reserve(2 * n_runs);
  for (std::size_t run = 0; run < n_runs; ++run) {
    CounterRng rng(stream_key(seed, stream_domain::kRepeatability + static_cast<std::uint64_t>(observable), run));
    for (ReadoutBranch branch : {ReadoutBranch::Dark, ReadoutBranch::Bright}) {
      RepeatabilityRecord rec = sequence.run(rho0, branch, rng);
      rec.observable = observable;
      rec.first_outcome = setup.value_for_level(observable, rec.first_outcome);
      rec.second_outcome = setup.value_for_level(observable, rec.second_outcome);
      rec.run_index = run;
      records.push_back(rec);
    }
  }
  return records;
}

RepeatabilityEstimate estimate_repeatability(std::span<const RepeatabilityRecord> records, int observable) {
  RepeatabilityEstimate est;
  est.observable = observable;
  std::size_t equal = 0;
  for (const auto& r : records) {
    if (r.observable != observable) continue;
    ++est.attempted;
    if (!r.post_selected) continue;
    ++est.retained;
    if (r.first_outcome == r.second_outcome) ++equal;
  }
  if (est.retained == 0) {
    throw Error("repeatability of O" + std::to_string(observable) + ": every run was discarded by post-selection");
  }
  const double n = static_cast<double>(est.retained);
  est.value = static_cast<double>(equal) / n;
  // Sample standard deviation of the 0/1 indicator over √n.
  est.sem = est.retained > 1 ? std::sqrt(est.value * (1.0 - est.value) * n / (n - 1.0) / n) : 0.0;
  return est;
}

RepeatabilityEstimate repeatability_protocol(const QuantumState& prepared, int observable,
                                             const MeasurementSetup& setup, const NoiseModel& noise,
                                             std::size_t n_runs, std::uint64_t seed) {
  const auto records = simulate_repeatability(prepared, observable, setup, noise, n_runs, seed);
  return estimate_repeatability(records, observable);
}

}  // namespace ionctx
