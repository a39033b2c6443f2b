#include "ionctx/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "ionctx/errors.hpp"
#include "ionctx/rng.hpp"

namespace ionctx {

void RunningMoments::add(double x) noexcept {
  ++n_;
  const double delta = x - mean_;
  mean_ += delta / static_cast<double>(n_);
  m2_ += delta * (x - mean_);
}

void RunningMoments::merge(const RunningMoments& other) noexcept {
  if (other.n_ == 0) return;
  if (n_ == 0) {
    *this = other;
    return;
  }
  const double na = static_cast<double>(n_);
  const double nb = static_cast<double>(other.n_);
  const double n = na + nb;
  const double delta = other.mean_ - mean_;
  mean_ = (na * mean_ + nb * other.mean_) / n;
  m2_ += other.m2_ + delta * delta * na * nb / n;
  n_ += other.n_;
}

CorrelatorEstimate RunningMoments::estimate() const {
  if (n_ < 2) throw std::invalid_argument("an estimate needs at least two samples, got " + std::to_string(n_));
  const double n = static_cast<double>(n_);
  return {mean_, std::sqrt(sample_variance() / n), n_};
}

ContextBatches ContextBatches::group(std::span<const TrialRecord> trials) {
  ContextBatches out;
  for (const auto& t : trials) {
    if (t.context < 0 || t.context > 3) throw std::invalid_argument("trial with unknown context id");
    out.by_context[static_cast<std::size_t>(t.context)].push_back(t);
  }
  return out;
}

std::size_t ContextBatches::total() const {
  std::size_t n = 0;
  for (const auto& b : by_context) n += b.size();
  return n;
}

CorrelatorEstimate correlator(std::span<const TrialRecord> trials) {
  if (trials.empty()) throw std::invalid_argument("correlator of an empty trial batch");
  RunningMoments m;
  for (const auto& t : trials) m.add(static_cast<double>(t.outcome_i * t.outcome_j));
  return m.estimate();
}

void MarginalTable::set(int context, int slot, const CorrelatorEstimate& est) {
  entries_.at(static_cast<std::size_t>(context)).at(static_cast<std::size_t>(slot)) = est;
}

const std::optional<CorrelatorEstimate>& MarginalTable::get(int context, int slot) const {
  return entries_.at(static_cast<std::size_t>(context)).at(static_cast<std::size_t>(slot));
}

const std::optional<CorrelatorEstimate>& MarginalTable::joint(int obs, int partner) const {
  for (std::size_t c = 0; c < kContexts.size(); ++c) {
    if (kContexts[c].i == obs && kContexts[c].j == partner) return entries_[c][0];
    if (kContexts[c].j == obs && kContexts[c].i == partner) return entries_[c][1];
  }
  throw std::invalid_argument("O" + std::to_string(obs) + " and O" + std::to_string(partner) +
                              " do not share a context");
}

bool MarginalTable::complete() const {
  return std::all_of(entries_.begin(), entries_.end(),
                     [](const auto& row) { return row[0].has_value() && row[1].has_value(); });
}

MarginalTable MarginalTable::from_batches(const ContextBatches& batches) {
  MarginalTable table;
  for (int c = 0; c < 4; ++c) {
    const auto& batch = batches.by_context[static_cast<std::size_t>(c)];
    if (batch.size() < 2) continue;
    RunningMoments first;
    RunningMoments second;
    for (const auto& t : batch) {
      first.add(static_cast<double>(t.outcome_i));
      second.add(static_cast<double>(t.outcome_j));
    }
    table.set(c, 0, first.estimate());
    table.set(c, 1, second.estimate());
  }
  return table;
}

CorrelatorSet correlators(const ContextBatches& batches) {
  CorrelatorSet out;
  for (std::size_t c = 0; c < 4; ++c) {
    if (batches.by_context[c].size() >= 2) out[c] = correlator(batches.by_context[c]);
  }
  return out;
}

ChshValue chsh_statistic(const CorrelatorSet& estimates) {
  ChshValue out;
  double var = 0.0;
  for (std::size_t c = 0; c < 4; ++c) {
    if (!estimates[c]) {
      throw Error("C needs all four contexts; {" + std::to_string(kContexts[c].i) + "," +
                  std::to_string(kContexts[c].j) + "} is missing");
    }
    out.value += kChshSigns[c] * estimates[c]->mean;
    var += estimates[c]->sem * estimates[c]->sem;
  }
  out.sem = std::sqrt(var);
  return out;
}

double epsilon_fraction(double f, const EpsilonModels& models) {
  if (!(f >= 0.0 && f <= 1.0)) throw std::invalid_argument("fraction f outside [0, 1]");
  return (1.0 - f) * (models.max_algebraic - models.noncontextual_bound);
}

EpsilonWithError epsilon_mnc(const MarginalTable& marginals) {
  if (!marginals.complete()) throw Error("epsilon_mnc needs all 8 marginals");
  EpsilonWithError out;
  double var = 0.0;
  for (int i = 0; i < 4; ++i) {
    const auto& next = *marginals.joint(i, (i + 1) % 4);
    const auto& prev = *marginals.joint(i, (i + 3) % 4);
    out.value += std::abs(next.mean - prev.mean);
    var += next.sem * next.sem + prev.sem * prev.sem;
  }
  out.sem = std::sqrt(var);
  return out;
}

BootstrapResult epsilon_mnc_bootstrap(const ContextBatches& batches, std::size_t resamples, std::uint64_t seed) {
  if (resamples < 2) throw std::invalid_argument("bootstrap needs at least two resamples");
  for (const auto& b : batches.by_context) {
    if (b.size() < 2) throw Error("bootstrap needs every context populated");
  }
  // Joint outcome counts per context; resampling trials is a multinomial draw over them.
  std::array<std::array<double, 4>, 4> freq{};
  for (std::size_t c = 0; c < 4; ++c) {
    const auto& batch = batches.by_context[c];
    for (const auto& t : batch) {
      const std::size_t cell = static_cast<std::size_t>((t.outcome_i > 0 ? 0 : 2) + (t.outcome_j > 0 ? 0 : 1));
      freq[c][cell] += 1.0;
    }
  }

  RunningMoments stats;
  for (std::size_t r = 0; r < resamples; ++r) {
    CounterRng rng(stream_key(seed, stream_domain::kBootstrap, r));
    MarginalTable table;
    for (std::size_t c = 0; c < 4; ++c) {
      const std::size_t n = batches.by_context[c].size();
      std::array<std::size_t, 4> counts{};
      for (std::size_t k = 0; k < n; ++k) {
        double u = static_cast<double>(rng.below(n));
        std::size_t cell = 0;
        while (cell < 3 && u >= freq[c][cell]) {
          u -= freq[c][cell];
          ++cell;
        }
        ++counts[cell];
      }
      const double nn = static_cast<double>(n);
      const double plus_i = static_cast<double>(counts[0] + counts[1]);
      const double plus_j = static_cast<double>(counts[0] + counts[2]);
      table.set(static_cast<int>(c), 0, {(2.0 * plus_i - nn) / nn, 0.0, n});
      table.set(static_cast<int>(c), 1, {(2.0 * plus_j - nn) / nn, 0.0, n});
    }
    stats.add(epsilon_mnc(table).value);
  }
  return {stats.mean(), std::sqrt(stats.sample_variance()), resamples};
}

double epsilon_sequential(double mean_repeatability, const EpsilonModels& models) {
  if (!(mean_repeatability >= 0.0 && mean_repeatability <= 1.0)) {
    throw std::invalid_argument("mean repeatability outside [0, 1]");
  }
  return models.sequential_coefficient * (1.0 - mean_repeatability);
}

double violation_significance(double c, double sem_c, double epsilon, const EpsilonModels& models) {
  const double excess = c - models.noncontextual_bound - epsilon;
  if (sem_c > 0.0) return excess / sem_c;
  if (sem_c == 0.0 && excess == 0.0) return 0.0;
  throw std::invalid_argument("violation significance needs a positive standard error");
}

// ---- Exact evaluation and calibration --------------------------------------

double exact_chsh(const QuantumState& two_qubit, const MeasurementSetup& setup) {
  double c = 0.0;
  for (int k = 0; k < 4; ++k) c += kChshSigns[static_cast<std::size_t>(k)] * exact_correlator(two_qubit, k, setup);
  return c;
}

double exact_noisy_chsh(const QuantumState& two_qubit, const MeasurementSetup& setup, const NoiseModel& noise) {
  double c = 0.0;
  for (int k = 0; k < 4; ++k) {
    c += kChshSigns[static_cast<std::size_t>(k)] * exact_noisy_correlator(two_qubit, k, setup, noise);
  }
  return c;
}

namespace {

constexpr int kGrid = 64;

double wrap(double angle) {
  double a = std::fmod(angle, 2.0 * kPi);
  if (a < 0.0) a += 2.0 * kPi;
  return a;
}

// C as a function of the two frame offsets.
class ChshObjective {
 public:
  ChshObjective(const QuantumState& state, const MeasurementSetup& base) : state_(state), setup_(base) {}

  double operator()(double offset_yb, double offset_ba) {
    setup_.set_frame_offsets(offset_yb, offset_ba);
    return exact_chsh(state_, setup_);
  }

 private:
  const QuantumState& state_;
  MeasurementSetup setup_;
};

// argmax over x of a·cos x + b·sin x + c sampled at 0, π/2, π.
double sinusoid_argmax(double f0, double f_half, double f_pi, double current) {
  const double a = 0.5 * (f0 - f_pi);
  const double b = f_half - 0.5 * (f0 + f_pi);
  if (std::hypot(a, b) < 1e-15) return current;
  return wrap(std::atan2(b, a));
}

}  // namespace

CalibrationResult calibrate_phases(const QuantumState& two_qubit, const MeasurementSetup& base) {
  base.validate();
  ChshObjective objective(two_qubit, base);
  const double step = 2.0 * kPi / kGrid;

  std::vector<double> grid(kGrid * kGrid);
  double best = -1e300;
  double worst = 1e300;
  for (int a = 0; a < kGrid; ++a) {
    for (int b = 0; b < kGrid; ++b) {
      const double v = objective(a * step, b * step);
      grid[static_cast<std::size_t>(a * kGrid + b)] = v;
      best = std::max(best, v);
      worst = std::min(worst, v);
    }
  }

  CalibrationResult out;
  if (best - worst < 1e-10) {
    out.degenerate = true;
    out.achieved_c = objective(0.0, 0.0);
    return out;
  }

  // First grid point within a relative hair of the maximum. The relative
  // threshold keeps the choice stable when C is rescaled uniformly.
  const double threshold = best - 1e-9 * std::max(1.0, std::abs(best));
  std::size_t pick = 0;
  while (grid[pick] < threshold) ++pick;
  double yb = static_cast<double>(pick / kGrid) * step;
  double ba = static_cast<double>(pick % kGrid) * step;

  for (int iter = 0; iter < 500; ++iter) {
    const double new_yb =
        sinusoid_argmax(objective(0.0, ba), objective(kPi / 2.0, ba), objective(kPi, ba), yb);
    const double new_ba =
        sinusoid_argmax(objective(new_yb, 0.0), objective(new_yb, kPi / 2.0), objective(new_yb, kPi), ba);
    const double moved = std::abs(std::remainder(new_yb - yb, 2.0 * kPi)) +
                         std::abs(std::remainder(new_ba - ba, 2.0 * kPi));
    yb = new_yb;
    ba = new_ba;
    if (moved < 1e-13) break;
  }
  out.offset_yb = yb;
  out.offset_ba = ba;
  out.achieved_c = objective(yb, ba);
  return out;
}

double depolarization_for_target(const QuantumState& two_qubit, const MeasurementSetup& setup,
                                 const NoiseModel& noise, double target) {
  const double c_pure = exact_noisy_chsh(two_qubit, setup, noise);
  const double c_mixed = exact_noisy_chsh(apply_depolarizing(two_qubit, 1.0), setup, noise);
  if (std::abs(c_pure - c_mixed) < 1e-12) throw Error("C does not depend on depolarization for this state");
  const double p = (c_pure - target) / (c_pure - c_mixed);
  if (!(p >= 0.0 && p <= 1.0)) {
    throw Error("target C " + std::to_string(target) + " unreachable by depolarization (p = " +
                std::to_string(p) + ")");
  }
  return p;
}

}  // namespace ionctx
