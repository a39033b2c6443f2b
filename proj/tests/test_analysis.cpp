#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "ionctx/analysis.hpp"
#include "ionctx/errors.hpp"
#include "ionctx/fixture.hpp"

using namespace ionctx;

namespace {

const double kTsirelson = 2.0 * std::sqrt(2.0);

QuantumState random_state(std::mt19937_64& gen, bool pure) {
  std::normal_distribution<double> n;
  if (pure) {
    ComplexVector v(4);
    for (int k = 0; k < 4; ++k) v(k) = Complex(n(gen), n(gen));
    return QuantumState::from_vector({2, 2}, v);
  }
  ComplexMatrix a(4, 4);
  for (int r = 0; r < 4; ++r)
    for (int c = 0; c < 4; ++c) a(r, c) = Complex(n(gen), n(gen));
  ComplexMatrix rho = a * a.adjoint();
  rho /= rho.trace().real();
  return QuantumState({2, 2}, rho);
}

// Correlation tensor T_kl = ⟨σ_k ⊗ σ_l⟩, k, l ∈ {x, y}.
std::array<std::array<double, 2>, 2> xy_correlations(const QuantumState& s) {
  const ComplexMatrix p[2] = {pauli_x(), pauli_y()};
  std::array<std::array<double, 2>, 2> t{};
  for (int k = 0; k < 2; ++k)
    for (int l = 0; l < 2; ++l) t[k][l] = expectation(s, tensor(p[k], p[l]));
  return t;
}

// max over frame offsets of C, computed from the correlation tensor. Each
// observable is sign·(−sin f, cos f)·σ; for a fixed Yb offset C is
// A cos b + B sin b in the Ba offset, maximized in closed form, and the Yb
// offset is scanned finely then polished by golden-section search.
double calibration_oracle(const QuantumState& s, const MeasurementSetup& setup) {
  const auto t = xy_correlations(s);
  auto dir = [](double f) { return std::array<double, 2>{-std::sin(f), std::cos(f)}; };
  auto max_over_b = [&](double a) {
    // Yb vectors with the offset applied, Ba vectors at zero offset.
    const auto u0 = dir(setup.specs[0].phase + a);
    const auto u2 = dir(setup.specs[2].phase + a);
    const double s0 = setup.specs[0].convention_sign, s2 = setup.specs[2].convention_sign;
    const double s1 = setup.specs[1].convention_sign, s3 = setup.specs[3].convention_sign;
    // Yb-side row vectors w_l = Σ u_k T_kl for each Ba observable; C = w·v(b).
    std::array<double, 2> w1{}, w3{};
    for (int l = 0; l < 2; ++l) {
      const double t0 = u0[0] * t[0][l] + u0[1] * t[1][l];
      const double t2 = u2[0] * t[0][l] + u2[1] * t[1][l];
      w1[l] = s1 * (s0 * t0 + s2 * t2);   // E01 + E12
      w3[l] = s3 * (s2 * t2 - s0 * t0);   // E23 − E30
    }
    // v(f + b) = R(b) v(f): collect the coefficients of cos b and sin b.
    auto coeffs = [&](const std::array<double, 2>& w, double f) {
      const auto v = dir(f);
      const auto vp = dir(f + kPi / 2);
      return std::array<double, 2>{w[0] * v[0] + w[1] * v[1], w[0] * vp[0] + w[1] * vp[1]};
    };
    const auto c1 = coeffs(w1, setup.specs[1].phase);
    const auto c3 = coeffs(w3, setup.specs[3].phase);
    return std::hypot(c1[0] + c3[0], c1[1] + c3[1]);
  };
  const int n = 20000;
  double best = -1.0, best_a = 0.0;
  for (int k = 0; k < n; ++k) {
    const double a = 2 * kPi * k / n;
    const double v = max_over_b(a);
    if (v > best) best = v, best_a = a;
  }
  double lo = best_a - 2 * kPi / n, hi = best_a + 2 * kPi / n;
  const double g = (std::sqrt(5.0) - 1) / 2;
  for (int it = 0; it < 100; ++it) {
    const double x1 = hi - g * (hi - lo), x2 = lo + g * (hi - lo);
    if (max_over_b(x1) < max_over_b(x2)) lo = x1; else hi = x2;
  }
  return std::max(best, max_over_b(0.5 * (lo + hi)));
}

std::vector<TrialRecord> constant_trials(int context, int a, int b, std::size_t n) {
  std::vector<TrialRecord> v;
  for (std::size_t k = 0; k < n; ++k) v.push_back({context, a, b, k, 0});
  return v;
}

ContextBatches golden_batches() {
  return ContextBatches::group(synthesize_trials(golden_summaries(), kGoldenTrialsPerContext));
}

}  // namespace

TEST_CASE("correlator basics") {
  const auto all_plus = constant_trials(0, 1, 1, 10);
  const auto e = correlator(all_plus);
  CHECK(e.mean == 1.0);
  CHECK(e.sem == 0.0);
  CHECK(e.n == 10);
  CHECK_THROWS_AS(correlator(std::vector<TrialRecord>{}), std::invalid_argument);
  CHECK_THROWS_AS(correlator(constant_trials(0, 1, 1, 1)), std::invalid_argument);
}

TEST_CASE("correlator SEM is the sample standard deviation over sqrt n") {
  std::vector<TrialRecord> t = constant_trials(0, 1, 1, 3);
  t.push_back({0, 1, -1, 3, 0});
  // products 1, 1, 1, −1: mean 0.5, sample variance 1, SEM 0.5.
  const auto e = correlator(t);
  CHECK(e.mean == doctest::Approx(0.5));
  CHECK(e.sem == doctest::Approx(0.5));
}

TEST_CASE("fair-coin products") {
  CounterRng rng(2024);
  std::vector<TrialRecord> t;
  for (std::uint64_t k = 0; k < 10000; ++k) {
    t.push_back({0, rng.bernoulli(0.5) ? 1 : -1, rng.bernoulli(0.5) ? 1 : -1, k, 0});
  }
  const auto e = correlator(t);
  CHECK(std::abs(e.mean) < 0.03);
  CHECK(e.sem == doctest::Approx(0.01).epsilon(0.01));
}

TEST_CASE("golden fixture reproduces the published table") {
  const auto batches = golden_batches();
  const auto corr = correlators(batches);
  const auto marg = MarginalTable::from_batches(batches);
  const auto summaries = golden_summaries();
  const double sems[4] = {0.0079, 0.0078, 0.0074, 0.0079};
  for (int c = 0; c < 4; ++c) {
    const auto& s = summaries[static_cast<std::size_t>(c)];
    CHECK(corr[static_cast<std::size_t>(c)]->mean == doctest::Approx(s.correlator).epsilon(1e-12));
    CHECK(std::abs(corr[static_cast<std::size_t>(c)]->sem - sems[c]) < 5e-5);
    CHECK(marg.get(c, 0)->mean == doctest::Approx(s.marginal_i).epsilon(1e-12));
    CHECK(marg.get(c, 1)->mean == doctest::Approx(s.marginal_j).epsilon(1e-12));
  }
  const auto counts = joint_counts(summaries[0], 10000);
  CHECK(counts == std::array<std::size_t, 4>{4313, 683, 1235, 3769});
  const auto c = chsh_statistic(corr);
  CHECK(c.value == doctest::Approx(2.5258).epsilon(1e-12));
  CHECK(std::abs(c.sem - 0.016) < 1e-3);
  double var = 0.0;
  for (const auto& e : corr) var += e->sem * e->sem;
  CHECK(c.sem * c.sem == doctest::Approx(var).epsilon(1e-12));
}

TEST_CASE("C needs every context") {
  CorrelatorSet set;
  for (std::size_t c = 0; c < 4; ++c) set[c] = CorrelatorEstimate{0.0, 0.1, 100};
  CHECK(chsh_statistic(set).value == 0.0);
  set[2].reset();
  CHECK_THROWS_AS(chsh_statistic(set), Error);
}

TEST_CASE("C is invariant under a global outcome relabeling") {
  auto trials = synthesize_trials(golden_summaries(), kGoldenTrialsPerContext);
  const auto before = chsh_statistic(correlators(ContextBatches::group(trials)));
  for (auto& t : trials) {
    t.outcome_i = -t.outcome_i;
    t.outcome_j = -t.outcome_j;
  }
  const auto after = chsh_statistic(correlators(ContextBatches::group(trials)));
  CHECK(after.value == before.value);
  CHECK(after.sem == before.sem);
}

TEST_CASE("epsilon models") {
  CHECK(epsilon_fraction(0.97) == doctest::Approx(0.06).epsilon(1e-12));
  CHECK(epsilon_fraction(1.0) == 0.0);
  CHECK(epsilon_fraction(0.0) == 2.0);
  CHECK_THROWS_AS(epsilon_fraction(1.01), std::invalid_argument);
  CHECK_THROWS_AS(epsilon_fraction(-0.1), std::invalid_argument);

  CHECK(epsilon_sequential(0.984) == doctest::Approx(0.128).epsilon(1e-12));
  CHECK(epsilon_sequential(1.0) == 0.0);
  CHECK(epsilon_sequential(0.99) == doctest::Approx(0.08).epsilon(1e-12));
  CHECK_THROWS_AS(epsilon_sequential(1.2), std::invalid_argument);

  EpsilonModels custom;
  custom.sequential_coefficient = 5.0;
  CHECK(epsilon_sequential(0.9, custom) == doctest::Approx(0.5));
}

TEST_CASE("maximally noncontextual epsilon") {
  const auto marg = MarginalTable::from_batches(golden_batches());
  const auto eps = epsilon_mnc(marg);
  // |−0.0008 − (−0.0056)| + |0.1066 − 0.1096| + |0.1356 − 0.1236| + |0.1114 − 0.1078|
  CHECK(eps.value == doctest::Approx(0.0048 + 0.0030 + 0.0120 + 0.0036).epsilon(1e-9));
  CHECK(std::abs(eps.value - 0.0234) < 5e-4);
  CHECK(eps.sem > 0.02);
  CHECK(eps.sem < 0.03);

  MarginalTable equal;
  for (int c = 0; c < 4; ++c) {
    equal.set(c, 0, {0.3, 0.01, 100});
    equal.set(c, 1, {0.3, 0.01, 100});
  }
  CHECK(epsilon_mnc(equal).value == 0.0);
  equal.set(0, 0, {0.4, 0.01, 100});
  CHECK(epsilon_mnc(equal).value == doctest::Approx(0.1));

  MarginalTable partial;
  partial.set(0, 0, {0.0, 0.0, 2});
  CHECK_THROWS_AS(epsilon_mnc(partial), Error);
}

TEST_CASE("maximally noncontextual epsilon is never negative") {
  std::mt19937_64 gen(4);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int k = 0; k < 1000; ++k) {
    MarginalTable t;
    for (int c = 0; c < 4; ++c)
      for (int s = 0; s < 2; ++s) t.set(c, s, {u(gen), 0.01, 100});
    REQUIRE(epsilon_mnc(t).value >= 0.0);
  }
}

TEST_CASE("bootstrap of the maximally noncontextual epsilon") {
  const auto batches = golden_batches();
  const auto a = epsilon_mnc_bootstrap(batches, 200, 9);
  const auto b = epsilon_mnc_bootstrap(batches, 200, 9);
  CHECK(a.mean == b.mean);
  CHECK(a.sem == b.sem);
  CHECK(a.resamples == 200);
  CHECK(a.mean > 0.0);
  CHECK(a.sem > 0.005);
  CHECK(a.sem < 0.04);
  CHECK_THROWS_AS(epsilon_mnc_bootstrap(batches, 1, 9), std::invalid_argument);
}

TEST_CASE("violation significance") {
  CHECK(violation_significance(2.526, 0.016, 0.128) == doctest::Approx(24.875));
  CHECK(violation_significance(2.526, 0.016, 0.06) == doctest::Approx(29.125));
  CHECK(violation_significance(2.1, 0.05, 0.1) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(violation_significance(2.0, 0.0, 0.0) == 0.0);
  CHECK_THROWS_AS(violation_significance(2.5, 0.0, 0.0), std::invalid_argument);
}

TEST_CASE("running moments merge in any order") {
  std::mt19937_64 gen(8);
  std::uniform_int_distribution<int> bit(0, 1);
  std::vector<double> xs(5000);
  for (auto& x : xs) x = bit(gen) ? 1.0 : -1.0;

  RunningMoments whole;
  for (double x : xs) whole.add(x);

  std::vector<RunningMoments> shards(7);
  for (std::size_t k = 0; k < xs.size(); ++k) shards[k % 7].add(xs[k]);
  RunningMoments forward, backward;
  for (const auto& s : shards) forward.merge(s);
  for (auto it = shards.rbegin(); it != shards.rend(); ++it) backward.merge(*it);

  for (const auto* m : {&forward, &backward}) {
    CHECK(m->count() == whole.count());
    CHECK(std::abs(m->mean() - whole.mean()) < 1e-12);
    CHECK(std::abs(m->sample_variance() - whole.sample_variance()) < 1e-12);
  }
  double mean = 0.0;
  for (double x : xs) mean += x;
  mean /= static_cast<double>(xs.size());
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  CHECK(std::abs(whole.m2() - ss) < 1e-9);
}

TEST_CASE("calibration reaches the Tsirelson bound for the ideal state") {
  const auto setup = MeasurementSetup::reference_default();
  const auto bell = QuantumState::target_bell();
  const auto cal = calibrate_phases(bell, setup);
  CHECK_FALSE(cal.degenerate);
  CHECK(std::abs(cal.achieved_c - kTsirelson) < 1e-6);
  auto tuned = setup;
  tuned.set_frame_offsets(cal.offset_yb, cal.offset_ba);
  CHECK(exact_chsh(bell, tuned) == doctest::Approx(cal.achieved_c).epsilon(1e-12));
  // Uniform sign convention leaves nothing to calibrate for this state.
  auto uniform = setup;
  uniform.specs[3].convention_sign = +1;
  CHECK(calibrate_phases(bell, uniform).degenerate);
}

TEST_CASE("calibration flags the maximally mixed state") {
  const auto cal = calibrate_phases(QuantumState::maximally_mixed({2, 2}), MeasurementSetup::reference_default());
  CHECK(cal.degenerate);
  CHECK(cal.achieved_c == 0.0);
  CHECK(cal.offset_yb == 0.0);
  CHECK(cal.offset_ba == 0.0);
}

TEST_CASE("calibration finds the global optimum") {
  std::mt19937_64 gen(12);
  const auto setup = MeasurementSetup::reference_default();
  for (int k = 0; k < 20; ++k) {
    const auto s = random_state(gen, k % 2 == 0);
    const auto cal = calibrate_phases(s, setup);
    if (cal.degenerate) continue;
    CHECK(std::abs(cal.achieved_c - calibration_oracle(s, setup)) < 1e-6);
  }
}

TEST_CASE("depolarization scales the calibrated value and keeps the argmax") {
  std::mt19937_64 gen(13);
  const auto setup = MeasurementSetup::reference_default();
  std::vector<QuantumState> states{QuantumState::target_bell()};
  for (int k = 0; k < 5; ++k) states.push_back(random_state(gen, true));
  for (const auto& s : states) {
    const auto base = calibrate_phases(s, setup);
    for (double p : {0.08, 0.3, 0.7}) {
      const auto cal = calibrate_phases(apply_depolarizing(s, p), setup);
      CHECK(std::abs(cal.achieved_c - (1 - p) * base.achieved_c) < 1e-6);
      CHECK(std::abs(std::remainder(cal.offset_yb - base.offset_yb, 2 * kPi)) < 1e-4);
      CHECK(std::abs(std::remainder(cal.offset_ba - base.offset_ba, 2 * kPi)) < 1e-4);
    }
  }
}

TEST_CASE("exact C never exceeds the Tsirelson bound") {
  std::mt19937_64 gen(21);
  std::uniform_real_distribution<double> angle(0.0, 2 * kPi);
  auto setup = MeasurementSetup::reference_default();
  for (int k = 0; k < 2000; ++k) {
    const auto s = random_state(gen, k % 3 != 0);
    for (auto& spec : setup.specs) {
      spec.phase = angle(gen);
      spec.convention_sign = gen() % 2 ? 1 : -1;
    }
    REQUIRE(std::abs(exact_chsh(s, setup)) <= kTsirelson + 1e-9);
  }
}

TEST_CASE("sampled C stays within five standard errors of the exact value") {
  auto setup = MeasurementSetup::reference_default();
  const auto s = apply_depolarizing(QuantumState::target_bell(), 0.1);
  const auto cal = calibrate_phases(s, setup);
  setup.set_frame_offsets(cal.offset_yb, cal.offset_ba);
  const auto noise = NoiseModel::reference();
  const double exact = exact_noisy_chsh(s, setup, noise);
  std::array<OutcomeDistribution, 4> dist;
  for (int c = 0; c < 4; ++c) dist[static_cast<std::size_t>(c)] = outcome_distribution(s, c, setup);
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    std::vector<TrialRecord> trials;
    for (int c = 0; c < 4; ++c) {
      for (std::uint64_t k = 0; k < 10000; ++k) {
        CounterRng rng(stream_key(seed, 0x20 + static_cast<std::uint64_t>(c), k));
        trials.push_back(sample_trial(dist[static_cast<std::size_t>(c)], setup, noise, rng, k));
      }
    }
    const auto c = chsh_statistic(correlators(ContextBatches::group(trials)));
    CHECK(std::abs(c.value - exact) < 5.0 * c.sem);
  }
}

TEST_CASE("depolarization for a target C") {
  auto setup = MeasurementSetup::reference_default();
  const auto bell = QuantumState::target_bell();
  const auto cal = calibrate_phases(bell, setup);
  setup.set_frame_offsets(cal.offset_yb, cal.offset_ba);
  const double p = depolarization_for_target(bell, setup, NoiseModel::none(), 2.526);
  CHECK(p == doctest::Approx(1.0 - 2.526 / kTsirelson).epsilon(1e-9));
  const auto noise = NoiseModel::reference();
  const double q = depolarization_for_target(bell, setup, noise, 2.526);
  CHECK(exact_noisy_chsh(apply_depolarizing(bell, q), setup, noise) == doctest::Approx(2.526).epsilon(1e-9));
  CHECK_THROWS_AS(depolarization_for_target(bell, setup, noise, 3.0), Error);
}
