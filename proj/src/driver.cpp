#include "ionctx/driver.hpp"

#include <algorithm>
#include <chrono>
#include <ctime>
#include <fstream>
#include <sstream>
#include <thread>

#include "ionctx/errors.hpp"
#include "ionctx/trial_io.hpp"

namespace ionctx {

namespace {

std::string utc_now() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

unsigned worker_count(unsigned requested, std::size_t work) {
  unsigned n = requested ? requested : std::max(1u, std::thread::hardware_concurrency());
  // Small jobs are not worth a thread each.
  const std::size_t useful = std::max<std::size_t>(1, work / 4096);
  return static_cast<unsigned>(std::min<std::size_t>(n, useful));
}

}  // namespace

PreparedExperiment prepare_experiment(const ExperimentConfig& config) {
  config.validate();
  PreparedExperiment p;
  p.noise = config.noise;
  p.pure_state = config.state.source == StateSource::MsGate
                     ? ms_evolve(config.state.ms, config.state.ms.gate_time_us)
                     : QuantumState::target_bell();
  p.setup = config.setup();
  if (config.observables.calibrate) {
    const auto cal = calibrate_phases(p.pure_state, p.setup);
    if (cal.degenerate) throw Error("phase calibration failed: C does not depend on the frame offsets");
    p.setup.set_frame_offsets(cal.offset_yb, cal.offset_ba);
    p.calibration = cal;
  }
  p.depolarization = config.state.target_exact_c
                         ? depolarization_for_target(p.pure_state, p.setup, p.noise, *config.state.target_exact_c)
                         : config.state.depolarization;
  p.state = apply_depolarizing(p.pure_state, p.depolarization);
  p.exact_c = exact_chsh(p.state, p.setup);
  p.exact_noisy_c = exact_noisy_chsh(p.state, p.setup, p.noise);
  return p;
}

std::vector<int> context_schedule(std::size_t n_per_setting, std::uint64_t seed) {
  std::vector<int> order(4 * n_per_setting);
  for (std::size_t k = 0; k < order.size(); ++k) order[k] = static_cast<int>(k / n_per_setting);
  CounterRng rng(stream_key(seed, stream_domain::kContextOrder, 0));
  for (std::size_t k = order.size(); k > 1; --k) {
    std::swap(order[k - 1], order[rng.below(k)]);
  }
  return order;
}

std::vector<TrialRecord> generate_trials(const PreparedExperiment& prepared, std::size_t n_per_setting,
                                         std::uint64_t seed, unsigned threads) {
  const auto order = context_schedule(n_per_setting, seed);
  std::array<OutcomeDistribution, 4> dist;
  for (int c = 0; c < 4; ++c) dist[static_cast<std::size_t>(c)] = outcome_distribution(prepared.state, c, prepared.setup);

  std::vector<TrialRecord> trials(order.size());
  auto fill = [&](std::size_t begin, std::size_t end) {
    for (std::size_t k = begin; k < end; ++k) {
      const auto c = static_cast<std::uint64_t>(order[k]);
      CounterRng rng(stream_key(seed, stream_domain::kTrial + c, k));
      trials[k] = sample_trial(dist[c], prepared.setup, prepared.noise, rng, k);
    }
  };

  const unsigned workers = worker_count(threads, trials.size());
  if (workers <= 1) {
    fill(0, trials.size());
    return trials;
  }
  std::vector<std::jthread> pool;
  const std::size_t chunk = (trials.size() + workers - 1) / workers;
  for (unsigned w = 0; w < workers; ++w) {
    const std::size_t begin = std::min(trials.size(), w * chunk);
    const std::size_t end = std::min(trials.size(), begin + chunk);
    pool.emplace_back(fill, begin, end);
  }
  pool.clear();
  return trials;
}

std::optional<RepeatabilityBatch> summarize_repeatability(std::vector<RepeatabilityRecord> records) {
  if (records.empty()) return std::nullopt;
  RepeatabilityBatch b;
  b.records = std::move(records);
  for (int obs = 0; obs < 4; ++obs) {
    b.estimates[static_cast<std::size_t>(obs)] = estimate_repeatability(b.records, obs);
    b.mean += b.estimates[static_cast<std::size_t>(obs)].value / 4.0;
  }
  return b;
}

RepeatabilityBatch run_repeatability(const PreparedExperiment& prepared, std::size_t runs, std::uint64_t seed) {
  std::vector<RepeatabilityRecord> all;
  for (int obs = 0; obs < 4; ++obs) {
    auto part = simulate_repeatability(prepared.state, obs, prepared.setup, prepared.noise, runs, seed);
    all.insert(all.end(), part.begin(), part.end());
  }
  auto b = summarize_repeatability(std::move(all));
  if (!b) throw Error("repeatability needs at least one run per observable");
  return *b;
}

nlohmann::json RunManifest::to_json() const {
  nlohmann::json j;
  j["artifact_version"] = artifact_version;
  j["config_hash"] = config_hash;
  j["seed"] = seed;
  j["started_utc"] = started_utc;
  j["finished_utc"] = finished_utc;
  nlohmann::json counts;
  for (int c = 0; c < 4; ++c) counts[context_label(c)] = trials_per_context[static_cast<std::size_t>(c)];
  j["trials_per_context"] = counts;
  nlohmann::json files;
  for (const auto& [role, path] : outputs) files[role] = path;
  j["outputs"] = files;
  return j;
}

ReportOptions report_options(const ExperimentConfig& config, std::optional<double> mean_repeatability) {
  ReportOptions o;
  o.mean_repeatability = mean_repeatability;
  o.models = config.epsilon;
  o.bootstrap_resamples = config.bootstrap_resamples;
  o.bootstrap_seed = config.seed.value_or(1);
  return o;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  out << text;
  if (!out) throw Error("failed writing " + path.string());
}

SimulationResult run_simulation(const ExperimentConfig& config, const std::filesystem::path& out_dir) {
  const std::uint64_t seed = config.require_seed();
  SimulationResult r;
  r.manifest.started_utc = utc_now();
  r.manifest.config_hash = config.hash();
  r.manifest.seed = seed;

  r.prepared = prepare_experiment(config);
  r.trials = generate_trials(r.prepared, config.trials_per_setting, seed, config.threads);
  std::optional<double> rbar;
  if (config.repeatability_runs > 0) {
    r.repeatability = run_repeatability(r.prepared, config.repeatability_runs, seed);
    rbar = r.repeatability.mean;
  }
  const auto batches = ContextBatches::group(r.trials);
  r.report = build_report(batches, report_options(config, rbar));
  r.manifest.trials_per_context = r.report.counts;

  if (!out_dir.empty()) {
    std::filesystem::create_directories(out_dir);
    auto record = [&](const char* role, const char* name) {
      const auto path = out_dir / name;
      r.manifest.outputs.emplace_back(role, path.string());
      return path;
    };
    write_trials(record("trials", "trials.tsv"), r.trials);
    if (!r.repeatability.records.empty()) write_repeatability(record("repeatability", "repeatability.tsv"), r.repeatability.records);
    write_text(record("report_text", "report.txt"), format_text(r.report));
    write_text(record("report_json", "report.json"), to_json(r.report).dump(2) + "\n");
    write_text(record("config", "config.json"), config.to_json().dump(2) + "\n");
    if (config.state.source == StateSource::MsGate) {
      const auto times = linspace(0.0, config.state.ms.gate_time_us, static_cast<int>(config.ms_trace_points));
      std::ostringstream trace;
      write_csv(trace, ms_trace(config.state.ms, times));
      write_text(record("ms_trace", "ms_trace.csv"), trace.str());
      const auto phases = linspace(0.0, 2.0 * kPi, static_cast<int>(config.parity_scan_points));
      std::ostringstream scan;
      write_csv(scan, parity_scan(r.prepared.pure_state, phases));
      write_text(record("parity_scan", "parity_scan.csv"), scan.str());
    }
    const auto manifest_path = record("manifest", "manifest.json");
    r.manifest.finished_utc = utc_now();
    write_text(manifest_path, r.manifest.to_json().dump(2) + "\n");
  } else {
    r.manifest.finished_utc = utc_now();
  }
  return r;
}

ContextBatches ingest(const std::filesystem::path& trial_file) {
  const auto trials = read_trials(trial_file);
  return ContextBatches::group(trials);
}

ContextualityReport report(const ContextBatches& batches, const ExperimentConfig& config,
                           std::span<const RepeatabilityRecord> repeatability) {
  std::optional<double> rbar;
  if (!repeatability.empty()) {
    auto b = summarize_repeatability({repeatability.begin(), repeatability.end()});
    rbar = b->mean;
  }
  return build_report(batches, report_options(config, rbar));
}

}  // namespace ionctx
