#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "ionctx/crosstalk.hpp"
#include "ionctx/driver.hpp"
#include "ionctx/errors.hpp"
#include "ionctx/fixture.hpp"
#include "ionctx/trial_io.hpp"

namespace fs = std::filesystem;
using namespace ionctx;

namespace {

struct CommonOptions {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> trials;
  std::optional<unsigned> threads;
};

void add_common(CLI::App* cmd, CommonOptions& o) {
  cmd->add_option("-c,--config", o.config_path, "Experiment configuration (JSON)")->check(CLI::ExistingFile);
  cmd->add_option("-s,--seed", o.seed, "Master seed (overrides the config)");
  cmd->add_option("-n,--trials", o.trials, "Trials per setting (overrides the config)");
  cmd->add_option("-j,--threads", o.threads, "Worker threads, 0 for all cores");
}

ExperimentConfig load_config(const CommonOptions& o) {
  auto config = o.config_path.empty() ? ExperimentConfig{} : ExperimentConfig::load(o.config_path);
  if (o.seed) config.seed = *o.seed;
  if (o.trials) config.trials_per_setting = *o.trials;
  if (o.threads) config.threads = *o.threads;
  config.validate();
  return config;
}

void print_counts(const ContextBatches& batches) {
  for (int c = 0; c < 4; ++c) {
    std::printf("%s\t%zu\n", context_label(c).c_str(), batches.by_context[static_cast<std::size_t>(c)].size());
  }
  std::printf("total\t%zu\n", batches.total());
}

void emit_report(const ContextualityReport& r, const std::string& out_dir, bool json) {
  if (json) {
    std::cout << to_json(r).dump(2) << "\n";
  } else {
    std::cout << format_text(r);
  }
  if (!out_dir.empty()) {
    fs::create_directories(out_dir);
    write_text(fs::path(out_dir) / "report.txt", format_text(r));
    write_text(fs::path(out_dir) / "report.json", to_json(r).dump(2) + "\n");
  }
}

std::vector<RepeatabilityRecord> maybe_read_repeatability(const std::string& path) {
  if (path.empty()) return {};
  return read_repeatability(fs::path(path));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Dual-species trapped-ion contextuality simulator and analysis"};
  app.require_subcommand(1);

  CommonOptions common;
  std::string out_dir;
  std::string trial_file;
  std::string repeat_file;
  std::string run_dir;
  std::string table_path;
  bool json = false;
  std::size_t runs = 0;

  auto* simulate = app.add_subcommand("simulate", "Simulate a full run and write trials, report and manifest");
  add_common(simulate, common);
  simulate->add_option("-o,--out", out_dir, "Output directory")->required();

  auto* ingest_cmd = app.add_subcommand("ingest", "Validate a trial file and print per-context counts");
  ingest_cmd->add_option("trials", trial_file, "Trial file")->required()->check(CLI::ExistingFile);

  auto* analyze = app.add_subcommand("analyze", "Analyze a trial file and print the contextuality report");
  analyze->add_option("trials", trial_file, "Trial file")->required()->check(CLI::ExistingFile);
  analyze->add_option("-r,--repeatability", repeat_file, "Repeatability file")->check(CLI::ExistingFile);
  analyze->add_option("-c,--config", common.config_path, "Configuration supplying the epsilon models")
      ->check(CLI::ExistingFile);
  analyze->add_option("-o,--out", out_dir, "Also write report.txt and report.json here");
  analyze->add_flag("--json", json, "Print JSON instead of text");

  auto* report_cmd = app.add_subcommand("report", "Rebuild the report of a simulation output directory");
  report_cmd->add_option("run", run_dir, "Directory written by simulate")->required()->check(CLI::ExistingDirectory);
  report_cmd->add_option("-c,--config", common.config_path, "Configuration (default: the run's config.json)")
      ->check(CLI::ExistingFile);
  report_cmd->add_option("-o,--out", out_dir, "Output directory (default: the run directory)");
  report_cmd->add_flag("--json", json, "Print JSON instead of text");

  auto* repeat_cmd = app.add_subcommand("repeatability", "Run the double-measurement repeatability protocol");
  add_common(repeat_cmd, common);
  repeat_cmd->add_option("--runs", runs, "Runs per observable (default: from the config)");
  repeat_cmd->add_option("-o,--out", out_dir, "Write repeatability.tsv here");

  auto* crosstalk_cmd = app.add_subcommand("crosstalk", "Wrong-ion Raman crosstalk budget");
  crosstalk_cmd->add_option("--table", table_path, "Ion level table (JSON)")->check(CLI::ExistingFile);
  crosstalk_cmd->add_flag("--json", json, "Print JSON instead of text");

  auto* gate_cmd = app.add_subcommand("gate", "Mølmer–Sørensen evolution trace and parity scan as CSV");
  add_common(gate_cmd, common);
  gate_cmd->add_option("-o,--out", out_dir, "Output directory")->required();

  auto* fixture_cmd = app.add_subcommand("fixture", "Write the golden trial set reproducing the published means");
  fixture_cmd->add_option("-o,--out", trial_file, "Trial file to write")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*simulate) {
      const auto config = load_config(common);
      const auto result = run_simulation(config, out_dir);
      std::cout << format_text(result.report);
      std::printf("\nexact C (with readout noise) = %.4f, depolarization p = %.4f\nwrote %s\n",
                  result.prepared.exact_noisy_c, result.prepared.depolarization, out_dir.c_str());
    } else if (*ingest_cmd) {
      print_counts(ingest(trial_file));
    } else if (*analyze) {
      const auto config = common.config_path.empty() ? ExperimentConfig{} : ExperimentConfig::load(common.config_path);
      const auto repeat = maybe_read_repeatability(repeat_file);
      emit_report(report(ingest(trial_file), config, repeat), out_dir, json);
    } else if (*report_cmd) {
      const fs::path dir(run_dir);
      const auto config_path = common.config_path.empty() ? dir / "config.json" : fs::path(common.config_path);
      const auto config = fs::exists(config_path) ? ExperimentConfig::load(config_path) : ExperimentConfig{};
      const auto repeat_path = dir / "repeatability.tsv";
      const auto repeat = fs::exists(repeat_path) ? read_repeatability(repeat_path) : std::vector<RepeatabilityRecord>{};
      emit_report(report(ingest(dir / "trials.tsv"), config, repeat), out_dir.empty() ? run_dir : out_dir, json);
    } else if (*repeat_cmd) {
      const auto config = load_config(common);
      const auto prepared = prepare_experiment(config);
      const auto batch = run_repeatability(prepared, runs ? runs : config.repeatability_runs, config.require_seed());
      for (const auto& e : batch.estimates) {
        std::printf("O%d\tR = %.4f +/- %.4f\t(%zu of %zu runs kept)\n", e.observable, e.value, e.sem, e.retained,
                    e.attempted);
      }
      std::printf("mean R = %.4f\n", batch.mean);
      if (!out_dir.empty()) {
        fs::create_directories(out_dir);
        write_repeatability(fs::path(out_dir) / "repeatability.tsv", batch.records);
      }
    } else if (*crosstalk_cmd) {
      const auto table = CrosstalkTable::load(table_path.empty() ? CrosstalkTable::default_path() : fs::path(table_path));
      table.check_k();
      const auto budget = crosstalk_budget(table);
      if (json) {
        nlohmann::json j{{"intensity_355", budget.intensity_355},
                         {"intensity_532", budget.intensity_532},
                         {"negligible", budget.negligible}};
        for (const auto& l : budget.lines) {
          j["lines"].push_back({{"ion", ion_name(l.ion)},
                                {"laser", laser_name(l.laser)},
                                {"rabi_mhz", l.rabi_mhz},
                                {"detuning_mhz", l.detuning_mhz},
                                {"max_transfer", l.max_transfer},
                                {"comb_detuning_mhz", l.comb_detuning_mhz},
                                {"comb_max_transfer", l.comb_max_transfer}});
        }
        std::cout << j.dump(2) << "\n";
      } else {
        std::cout << format_budget(budget);
      }
    } else if (*gate_cmd) {
      const auto config = load_config(common);
      const auto& ms = config.state.ms;
      fs::create_directories(out_dir);
      const auto times = linspace(0.0, ms.gate_time_us, static_cast<int>(config.ms_trace_points));
      const auto trace = ms_trace(ms, times);
      std::ofstream trace_out(fs::path(out_dir) / "ms_trace.csv");
      write_csv(trace_out, trace);
      const auto state = ms_evolve(ms, ms.gate_time_us);
      const auto scan = parity_scan(state, linspace(0.0, 2.0 * kPi, static_cast<int>(config.parity_scan_points)));
      std::ofstream scan_out(fs::path(out_dir) / "parity_scan.csv");
      write_csv(scan_out, scan);
      const auto p = populations(state);
      std::printf("t = %.2f us: P00 = %.4f P01 = %.4f P10 = %.4f P11 = %.4f\n", ms.gate_time_us, p[0], p[1], p[2],
                  p[3]);
      std::printf("parity contrast = %.4f, fidelity bound = %.4f\n", scan.contrast,
                  fidelity_bound(std::min(1.0, p[0] + p[3]), std::min(1.0, scan.contrast)));
    } else if (*fixture_cmd) {
      write_trials(fs::path(trial_file), synthesize_trials(golden_summaries(), kGoldenTrialsPerContext));
      std::printf("wrote %s\n", trial_file.c_str());
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
