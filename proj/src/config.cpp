#include "ionctx/config.hpp"

#include <cstdio>
#include <fstream>
#include <set>

#include "ionctx/errors.hpp"

namespace ionctx {

namespace {

using nlohmann::json;

void reject_unknown(const json& obj, const std::set<std::string>& allowed, const std::string& where) {
  if (!obj.is_object()) throw Error(where + " must be an object");
  for (const auto& [key, value] : obj.items()) {
    if (!allowed.count(key)) throw Error("unknown key '" + key + "' in " + where);
  }
}

template <typename T>
void read(const json& obj, const char* key, T& target) {
  if (obj.contains(key)) target = obj.at(key).get<T>();
}

ConfusionMatrix confusion_from_json(const json& j, ConfusionMatrix m, const std::string& where) {
  reject_unknown(j, {"dark_as_bright", "bright_as_dark"}, where);
  read(j, "dark_as_bright", m.p_report1_given0);
  read(j, "bright_as_dark", m.p_report0_given1);
  return m;
}

json confusion_to_json(const ConfusionMatrix& m) {
  return {{"dark_as_bright", m.p_report1_given0}, {"bright_as_dark", m.p_report0_given1}};
}

MsParams ms_from_json(const json& j) {
  reject_unknown(j,
                 {"detuning_khz", "gate_time_us", "mode_frequency_mhz", "sideband_rabi_khz", "phonon_cutoff",
                  "nbar_oop", "nbar_ip", "dephasing_rate_khz", "max_step_us"},
                 "state.ms");
  MsParams p;
  read(j, "detuning_khz", p.detuning_khz);
  read(j, "gate_time_us", p.gate_time_us);
  read(j, "mode_frequency_mhz", p.mode_frequency_mhz);
  read(j, "sideband_rabi_khz", p.sideband_rabi_khz);
  read(j, "phonon_cutoff", p.phonon_cutoff);
  read(j, "nbar_oop", p.nbar_oop);
  read(j, "nbar_ip", p.nbar_ip);
  read(j, "dephasing_rate_khz", p.dephasing_rate_khz);
  read(j, "max_step_us", p.max_step_us);
  return p;
}

json ms_to_json(const MsParams& p) {
  return {{"detuning_khz", p.detuning_khz},     {"gate_time_us", p.gate_time_us},
          {"mode_frequency_mhz", p.mode_frequency_mhz}, {"sideband_rabi_khz", p.sideband_rabi_khz},
          {"phonon_cutoff", p.phonon_cutoff},   {"nbar_oop", p.nbar_oop},
          {"nbar_ip", p.nbar_ip},               {"dephasing_rate_khz", p.dephasing_rate_khz},
          {"max_step_us", p.max_step_us}};
}

}  // namespace

MeasurementSetup ExperimentConfig::setup() const {
  MeasurementSetup s;
  s.dark_outcome = dark_outcome;
  for (std::size_t k = 0; k < 4; ++k) {
    const int idx = static_cast<int>(k);
    s.specs[k] = ObservableSpec{idx, ion_for_observable(idx), observables.phases_pi[k] * kPi,
                                observables.convention_signs[k], 0.0};
  }
  s.set_frame_offsets(observables.offset_yb, observables.offset_ba);
  return s;
}

void ExperimentConfig::validate() const {
  if (trials_per_setting < 2) throw Error("trials_per_setting must be at least 2");
  noise.validate();
  setup().validate();
  if (state.depolarization < 0.0 || state.depolarization > 1.0) throw Error("depolarization must lie in [0, 1]");
  if (state.target_exact_c && !(*state.target_exact_c >= -4.0 && *state.target_exact_c <= 4.0)) {
    throw Error("target_exact_c must lie in [-4, 4]");
  }
  if (state.source == StateSource::MsGate) state.ms.validate();
  if (epsilon.max_algebraic <= epsilon.noncontextual_bound) throw Error("epsilon.max_algebraic must exceed the bound");
  if (ms_trace_points < 2 || parity_scan_points < 8) throw Error("too few trace or parity-scan points");
}

std::uint64_t ExperimentConfig::require_seed() const {
  if (!seed) throw Error("a seed is required for simulation (config \"seed\" or --seed)");
  return *seed;
}

ExperimentConfig ExperimentConfig::from_json(const json& doc) {
  ExperimentConfig c;
  try {
    reject_unknown(doc,
                   {"format", "comment", "seed", "trials_per_setting", "repeatability_runs", "threads",
                    "dark_outcome", "noise", "state", "observables", "epsilon", "bootstrap_resamples",
                    "ms_trace_points", "parity_scan_points"},
                   "config");
    if (doc.contains("format") && doc.at("format") != "ionctx-config/1") {
      throw Error("unsupported config format " + doc.at("format").dump());
    }
    if (doc.contains("seed") && !doc.at("seed").is_null()) c.seed = doc.at("seed").get<std::uint64_t>();
    read(doc, "trials_per_setting", c.trials_per_setting);
    read(doc, "repeatability_runs", c.repeatability_runs);
    read(doc, "threads", c.threads);
    read(doc, "dark_outcome", c.dark_outcome);
    read(doc, "bootstrap_resamples", c.bootstrap_resamples);
    read(doc, "ms_trace_points", c.ms_trace_points);
    read(doc, "parity_scan_points", c.parity_scan_points);

    if (doc.contains("noise")) {
      const auto& n = doc.at("noise");
      if (n.is_string()) {
        if (n == "reference") c.noise = NoiseModel::reference();
        else if (n == "none") c.noise = NoiseModel::none();
        else throw Error("noise preset must be \"reference\" or \"none\"");
      } else {
        reject_unknown(n, {"yb", "ba"}, "noise");
        if (n.contains("yb")) c.noise.yb = confusion_from_json(n.at("yb"), c.noise.yb, "noise.yb");
        if (n.contains("ba")) c.noise.ba = confusion_from_json(n.at("ba"), c.noise.ba, "noise.ba");
      }
    }

    if (doc.contains("state")) {
      const auto& s = doc.at("state");
      reject_unknown(s, {"source", "ms", "depolarization", "target_exact_c"}, "state");
      if (s.contains("source")) {
        const auto src = s.at("source").get<std::string>();
        if (src == "ideal") c.state.source = StateSource::Ideal;
        else if (src == "ms_gate") c.state.source = StateSource::MsGate;
        else throw Error("state.source must be \"ideal\" or \"ms_gate\"");
      }
      if (s.contains("ms")) c.state.ms = ms_from_json(s.at("ms"));
      read(s, "depolarization", c.state.depolarization);
      if (s.contains("target_exact_c") && !s.at("target_exact_c").is_null()) {
        c.state.target_exact_c = s.at("target_exact_c").get<double>();
      }
    }

    if (doc.contains("observables")) {
      const auto& o = doc.at("observables");
      reject_unknown(o, {"phases_pi", "convention_signs", "calibrate", "offset_yb", "offset_ba"}, "observables");
      read(o, "phases_pi", c.observables.phases_pi);
      read(o, "convention_signs", c.observables.convention_signs);
      read(o, "calibrate", c.observables.calibrate);
      read(o, "offset_yb", c.observables.offset_yb);
      read(o, "offset_ba", c.observables.offset_ba);
    }

    if (doc.contains("epsilon")) {
      const auto& e = doc.at("epsilon");
      reject_unknown(e, {"noncontextual_bound", "max_algebraic", "sequential_coefficient"}, "epsilon");
      read(e, "noncontextual_bound", c.epsilon.noncontextual_bound);
      read(e, "max_algebraic", c.epsilon.max_algebraic);
      read(e, "sequential_coefficient", c.epsilon.sequential_coefficient);
    }
  } catch (const json::exception& e) {
    throw Error(std::string("config: ") + e.what());
  }
  c.validate();
  return c;
}

ExperimentConfig ExperimentConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  json doc;
  try {
    in >> doc;
  } catch (const json::parse_error& e) {
    throw Error(path.string() + ": " + e.what());
  }
  return from_json(doc);
}

json ExperimentConfig::to_json() const {
  json j;
  j["format"] = "ionctx-config/1";
  j["seed"] = seed ? json(*seed) : json(nullptr);
  j["trials_per_setting"] = trials_per_setting;
  j["repeatability_runs"] = repeatability_runs;
  j["threads"] = threads;
  j["dark_outcome"] = dark_outcome;
  j["noise"] = {{"yb", confusion_to_json(noise.yb)}, {"ba", confusion_to_json(noise.ba)}};
  j["state"] = {{"source", state.source == StateSource::Ideal ? "ideal" : "ms_gate"},
                {"ms", ms_to_json(state.ms)},
                {"depolarization", state.depolarization},
                {"target_exact_c", state.target_exact_c ? json(*state.target_exact_c) : json(nullptr)}};
  j["observables"] = {{"phases_pi", observables.phases_pi},
                      {"convention_signs", observables.convention_signs},
                      {"calibrate", observables.calibrate},
                      {"offset_yb", observables.offset_yb},
                      {"offset_ba", observables.offset_ba}};
  j["epsilon"] = {{"noncontextual_bound", epsilon.noncontextual_bound},
                  {"max_algebraic", epsilon.max_algebraic},
                  {"sequential_coefficient", epsilon.sequential_coefficient}};
  j["bootstrap_resamples"] = bootstrap_resamples;
  j["ms_trace_points"] = ms_trace_points;
  j["parity_scan_points"] = parity_scan_points;
  return j;
}

std::string ExperimentConfig::hash() const {
  auto j = to_json();
  j.erase("seed");
  j.erase("threads");
  const std::string text = j.dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace ionctx
