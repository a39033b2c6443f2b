#include "ionctx/crosstalk.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "ionctx/errors.hpp"

#ifndef IONCTX_DATA_DIR
#define IONCTX_DATA_DIR "data"
#endif

namespace ionctx {

std::string_view laser_name(Laser laser) { return laser == Laser::nm355 ? "355" : "532"; }

Laser parse_laser(std::string_view name) {
  if (name == "355" || name == "355nm") return Laser::nm355;
  if (name == "532" || name == "532nm") return Laser::nm532;
  throw std::invalid_argument("unknown laser: " + std::string(name));
}

namespace {

LevelParams level_from_json(const nlohmann::json& j) {
  LevelParams p;
  p.linewidth_mhz = j.at("linewidth_mhz").get<double>();
  p.saturation_intensity = j.at("saturation_intensity_mw_cm2").get<double>();
  p.k_listed = j.at("k").get<double>();
  const auto& det = j.at("detuning_thz");
  p.detuning_thz[static_cast<std::size_t>(Laser::nm355)] = det.at("355").get<double>();
  p.detuning_thz[static_cast<std::size_t>(Laser::nm532)] = det.at("532").get<double>();
  if (p.linewidth_mhz <= 0 || p.saturation_intensity <= 0) throw Error("level parameters must be positive");
  return p;
}

IonOpticalParams ion_from_json(Ion ion, const nlohmann::json& j) {
  IonOpticalParams p;
  p.ion = ion;
  p.qubit_splitting_mhz = j.at("qubit_splitting_mhz").get<double>();
  p.p12 = level_from_json(j.at("levels").at("P1/2"));
  p.p32 = level_from_json(j.at("levels").at("P3/2"));
  return p;
}

// Ω per unit intensity.
double rabi_per_intensity(const CrosstalkTable& table, Ion ion, Laser laser) {
  const auto& p = table.for_ion(ion);
  const double d1 = p.p12.detuning_mhz(laser);
  const double d2 = p.p32.detuning_mhz(laser);
  if (d1 == 0.0 || d2 == 0.0) throw std::invalid_argument("zero detuning from an excited level");
  const double prefactor = ion == Ion::Ba ? std::sqrt(2.0) : 1.0;
  return prefactor / 12.0 * (-p.p12.k() / d1 + p.p32.k() / d2);
}

}  // namespace

CrosstalkTable CrosstalkTable::from_json(const nlohmann::json& doc) {
  try {
    CrosstalkTable t;
    t.yb = ion_from_json(Ion::Yb, doc.at("ions").at("Yb"));
    t.ba = ion_from_json(Ion::Ba, doc.at("ions").at("Ba"));
    t.repetition_rate_mhz = doc.at("repetition_rate_mhz").get<double>();
    t.target_rabi_mhz = doc.at("target_rabi_mhz").get<double>();
    t.wrong_ion_detuning_mhz = doc.at("wrong_ion_detuning_mhz").get<double>();
    const auto& lasers = doc.at("lasers");
    t.comb_shift_mhz[static_cast<std::size_t>(Laser::nm355)] = lasers.at("355").at("comb_shift_mhz").get<double>();
    t.comb_shift_mhz[static_cast<std::size_t>(Laser::nm532)] = lasers.at("532").at("comb_shift_mhz").get<double>();
    return t;
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("ion level table: ") + e.what());
  }
}

CrosstalkTable CrosstalkTable::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(path.string() + ": " + e.what());
  }
  return from_json(doc);
}

std::filesystem::path CrosstalkTable::default_path() {
  return std::filesystem::path(IONCTX_DATA_DIR) / "ion_levels.json";
}

void CrosstalkTable::check_k(double rel_tol) const {
  for (const auto* ion : {&yb, &ba}) {
    for (const auto* level : {&ion->p12, &ion->p32}) {
      const double rel = std::abs(level->k() - level->k_listed) / level->k_listed;
      if (rel > rel_tol) {
        throw Error(std::string(ion_name(ion->ion)) + ": recomputed k " + std::to_string(level->k()) +
                    " disagrees with listed " + std::to_string(level->k_listed));
      }
    }
  }
}

double raman_rabi(const CrosstalkTable& table, Ion ion, Laser laser, double intensity) {
  if (intensity < 0) throw std::invalid_argument("negative intensity");
  return std::abs(intensity * rabi_per_intensity(table, ion, laser));
}

double intensity_for_rabi(const CrosstalkTable& table, Ion ion, Laser laser, double rabi_mhz) {
  const double per = rabi_per_intensity(table, ion, laser);
  if (per == 0.0) throw Error("laser does not couple this ion");
  return std::abs(rabi_mhz / per);
}

double max_population_transfer(double rabi_mhz, double detuning_mhz) {
  const double o2 = rabi_mhz * rabi_mhz;
  const double denom = detuning_mhz * detuning_mhz + o2;
  if (denom == 0.0) throw std::invalid_argument("Rabi frequency and detuning are both zero");
  return o2 / denom;
}

double comb_detuning(double qubit_splitting_mhz, double comb_shift_mhz) {
  return std::abs(qubit_splitting_mhz - comb_shift_mhz);
}

double nearest_comb_detuning(double qubit_splitting_mhz, double comb_shift_mhz, double repetition_rate_mhz) {
  if (repetition_rate_mhz <= 0) throw std::invalid_argument("repetition rate must be positive");
  double best = std::numeric_limits<double>::infinity();
  for (double shift : {comb_shift_mhz, -comb_shift_mhz}) {
    const double m = std::round((qubit_splitting_mhz - shift) / repetition_rate_mhz);
    for (double dm : {-1.0, 0.0, 1.0}) {
      best = std::min(best, std::abs(qubit_splitting_mhz - ((m + dm) * repetition_rate_mhz + shift)));
    }
  }
  return best;
}

CrosstalkBudget crosstalk_budget(const CrosstalkTable& table) {
  CrosstalkBudget b;
  b.intensity_355 = intensity_for_rabi(table, Ion::Yb, Laser::nm355, table.target_rabi_mhz);
  b.intensity_532 = intensity_for_rabi(table, Ion::Ba, Laser::nm532, table.target_rabi_mhz);

  auto line = [&](Ion ion, Laser laser, double intensity) {
    CrosstalkLine l;
    l.ion = ion;
    l.laser = laser;
    l.intensity = intensity;
    l.rabi_mhz = raman_rabi(table, ion, laser, intensity);
    l.detuning_mhz = table.wrong_ion_detuning_mhz;
    l.max_transfer = max_population_transfer(l.rabi_mhz, l.detuning_mhz);
    l.comb_detuning_mhz = nearest_comb_detuning(table.for_ion(ion).qubit_splitting_mhz,
                                                table.comb_shift_mhz[static_cast<std::size_t>(laser)],
                                                table.repetition_rate_mhz);
    l.comb_max_transfer = max_population_transfer(l.rabi_mhz, l.comb_detuning_mhz);
    return l;
  };
  b.lines[0] = line(Ion::Yb, Laser::nm532, b.intensity_532);
  b.lines[1] = line(Ion::Ba, Laser::nm355, b.intensity_355);
  b.negligible = b.lines[0].max_transfer < b.negligible_below && b.lines[1].max_transfer < b.negligible_below;
  return b;
}

std::string format_budget(const CrosstalkBudget& b) {
  std::ostringstream out;
  char buf[200];
  out << "Wrong-ion Raman crosstalk\n\n";
  std::snprintf(buf, sizeof buf, "  I(355 nm) = %.4g mW/cm^2\n  I(532 nm) = %.4g mW/cm^2\n\n", b.intensity_355,
                b.intensity_532);
  out << buf;
  out << "  ion  laser  Omega/2pi (MHz)  Delta/2pi (MHz)  P_max       comb Delta/2pi  comb P_max\n";
  for (const auto& l : b.lines) {
    std::snprintf(buf, sizeof buf, "  %-4s %-6s %-16.6f %-16.3f %-11.3e %-15.3f %.3e\n",
                  std::string(ion_name(l.ion)).c_str(), std::string(laser_name(l.laser)).c_str(), l.rabi_mhz,
                  l.detuning_mhz, l.max_transfer, l.comb_detuning_mhz, l.comb_max_transfer);
    out << buf;
  }
  std::snprintf(buf, sizeof buf, "\n  verdict: %s (threshold P_max < %.0e at the quoted detuning)\n",
                b.negligible ? "negligible" : "NOT negligible", b.negligible_below);
  out << buf;
  return out.str();
}

}  // namespace ionctx
