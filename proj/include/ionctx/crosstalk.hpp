#pragma once

// Raman coupling of each laser to the "wrong" ion.
//
//   Ω_Yb = I/12 · (−k1/Δ1 + k2/Δ2),   Ω_Ba = √2 I/12 · (−k1/Δ1 + k2/Δ2)
//
// with k = γ²/I_sat per excited level (1 = P1/2, 2 = P3/2). Frequencies are
// Ω/2π and Δ/2π in MHz, intensities in mW/cm².

#include <array>
#include <filesystem>
#include <string>
#include <string_view>

#include <json.hpp>

#include "ionctx/kernel.hpp"

namespace ionctx {

enum class Laser { nm355, nm532 };

std::string_view laser_name(Laser laser);
Laser parse_laser(std::string_view name);

struct LevelParams {
  double linewidth_mhz = 0.0;         // γ/2π
  double saturation_intensity = 0.0;  // mW/cm²
  double k_listed = 0.0;              // tabulated γ²/I_sat
  std::array<double, 2> detuning_thz{};  // indexed by Laser, signed

  double k() const { return linewidth_mhz * linewidth_mhz / saturation_intensity; }
  double detuning_mhz(Laser laser) const { return detuning_thz[static_cast<std::size_t>(laser)] * 1e6; }
};

struct IonOpticalParams {
  Ion ion = Ion::Yb;
  double qubit_splitting_mhz = 0.0;
  LevelParams p12;
  LevelParams p32;
};

struct CrosstalkTable {
  IonOpticalParams yb;
  IonOpticalParams ba;
  double repetition_rate_mhz = 80.097;
  std::array<double, 2> comb_shift_mhz{12.5, 16.3};  // indexed by Laser
  double target_rabi_mhz = 0.18;
  double wrong_ion_detuning_mhz = 4.3;

  const IonOpticalParams& for_ion(Ion ion) const { return ion == Ion::Yb ? yb : ba; }
  static Laser drive_laser(Ion ion) { return ion == Ion::Yb ? Laser::nm355 : Laser::nm532; }

  static CrosstalkTable from_json(const nlohmann::json& doc);
  static CrosstalkTable load(const std::filesystem::path& path);
  static std::filesystem::path default_path();

  // Recomputed k against the tabulated values; throws beyond `rel_tol`.
  void check_k(double rel_tol = 0.01) const;
};

// |Ω| in MHz for an intensity in mW/cm²; throws on a zero detuning.
double raman_rabi(const CrosstalkTable& table, Ion ion, Laser laser, double intensity);
double intensity_for_rabi(const CrosstalkTable& table, Ion ion, Laser laser, double rabi_mhz);

// Ω²/(Δ² + Ω²)
double max_population_transfer(double rabi_mhz, double detuning_mhz);

// |splitting − shift|
double comb_detuning(double qubit_splitting_mhz, double comb_shift_mhz);

// Smallest |splitting − (m·f_rep ± shift)| over integer m: the beat notes of
// two combs offset by `shift` sit at every m·f_rep ± shift.
double nearest_comb_detuning(double qubit_splitting_mhz, double comb_shift_mhz, double repetition_rate_mhz);

struct CrosstalkLine {
  Ion ion = Ion::Yb;        // ion hit by the wrong laser
  Laser laser = Laser::nm355;
  double intensity = 0.0;   // of that laser, set by its own target Rabi frequency
  double rabi_mhz = 0.0;    // |Ω| on the wrong ion
  double detuning_mhz = 0.0;       // quoted minimum
  double max_transfer = 0.0;
  double comb_detuning_mhz = 0.0;  // from the comb arithmetic
  double comb_max_transfer = 0.0;
};

struct CrosstalkBudget {
  double intensity_355 = 0.0;
  double intensity_532 = 0.0;
  std::array<CrosstalkLine, 2> lines;  // Yb under 532, Ba under 355
  double negligible_below = 1e-4;
  bool negligible = false;
};

CrosstalkBudget crosstalk_budget(const CrosstalkTable& table);
std::string format_budget(const CrosstalkBudget& budget);

}  // namespace ionctx
