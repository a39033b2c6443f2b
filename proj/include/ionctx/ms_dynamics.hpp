#pragma once

// Mølmer–Sørensen interaction on the axial out-of-phase mode.
//
// Interaction-picture Hamiltonian (Lamb–Dicke regime, resonant carrier
// terms dropped):
//
//   H(t)/ħ = (Ω_sb/2) S_x (a e^{-iδt} + a† e^{iδt}),   S_x = σx^Yb + σx^Ba
//
// with Ω_sb the sideband Rabi frequency and δ the sideband detuning, both
// as cyclic frequencies. The spin–motion loop closes at t = 1/δ; for
// Ω_sb = δ/2 the accumulated spin phase is exp(±iπ/4 σx σx), mapping |00⟩
// to a maximally entangled |00⟩ + e^{iχ}|11⟩ state.

#include <array>
#include <iosfwd>
#include <span>
#include <vector>

#include "ionctx/kernel.hpp"

namespace ionctx {

struct MsParams {
  double detuning_khz = 22.0;        // δ
  double gate_time_us = 45.4;
  double mode_frequency_mhz = 1.67;  // f_z, OOP mode
  double sideband_rabi_khz = 11.0;   // Ω_sb; closed-loop gate needs δ/2
  int phonon_cutoff = 15;            // highest Fock level kept
  double nbar_oop = 0.04;
  double nbar_ip = 0.11;             // recorded only; its effect goes through dephasing_rate_khz
  double dephasing_rate_khz = 0.0;   // single-qubit coherence decays as exp(-rate·t)
  double max_step_us = 0.1;

  // n̄ = 0, no dephasing, Ω_sb = δ/2, t_gate = 1/δ.
  static MsParams ideal(double detuning_khz = 22.0, int phonon_cutoff = 15);

  double closed_loop_time_us() const { return 1e3 / detuning_khz; }
  void validate() const;
};

// Thermal (geometric) phonon distribution truncated at `cutoff` and renormalized.
std::vector<double> thermal_populations(int cutoff, double nbar);

struct MsEvolution {
  QuantumState state;          // two qubits, or qubits ⊗ phonon when not traced
  double max_top_level = 0.0;  // largest population seen in the top Fock level
  double halving_error = 0.0;  // max |Δρ| between step h and h/2
};

// Evolves |00⟩ ⊗ thermal(n̄_OOP) for time t. Throws TruncationError when the
// top Fock level population exceeds `leakage_limit` or step halving moves
// any density-matrix entry by more than `convergence_tol`.
MsEvolution ms_evolve_detailed(const MsParams& params, double t_us, bool trace_phonon = true,
                               double leakage_limit = 1e-4, double convergence_tol = 1e-6);

QuantumState ms_evolve(const MsParams& params, double t_us, bool trace_phonon = true);

struct EvolutionTrace {
  std::vector<double> times_us;
  std::vector<std::array<double, 4>> populations;  // P00, P01, P10, P11
};

// Populations at each of `times_us` (sorted ascending, ≥ 0).
EvolutionTrace ms_trace(const MsParams& params, std::span<const double> times_us);

// Evenly spaced times on [0, t_end].
std::vector<double> linspace(double start, double stop, int count);

std::array<double, 4> populations(const QuantumState& two_qubit);

struct ParityScan {
  std::vector<double> phases;
  std::vector<double> parity;
  double contrast = 0.0;  // amplitude of the cos 2φ / sin 2φ component
  double offset = 0.0;
};

// π/2 analysis pulses R(π/2, φ) on both ions, parity P00 + P11 − P01 − P10,
// least-squares fit of a + b cos 2φ + c sin 2φ. Needs ≥ 8 phases.
ParityScan parity_scan(const QuantumState& two_qubit, std::span<const double> phases);

// (P00 + P11 + contrast) / 2
double fidelity_bound(double p00_plus_p11, double contrast);

void write_csv(std::ostream& out, const EvolutionTrace& trace);
void write_csv(std::ostream& out, const ParityScan& scan);

}  // namespace ionctx
