#pragma once

// Dense linear algebra on the two-qubit (optionally ⊗ phonon) space.
//
// Basis ordering is |q_Yb q_Ba n⟩ with q_Yb the most significant index and
// the phonon number last. Qubit level |0⟩ is the dark state.

#include <complex>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace ionctx {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;

inline constexpr double kPi = 3.14159265358979323846;

struct Tolerances {
  double state = 1e-10;       // trace and Hermiticity of density matrices
  double eigen_floor = 1e-9;  // smallest admissible (negative) eigenvalue
  double unitary = 1e-12;
};

enum class Ion { Yb, Ba };

std::string_view ion_name(Ion ion);
Ion parse_ion(std::string_view name);

ComplexMatrix identity(int dim);
ComplexMatrix pauli_x();
ComplexMatrix pauli_y();
ComplexMatrix pauli_z();

bool is_unitary(const ComplexMatrix& u, double tol = Tolerances{}.unitary);
bool is_hermitian(const ComplexMatrix& a, double tol = Tolerances{}.state);

// R(θ, φ): rotation by θ about cos φ σx + sin φ σy.
ComplexMatrix rotation(double theta, double phi);

// One of the four ±1-valued observables. Indices 0 and 2 live on Yb,
// 1 and 3 on Ba.
struct ObservableSpec {
  int index = 0;
  Ion ion = Ion::Yb;
  double phase = 0.0;        // analysis phase φ of the π/2 mapping pulse
  int convention_sign = +1;  // ±1, multiplies the operator
  double frame_offset = 0.0; // calibrated local frame, added to φ

  double effective_phase() const { return phase + frame_offset; }
  void validate() const;
};

Ion ion_for_observable(int index);

// sign · R†(π/2, φ + offset) σz R(π/2, φ + offset)
ComplexMatrix observable_from_phase(const ObservableSpec& spec);

// Kronecker product a ⊗ b (a is the more significant factor).
ComplexMatrix tensor(const ComplexMatrix& a, const ComplexMatrix& b);

// Lifts `op` acting on subsystem `which` of `dims` to the full space.
ComplexMatrix embed(const ComplexMatrix& op, const std::vector<int>& dims, std::size_t which);

class QuantumState {
 public:
  // Validates trace, Hermiticity and positivity against `tol`.
  QuantumState(std::vector<int> dims, ComplexMatrix rho, const Tolerances& tol = {});

  static QuantumState from_vector(std::vector<int> dims, const ComplexVector& psi);
  static QuantumState maximally_mixed(std::vector<int> dims);
  // |q_Yb q_Ba⟩ product basis state, q ∈ {0, 1}.
  static QuantumState basis(int q_yb, int q_ba);
  // (|00⟩ + i|11⟩)/√2
  static QuantumState target_bell();

  const std::vector<int>& dims() const noexcept { return dims_; }
  const ComplexMatrix& rho() const noexcept { return rho_; }
  int dim() const noexcept { return static_cast<int>(rho_.rows()); }

  // Traces out the last subsystem.
  QuantumState trace_out_last() const;

 private:
  std::vector<int> dims_;
  ComplexMatrix rho_;
};

double expectation(const QuantumState& state, const ComplexMatrix& observable);

QuantumState apply_unitary(const QuantumState& state, const ComplexMatrix& u);

// (1 − p) ρ + p I/d
QuantumState apply_depolarizing(const QuantumState& state, double p);

// Fidelity ⟨φ|ρ|φ⟩ against a pure target.
double fidelity_to_pure(const QuantumState& state, const ComplexVector& target);

}  // namespace ionctx
