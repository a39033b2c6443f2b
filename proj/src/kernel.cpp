#include "ionctx/kernel.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

#include "ionctx/errors.hpp"

namespace ionctx {

namespace {

int product(const std::vector<int>& dims) {
  return std::accumulate(dims.begin(), dims.end(), 1, std::multiplies<>());
}

}  // namespace

std::string_view ion_name(Ion ion) { return ion == Ion::Yb ? "Yb" : "Ba"; }

Ion parse_ion(std::string_view name) {
  if (name == "Yb" || name == "yb") return Ion::Yb;
  if (name == "Ba" || name == "ba") return Ion::Ba;
  throw std::invalid_argument("unknown ion '" + std::string(name) + "'");
}

ComplexMatrix identity(int dim) { return ComplexMatrix::Identity(dim, dim); }

ComplexMatrix pauli_x() {
  ComplexMatrix m(2, 2);
  m << 0.0, 1.0,
       1.0, 0.0;
  return m;
}

ComplexMatrix pauli_y() {
  ComplexMatrix m(2, 2);
  m << 0.0, Complex(0.0, -1.0),
       Complex(0.0, 1.0), 0.0;
  return m;
}

ComplexMatrix pauli_z() {
  ComplexMatrix m(2, 2);
  m << 1.0, 0.0,
       0.0, -1.0;
  return m;
}

bool is_unitary(const ComplexMatrix& u, double tol) {
  if (u.rows() != u.cols()) return false;
  return ((u.adjoint() * u) - identity(static_cast<int>(u.rows()))).cwiseAbs().maxCoeff() <= tol;
}

bool is_hermitian(const ComplexMatrix& a, double tol) {
  if (a.rows() != a.cols()) return false;
  return (a - a.adjoint()).cwiseAbs().maxCoeff() <= tol;
}

ComplexMatrix rotation(double theta, double phi) {
  const double c = std::cos(theta / 2.0);
  const double s = std::sin(theta / 2.0);
  const Complex minus_i(0.0, -1.0);
  ComplexMatrix r(2, 2);
  r << c, minus_i * std::polar(1.0, -phi) * s,
       minus_i * std::polar(1.0, phi) * s, c;
  return r;
}

void ObservableSpec::validate() const {
  if (index < 0 || index > 3) throw std::invalid_argument("observable index must be 0..3");
  if (ion != ion_for_observable(index)) {
    throw std::invalid_argument("observable " + std::to_string(index) + " must live on " +
                                std::string(ion_name(ion_for_observable(index))));
  }
  if (convention_sign != 1 && convention_sign != -1) {
    throw std::invalid_argument("convention_sign must be +1 or -1");
  }
}

Ion ion_for_observable(int index) { return index % 2 == 0 ? Ion::Yb : Ion::Ba; }

ComplexMatrix observable_from_phase(const ObservableSpec& spec) {
  const ComplexMatrix r = rotation(kPi / 2.0, spec.effective_phase());
  return static_cast<double>(spec.convention_sign) * (r.adjoint() * pauli_z() * r);
}

ComplexMatrix tensor(const ComplexMatrix& a, const ComplexMatrix& b) {
  ComplexMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

ComplexMatrix embed(const ComplexMatrix& op, const std::vector<int>& dims, std::size_t which) {
  if (which >= dims.size()) throw DimensionError("embed: subsystem index out of range");
  if (op.rows() != dims[which] || op.cols() != dims[which]) {
    throw DimensionError("embed: operator does not match subsystem dimension");
  }
  ComplexMatrix out = identity(1);
  for (std::size_t k = 0; k < dims.size(); ++k) {
    out = tensor(out, k == which ? op : identity(dims[k]));
  }
  return out;
}

QuantumState::QuantumState(std::vector<int> dims, ComplexMatrix rho, const Tolerances& tol)
    : dims_(std::move(dims)), rho_(std::move(rho)) {
  if (dims_.empty()) throw DimensionError("state needs at least one subsystem");
  for (int d : dims_) {
    if (d <= 0) throw DimensionError("subsystem dimensions must be positive");
  }
  const int d = product(dims_);
  if (rho_.rows() != d || rho_.cols() != d) {
    throw DimensionError("density matrix is " + std::to_string(rho_.rows()) + "x" +
                         std::to_string(rho_.cols()) + ", dims imply " + std::to_string(d));
  }
  const Complex tr = rho_.trace();
  if (std::abs(tr.real() - 1.0) > tol.state || std::abs(tr.imag()) > tol.state) {
    throw std::invalid_argument("density matrix trace " + std::to_string(tr.real()) + " != 1");
  }
  if (!is_hermitian(rho_, tol.state)) throw std::invalid_argument("density matrix not Hermitian");
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(rho_, Eigen::EigenvaluesOnly);
  if (solver.eigenvalues().minCoeff() < -tol.eigen_floor) {
    throw std::invalid_argument("density matrix has a negative eigenvalue");
  }
}

QuantumState QuantumState::from_vector(std::vector<int> dims, const ComplexVector& psi) {
  const double norm = psi.norm();
  if (norm == 0.0) throw std::invalid_argument("zero state vector");
  const ComplexVector v = psi / norm;
  return QuantumState(std::move(dims), v * v.adjoint());
}

QuantumState QuantumState::maximally_mixed(std::vector<int> dims) {
  const int d = product(dims);
  return QuantumState(std::move(dims), identity(d) / static_cast<double>(d));
}

QuantumState QuantumState::basis(int q_yb, int q_ba) {
  if ((q_yb != 0 && q_yb != 1) || (q_ba != 0 && q_ba != 1)) {
    throw std::invalid_argument("qubit levels must be 0 or 1");
  }
  ComplexVector psi = ComplexVector::Zero(4);
  psi(2 * q_yb + q_ba) = 1.0;
  return from_vector({2, 2}, psi);
}

QuantumState QuantumState::target_bell() {
  ComplexVector psi = ComplexVector::Zero(4);
  psi(0) = 1.0;
  psi(3) = Complex(0.0, 1.0);
  return from_vector({2, 2}, psi);
}

QuantumState QuantumState::trace_out_last() const {
  if (dims_.size() < 2) throw DimensionError("cannot trace out the only subsystem");
  const int last = dims_.back();
  std::vector<int> kept(dims_.begin(), dims_.end() - 1);
  const int d = product(kept);
  ComplexMatrix reduced = ComplexMatrix::Zero(d, d);
  for (int i = 0; i < d; ++i) {
    for (int j = 0; j < d; ++j) {
      Complex acc = 0.0;
      for (int n = 0; n < last; ++n) acc += rho_(i * last + n, j * last + n);
      reduced(i, j) = acc;
    }
  }
  // Re-symmetrize so that roundoff from long propagations doesn't trip validation.
  reduced = 0.5 * (reduced + reduced.adjoint()).eval();
  reduced /= reduced.trace().real();
  return QuantumState(std::move(kept), std::move(reduced));
}

double expectation(const QuantumState& state, const ComplexMatrix& observable) {
  if (observable.rows() != state.dim() || observable.cols() != state.dim()) {
    throw DimensionError("observable dimension " + std::to_string(observable.rows()) +
                         " does not match state dimension " + std::to_string(state.dim()));
  }
  const Complex value = (state.rho() * observable).trace();
  return value.real();
}

QuantumState apply_unitary(const QuantumState& state, const ComplexMatrix& u) {
  if (u.rows() != state.dim() || u.cols() != state.dim()) {
    throw DimensionError("unitary does not match state dimension");
  }
  ComplexMatrix rho = u * state.rho() * u.adjoint();
  rho = 0.5 * (rho + rho.adjoint()).eval();
  return QuantumState(state.dims(), std::move(rho));
}

QuantumState apply_depolarizing(const QuantumState& state, double p) {
  if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("depolarizing probability outside [0, 1]");
  const int d = state.dim();
  ComplexMatrix rho = (1.0 - p) * state.rho() + (p / d) * identity(d);
  return QuantumState(state.dims(), std::move(rho));
}

double fidelity_to_pure(const QuantumState& state, const ComplexVector& target) {
  if (target.size() != state.dim()) throw DimensionError("target vector dimension mismatch");
  const ComplexVector v = target / target.norm();
  return (v.adjoint() * state.rho() * v)(0, 0).real();
}

}  // namespace ionctx
