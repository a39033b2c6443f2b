#include "ionctx/ms_dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "ionctx/errors.hpp"

namespace ionctx {

MsParams MsParams::ideal(double detuning_khz, int phonon_cutoff) {
  MsParams p;
  p.detuning_khz = detuning_khz;
  p.sideband_rabi_khz = detuning_khz / 2.0;
  p.gate_time_us = 1e3 / detuning_khz;
  p.phonon_cutoff = phonon_cutoff;
  p.nbar_oop = 0.0;
  p.nbar_ip = 0.0;
  p.dephasing_rate_khz = 0.0;
  return p;
}

void MsParams::validate() const {
  if (!(detuning_khz > 0.0)) throw std::invalid_argument("MS detuning must be positive");
  if (!(sideband_rabi_khz >= 0.0)) throw std::invalid_argument("sideband Rabi frequency must be >= 0");
  if (!(gate_time_us >= 0.0)) throw std::invalid_argument("gate time must be >= 0");
  if (!(nbar_oop >= 0.0) || !(nbar_ip >= 0.0)) throw std::invalid_argument("phonon occupation must be >= 0");
  if (!(dephasing_rate_khz >= 0.0)) throw std::invalid_argument("dephasing rate must be >= 0");
  if (!(max_step_us > 0.0)) throw std::invalid_argument("max step must be positive");
  if (phonon_cutoff < 5.0 * nbar_oop + 5.0) {
    throw TruncationError("phonon cutoff " + std::to_string(phonon_cutoff) +
                          " below 5*nbar+5 for nbar=" + std::to_string(nbar_oop));
  }
}

std::vector<double> thermal_populations(int cutoff, double nbar) {
  if (cutoff < 0) throw std::invalid_argument("negative phonon cutoff");
  if (!(nbar >= 0.0)) throw std::invalid_argument("negative phonon occupation");
  std::vector<double> p(static_cast<std::size_t>(cutoff) + 1, 0.0);
  if (nbar == 0.0) {
    p[0] = 1.0;
    return p;
  }
  const double ratio = nbar / (1.0 + nbar);
  double w = 1.0;
  double total = 0.0;
  for (auto& pn : p) {
    pn = w;
    total += w;
    w *= ratio;
  }
  for (auto& pn : p) pn /= total;
  return p;
}

namespace {

// Piecewise propagation with a fourth-order Magnus step per interval.
class MsPropagator {
 public:
  explicit MsPropagator(const MsParams& params)
      : levels_(params.phonon_cutoff + 1),
        dim_(4 * levels_),
        coupling_(kPi * params.sideband_rabi_khz * 1e-3),
        detuning_(2.0 * kPi * params.detuning_khz * 1e-3),
        dephasing_(params.dephasing_rate_khz * 1e-3) {
    ComplexMatrix lower = ComplexMatrix::Zero(levels_, levels_);
    for (int n = 1; n < levels_; ++n) lower(n - 1, n) = std::sqrt(static_cast<double>(n));
    const ComplexMatrix spin = tensor(pauli_x(), identity(2)) + tensor(identity(2), pauli_x());
    spin_lower_ = tensor(spin, lower);
    spin_raise_ = tensor(spin, lower.adjoint());

    const auto pops = thermal_populations(params.phonon_cutoff, params.nbar_oop);
    rho0_ = ComplexMatrix::Zero(dim_, dim_);
    for (int n = 0; n < levels_; ++n) rho0_(n, n) = pops[static_cast<std::size_t>(n)];
  }

  int dim() const { return dim_; }
  int levels() const { return levels_; }
  const ComplexMatrix& initial() const { return rho0_; }

  ComplexMatrix hamiltonian(double t) const {
    const Complex phase = std::polar(1.0, -detuning_ * t);
    return coupling_ * (phase * spin_lower_ + std::conj(phase) * spin_raise_);
  }

  ComplexMatrix step_unitary(double t0, double h) const {
    constexpr double kGaussOffset = 0.28867513459481288225;  // √3/6
    const ComplexMatrix h1 = hamiltonian(t0 + h * (0.5 - kGaussOffset));
    const ComplexMatrix h2 = hamiltonian(t0 + h * (0.5 + kGaussOffset));
    const ComplexMatrix commutator = h2 * h1 - h1 * h2;
    ComplexMatrix effective = 0.5 * (h1 + h2) - Complex(0.0, std::sqrt(3.0) * h / 12.0) * commutator;
    effective = 0.5 * (effective + effective.adjoint()).eval();
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(effective);
    const auto& values = solver.eigenvalues();
    ComplexVector phases(values.size());
    for (Eigen::Index k = 0; k < values.size(); ++k) phases(k) = std::polar(1.0, -values(k) * h);
    return solver.eigenvectors() * phases.asDiagonal() * solver.eigenvectors().adjoint();
  }

  // Pure dephasing of both qubits for time `dt`, applied elementwise.
  void dephase(ComplexMatrix& rho, double dt) const {
    if (dephasing_ == 0.0 || dt == 0.0) return;
    const double decay = std::exp(-dephasing_ * dt);
    for (int i = 0; i < dim_; ++i) {
      const int qi = i / levels_;
      for (int j = 0; j < dim_; ++j) {
        const int flips = __builtin_popcount(static_cast<unsigned>(qi ^ (j / levels_)));
        if (flips == 1) rho(i, j) *= decay;
        else if (flips == 2) rho(i, j) *= decay * decay;
      }
    }
  }

  double top_level_population(const ComplexMatrix& rho) const {
    double p = 0.0;
    for (int q = 0; q < 4; ++q) p += rho(q * levels_ + levels_ - 1, q * levels_ + levels_ - 1).real();
    return p;
  }

 private:
  int levels_;
  int dim_;
  double coupling_;   // Ω_sb/2 in rad/µs
  double detuning_;   // δ in rad/µs
  double dephasing_;  // per µs
  ComplexMatrix spin_lower_;
  ComplexMatrix spin_raise_;
  ComplexMatrix rho0_;
};

struct PropagationResult {
  std::vector<ComplexMatrix> snapshots;
  double max_top_level = 0.0;
};

PropagationResult propagate(const MsPropagator& prop, std::span<const double> times, double max_step,
                            int refine) {
  PropagationResult out;
  ComplexMatrix rho = prop.initial();
  double t = 0.0;
  out.max_top_level = prop.top_level_population(rho);
  for (double target : times) {
    const double span = target - t;
    if (span > 0.0) {
      const int steps = refine * std::max(1, static_cast<int>(std::ceil(span / max_step - 1e-9)));
      const double h = span / steps;
      for (int k = 0; k < steps; ++k) {
        const double t0 = t + k * h;
        const ComplexMatrix u = prop.step_unitary(t0, h);
        prop.dephase(rho, h / 2.0);
        rho = (u * rho * u.adjoint()).eval();
        prop.dephase(rho, h / 2.0);
        out.max_top_level = std::max(out.max_top_level, prop.top_level_population(rho));
      }
      t = target;
    }
    out.snapshots.push_back(rho);
  }
  return out;
}

void check_times(std::span<const double> times) {
  double prev = 0.0;
  for (double t : times) {
    if (!(t >= 0.0)) throw std::invalid_argument("evolution time must be >= 0");
    if (t < prev) throw std::invalid_argument("evolution times must be ascending");
    prev = t;
  }
}

std::vector<ComplexMatrix> checked_propagation(const MsParams& params, std::span<const double> times,
                                               double leakage_limit, double convergence_tol,
                                               double* max_top, double* halving_error) {
  params.validate();
  check_times(times);
  const MsPropagator prop(params);
  PropagationResult coarse = propagate(prop, times, params.max_step_us, 1);
  PropagationResult fine = propagate(prop, times, params.max_step_us, 2);

  double err = 0.0;
  for (std::size_t k = 0; k < times.size(); ++k) {
    err = std::max(err, (fine.snapshots[k] - coarse.snapshots[k]).cwiseAbs().maxCoeff());
  }
  const double top = std::max(coarse.max_top_level, fine.max_top_level);
  if (top > leakage_limit) {
    std::ostringstream msg;
    msg << "phonon truncation inadequate: top Fock level population " << top << " > " << leakage_limit
        << " at cutoff " << params.phonon_cutoff;
    throw TruncationError(msg.str());
  }
  if (err > convergence_tol) {
    std::ostringstream msg;
    msg << "MS propagation not converged under step halving (max change " << err << ")";
    throw TruncationError(msg.str());
  }
  if (max_top) *max_top = top;
  if (halving_error) *halving_error = err;
  return std::move(fine.snapshots);
}

QuantumState to_state(const MsParams& params, ComplexMatrix rho, bool trace_phonon) {
  rho = 0.5 * (rho + rho.adjoint()).eval();
  rho /= rho.trace().real();
  QuantumState full({2, 2, params.phonon_cutoff + 1}, std::move(rho), Tolerances{1e-8, 1e-9, 1e-12});
  return trace_phonon ? full.trace_out_last() : full;
}

}  // namespace

MsEvolution ms_evolve_detailed(const MsParams& params, double t_us, bool trace_phonon, double leakage_limit,
                               double convergence_tol) {
  const double times[] = {t_us};
  double top = 0.0;
  double err = 0.0;
  auto snaps = checked_propagation(params, times, leakage_limit, convergence_tol, &top, &err);
  return MsEvolution{to_state(params, std::move(snaps.front()), trace_phonon), top, err};
}

QuantumState ms_evolve(const MsParams& params, double t_us, bool trace_phonon) {
  return ms_evolve_detailed(params, t_us, trace_phonon).state;
}

std::array<double, 4> populations(const QuantumState& two_qubit) {
  if (two_qubit.dim() != 4) throw DimensionError("populations need a two-qubit state");
  std::array<double, 4> p{};
  for (int k = 0; k < 4; ++k) p[static_cast<std::size_t>(k)] = two_qubit.rho()(k, k).real();
  return p;
}

EvolutionTrace ms_trace(const MsParams& params, std::span<const double> times_us) {
  auto snaps = checked_propagation(params, times_us, 1e-4, 1e-6, nullptr, nullptr);
  EvolutionTrace trace;
  trace.times_us.assign(times_us.begin(), times_us.end());
  trace.populations.reserve(snaps.size());
  for (auto& rho : snaps) trace.populations.push_back(populations(to_state(params, std::move(rho), true)));
  return trace;
}

std::vector<double> linspace(double start, double stop, int count) {
  if (count < 2) throw std::invalid_argument("linspace needs at least two points");
  std::vector<double> out(static_cast<std::size_t>(count));
  for (int k = 0; k < count; ++k) out[static_cast<std::size_t>(k)] = start + (stop - start) * k / (count - 1);
  return out;
}

ParityScan parity_scan(const QuantumState& two_qubit, std::span<const double> phases) {
  if (two_qubit.dim() != 4) throw DimensionError("parity scan needs a two-qubit state");
  if (phases.size() < 8) throw std::invalid_argument("parity fit needs at least 8 phase points");

  const ComplexMatrix zz = tensor(pauli_z(), pauli_z());
  ParityScan scan;
  scan.phases.assign(phases.begin(), phases.end());
  Eigen::MatrixXd design(static_cast<Eigen::Index>(phases.size()), 3);
  Eigen::VectorXd values(static_cast<Eigen::Index>(phases.size()));
  for (std::size_t k = 0; k < phases.size(); ++k) {
    const ComplexMatrix r = rotation(kPi / 2.0, phases[k]);
    const double parity = expectation(apply_unitary(two_qubit, tensor(r, r)), zz);
    scan.parity.push_back(parity);
    const auto row = static_cast<Eigen::Index>(k);
    design(row, 0) = 1.0;
    design(row, 1) = std::cos(2.0 * phases[k]);
    design(row, 2) = std::sin(2.0 * phases[k]);
    values(row) = parity;
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
  if (qr.rank() < 3) throw std::invalid_argument("parity fit is singular for these phases");
  const Eigen::Vector3d coef = qr.solve(values);
  scan.offset = coef(0);
  scan.contrast = std::hypot(coef(1), coef(2));
  return scan;
}

double fidelity_bound(double p00_plus_p11, double contrast) {
  if (!(p00_plus_p11 >= 0.0 && p00_plus_p11 <= 1.0)) throw std::invalid_argument("P00+P11 outside [0, 1]");
  if (!(contrast >= 0.0 && contrast <= 1.0)) throw std::invalid_argument("contrast outside [0, 1]");
  return 0.5 * (p00_plus_p11 + contrast);
}

void write_csv(std::ostream& out, const EvolutionTrace& trace) {
  out << "time_us,P00,P01,P10,P11\n" << std::setprecision(10);
  for (std::size_t k = 0; k < trace.times_us.size(); ++k) {
    const auto& p = trace.populations[k];
    out << trace.times_us[k] << ',' << p[0] << ',' << p[1] << ',' << p[2] << ',' << p[3] << '\n';
  }
}

void write_csv(std::ostream& out, const ParityScan& scan) {
  out << "phase_rad,parity\n" << std::setprecision(10);
  for (std::size_t k = 0; k < scan.phases.size(); ++k) out << scan.phases[k] << ',' << scan.parity[k] << '\n';
}

}  // namespace ionctx
