#pragma once
#include <cmath>
#include <utility>
#include <vector>

#include "nvdnp/hamiltonian.hpp"

namespace nvdnp {

// One microwave tone: lab-frame coupling rabi * cos(2 pi f t + phase) on the
// electron transition the model targets. "rabi" is calibrated so that a single
// resonant tone flops a two-level reduction at exactly this frequency.
struct DriveTone {
  double frequency = 0.0;  // Hz
  double rabi = 0.0;       // Hz
  double phase = 0.0;      // radians
};

// ---- collapse operators -------------------------------------------------
// Each builder returns sqrt(rate) * L ready for the dissipator
// D[L] rho = L rho L^+ - (1/2){L^+ L, rho}. Rates are in 1/s.

// Optical pumping into m_s = 0: spontaneous-emission-like jumps from both
// m_s = +-1. The intersystem crossing that does this in the real defect is
// spin-selective but incoherent, which is all that matters here.
inline std::vector<Matrix> optical_pump_ops(const SpinSystemSpec& spec, double rate) {
  int d = spec.multiplicity(0);
  if (d < 2) throw InvalidArgument("optical_pump_ops: electron needs at least two levels");
  std::vector<Matrix> ops;
  for (int lv = 0; lv < d; ++lv) {
    if (lv == kLevelZero) continue;
    Matrix jump = Matrix::Zero(d, d);
    jump(kLevelZero, lv) = std::sqrt(rate);
    ops.push_back(embed(spec, jump, 0));
  }
  return ops;
}

// Pure electron dephasing at rate gamma_phi: L = sqrt(gamma_phi) Sz. A
// coherence between m and m' decays at gamma_phi (m - m')^2 / 2.
inline Matrix electron_dephasing_op(const SpinSystemSpec& spec, double rate) {
  SpinOps e = spin_operators(spec.electron.spin);
  return std::sqrt(rate) * embed(spec, e.sz, 0);
}

// Electron depolarization: directed flips between every pair of levels, each
// at rate/2, so each level empties toward the uniform mixture at total rate.
inline std::vector<Matrix> electron_depolarization_ops(const SpinSystemSpec& spec, double rate) {
  int d = spec.multiplicity(0);
  std::vector<Matrix> ops;
  for (int a = 0; a < d; ++a)
    for (int b = 0; b < d; ++b) {
      if (a == b) continue;
      Matrix jump = Matrix::Zero(d, d);
      jump(a, b) = std::sqrt(rate / (d - 1));
      ops.push_back(embed(spec, jump, 0));
    }
  return ops;
}

// Thermal populations of one nuclear spin at the given field. The Zeeman term
// is -gamma B Iz, so larger m is lower energy for gamma > 0.
inline std::vector<double> nuclear_thermal_populations(const SpinSpecies& sp, double field_tesla,
                                                       double temperature) {
  if (temperature <= 0) throw InvalidArgument("nuclear thermal populations: T must be > 0");
  int d = static_cast<int>(std::lround(2.0 * sp.spin + 1.0));
  std::vector<double> p(d);
  double x = planck_h * sp.gamma * field_tesla / (boltzmann_k * temperature);
  double z = 0.0;
  for (int j = 0; j < d; ++j) {
    double m = sp.spin - j;
    p[j] = std::exp(x * m);
    z += p[j];
  }
  for (double& v : p) v /= z;
  return p;
}

// Nuclear spin-lattice relaxation: flips between adjacent m levels with the
// destination weighted by its thermal population, so detailed balance holds
// and the dissipator alone relaxes the nucleus to the thermal mixture.
// "rate" is the total population refresh rate (1/T1).
inline std::vector<Matrix> nuclear_relaxation_ops(const SpinSystemSpec& spec, int spin_index,
                                                  double rate, double field_tesla,
                                                  double temperature) {
  if (spin_index < 1 || spin_index >= spec.spin_count())
    throw InvalidArgument("nuclear_relaxation_ops: index must name a nucleus");
  const SpinSpecies& sp = spec.species(spin_index);
  int d = spec.multiplicity(spin_index);
  std::vector<double> p = nuclear_thermal_populations(sp, field_tesla, temperature);
  std::vector<Matrix> ops;
  for (int from = 0; from < d; ++from)
    for (int to : {from - 1, from + 1}) {
      if (to < 0 || to >= d) continue;
      Matrix jump = Matrix::Zero(d, d);
      jump(to, from) = std::sqrt(rate * p[static_cast<size_t>(to)]);
      ops.push_back(embed(spec, jump, spin_index));
    }
  return ops;
}

// ---- the model ----------------------------------------------------------

struct RateSet {
  double optical_pump = 0.1e6;        // 1/s per m_s = +-1 level
  double electron_dephasing = 0.1e6;  // 1/s
  double electron_t1 = 1.0e3;         // 1/s
  double nuclear_t1 = 200.0;          // 1/s, applied to the readout nucleus
};

struct LindbladModel {
  SpinSystemSpec system;
  double field = 17.6e-3;      // tesla
  double temperature = 297.0;  // K
  // Electron levels the microwave addresses, (lower, upper) by bare energy.
  std::pair<int, int> target_levels = {kLevelZero, kLevelMinus};
  std::vector<DriveTone> tones;
  std::vector<Matrix> collapse_ops;  // prescaled by sqrt(rate)
  int readout_nucleus = -1;          // -1: last spin-1/2 nucleus

  Matrix hamiltonian() const { return build_hamiltonian(system, field); }

  Matrix drive_op() const {
    return electron_transition_op(system, target_levels.first, target_levels.second);
  }

  int readout_index() const {
    if (readout_nucleus >= 0) return readout_nucleus;
    for (int k = system.spin_count() - 1; k >= 1; --k)
      if (std::abs(system.species(k).spin - 0.5) < 1e-12) return k;
    throw InvalidArgument("model has no spin-1/2 nucleus to read out");
  }

  Matrix readout_op() const { return nuclear_polarization_op(system, readout_index()); }
};

// The workhorse configuration: optical pumping, electron dephasing and T1,
// and slow T1 on the readout nucleus only. The 14N is a spectator whose own
// lifetime plays no role on simulation timescales, so it gets no bath; that
// keeps the hyperfine triplet an exact mixture of shifted subsystem spectra.
inline LindbladModel standard_model(const SpinSystemSpec& spec, double field_tesla,
                                    double temperature, const RateSet& rates) {
  LindbladModel m;
  m.system = spec;
  m.field = field_tesla;
  m.temperature = temperature;
  for (Matrix& op : optical_pump_ops(spec, rates.optical_pump))
    m.collapse_ops.push_back(std::move(op));
  if (rates.electron_dephasing > 0)
    m.collapse_ops.push_back(electron_dephasing_op(spec, rates.electron_dephasing));
  if (rates.electron_t1 > 0)
    for (Matrix& op : electron_depolarization_ops(spec, rates.electron_t1))
      m.collapse_ops.push_back(std::move(op));
  if (rates.nuclear_t1 > 0)
    for (Matrix& op :
         nuclear_relaxation_ops(spec, m.readout_index(), rates.nuclear_t1, field_tesla, temperature))
      m.collapse_ops.push_back(std::move(op));
  return m;
}

// ---- states and observables ----------------------------------------------

struct StateDiagnostics {
  double hermiticity_residual = 0.0;
  double trace_deviation = 0.0;
  double min_eigenvalue = 0.0;
  bool ok(double tol = 1e-8) const {
    return hermiticity_residual <= tol && trace_deviation <= tol && min_eigenvalue >= -tol;
  }
};

inline StateDiagnostics check_state(const Matrix& rho) {
  StateDiagnostics d;
  d.hermiticity_residual = hermiticity_residual(rho);
  d.trace_deviation = std::abs(rho.trace().real() - 1.0) + std::abs(rho.trace().imag());
  Eigen::SelfAdjointEigenSolver<Matrix> es(hermitize(rho));
  d.min_eigenvalue = es.eigenvalues().minCoeff();
  return d;
}

// Electron fully mixed (optical cycling is off), nuclei at Boltzmann weights.
inline Matrix thermal_state(const SpinSystemSpec& spec, double field_tesla, double temperature) {
  int de = spec.multiplicity(0);
  Matrix rho = Matrix::Identity(de, de) / de;
  for (int n = 1; n < spec.spin_count(); ++n) {
    std::vector<double> p = nuclear_thermal_populations(spec.species(n), field_tesla, temperature);
    Matrix nd = Matrix::Zero(p.size(), p.size());
    for (size_t j = 0; j < p.size(); ++j) nd(j, j) = p[j];
    rho = kron(Matrix(nd), rho);  // later spins are slower indices
  }
  return rho;
}

// Real expectation value of a Hermitian observable. The imaginary residue is
// numerical noise; callers who care can capture it.
inline double observable(const Matrix& rho, const Matrix& op, double* imag_residual = nullptr) {
  if (!is_hermitian(op)) throw InvalidArgument("observable: operator must be Hermitian");
  Complex tr = (rho * op).trace();
  if (imag_residual) *imag_residual = std::abs(tr.imag());
  return tr.real();
}

inline double purity(const Matrix& rho) { return (rho * rho).trace().real(); }

}  // namespace nvdnp
