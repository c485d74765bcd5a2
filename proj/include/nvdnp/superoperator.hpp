#pragma once
#include <cmath>
#include <numbers>
#include <vector>

#include "nvdnp/rotating_frame.hpp"

namespace nvdnp {

// Everything below works on column-major vectorized density matrices,
// vec(A X B) = kron(B^T, A) vec(X).

// Commutator part: vec(-2 pi i [h, rho]). The 2 pi converts Hz to rad/s.
inline Matrix hamiltonian_superop(const Matrix& h) {
  Eigen::Index d = h.rows();
  Matrix id = Matrix::Identity(d, d);
  return Complex(0.0, -2.0 * std::numbers::pi) * (kron(id, h) - kron(h.transpose(), id));
}

// Dissipator D[l] rho = l rho l^+ - (1/2){l^+ l, rho}; rates live inside l.
inline Matrix dissipator_superop(const Matrix& l) {
  Eigen::Index d = l.rows();
  Matrix id = Matrix::Identity(d, d);
  Matrix ldl = l.adjoint() * l;
  return kron(l.conjugate(), l) - 0.5 * kron(id, ldl) - 0.5 * kron(ldl.transpose(), id);
}

inline Matrix liouvillian(const Matrix& h, const std::vector<Matrix>& collapse_ops) {
  Matrix lam = hamiltonian_superop(h);
  for (const Matrix& l : collapse_ops) lam += dissipator_superop(l);
  return lam;
}

// Generator that may carry harmonically oscillating Hamiltonian pieces:
//   L(t) = static_part + sum_k [cos(2 pi f_k t) cos_parts[k]
//                             + sin(2 pi f_k t) sin_parts[k]].
struct TimeDependentLiouvillian {
  Matrix static_part;
  std::vector<double> offsets;  // Hz
  std::vector<Matrix> cos_parts, sin_parts;
  int dim = 0;           // Hilbert space dimension (superoperator is dim^2)
  double static_scale = 0.0;  // cached |static_part|_inf / 2 pi, Hz

  bool is_static() const { return offsets.empty(); }

  // Fastest frequency the integrator must resolve: the spectral scale of the
  // static generator (row-sum bound) plus the fastest drive offset.
  double max_frequency() const {
    double f = static_scale;
    for (size_t k = 0; k < offsets.size(); ++k) {
      double amp = cos_parts[k].cwiseAbs().rowwise().sum().maxCoeff() / (2.0 * std::numbers::pi);
      f = std::max(f, std::abs(offsets[k]) + amp);
    }
    return f;
  }

  void evaluate(double t, Matrix& out) const {
    out = static_part;
    for (size_t k = 0; k < offsets.size(); ++k) {
      double phase = 2.0 * std::numbers::pi * offsets[k] * t;
      out.noalias() += std::cos(phase) * cos_parts[k];
      out.noalias() += std::sin(phase) * sin_parts[k];
    }
  }

  Matrix at(double t) const {
    Matrix out;
    evaluate(t, out);
    return out;
  }
};

inline TimeDependentLiouvillian assemble_liouvillian(const RotatingModel& m) {
  TimeDependentLiouvillian gen;
  gen.dim = m.dim;
  gen.static_part = liouvillian(m.static_h, m.collapse_ops);
  for (size_t k = 0; k < m.offsets.size(); ++k) {
    gen.offsets.push_back(m.offsets[k]);
    gen.cos_parts.push_back(hamiltonian_superop(m.cos_ops[k]));
    gen.sin_parts.push_back(hamiltonian_superop(m.sin_ops[k]));
  }
  gen.static_scale = gen.static_part.cwiseAbs().rowwise().sum().maxCoeff() / (2.0 * std::numbers::pi);
  return gen;
}

// Lab-frame generator, tones kept at their full frequencies. Only sensible
// for toy dimensions and short times; sweeps use the rotating frame.
inline TimeDependentLiouvillian assemble_lab_liouvillian(const LindbladModel& m) {
  TimeDependentLiouvillian gen;
  gen.dim = m.system.dim();
  gen.static_part = liouvillian(m.hamiltonian(), m.collapse_ops);
  Matrix x = m.drive_op();
  for (const DriveTone& tone : m.tones) {
    // rabi cos(2 pi f t + phi) X = cos(2 pi f t) [rabi cos(phi) X]
    //                            + sin(2 pi f t) [-rabi sin(phi) X]
    gen.offsets.push_back(tone.frequency);
    gen.cos_parts.push_back(hamiltonian_superop(Matrix(tone.rabi * std::cos(tone.phase) * x)));
    gen.sin_parts.push_back(hamiltonian_superop(Matrix(-tone.rabi * std::sin(tone.phase) * x)));
  }
  gen.static_scale = gen.static_part.cwiseAbs().rowwise().sum().maxCoeff() / (2.0 * std::numbers::pi);
  return gen;
}

}  // namespace nvdnp
