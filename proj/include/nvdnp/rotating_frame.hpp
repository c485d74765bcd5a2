#pragma once
#include <cmath>
#include <set>
#include <vector>

#include "nvdnp/lindblad.hpp"

namespace nvdnp {

// Model after moving to a frame rotating at reference_frequency on the target
// electron transition. The generator is
//   H(t) = static_h + sum_k [cos(2 pi offsets[k] t) cos_ops[k]
//                          + sin(2 pi offsets[k] t) sin_ops[k]]
// with every matrix in Hz. Tones at the reference frequency are folded into
// static_h; the rest oscillate at their offset from the reference.
struct RotatingModel {
  Matrix static_h;
  std::vector<double> offsets;  // Hz, all nonzero
  std::vector<Matrix> cos_ops, sin_ops;
  std::vector<Matrix> collapse_ops;  // unchanged by the frame, see below
  double reference_frequency = 0.0;
  int dim = 0;
};

namespace detail {

// Each electron level m gets its own frame frequency nu_m. A collapse
// operator survives the frame untouched iff all its nonzero entries connect
// level pairs with one common nu difference; then it only picks up a global
// time-dependent phase, which cancels inside the dissipator.
inline void check_frame_compatible(const Matrix& l, const std::vector<double>& nu_per_state) {
  bool have = false;
  double diff = 0.0;
  double scale = l.cwiseAbs().maxCoeff();
  if (scale <= 0) return;
  for (Eigen::Index i = 0; i < l.rows(); ++i)
    for (Eigen::Index j = 0; j < l.cols(); ++j) {
      if (std::abs(l(i, j)) <= 1e-14 * scale) continue;
      double d = nu_per_state[static_cast<size_t>(i)] - nu_per_state[static_cast<size_t>(j)];
      if (!have) {
        diff = d;
        have = true;
      } else if (std::abs(d - diff) > 1e-6) {
        throw UnsupportedConfiguration(
            "collapse operator mixes rotating-frame sectors; it would become "
            "time dependent in this frame");
      }
    }
}

}  // namespace detail

// Bare electron level energy (zero-field splitting plus Zeeman), Hz.
inline double electron_level_energy(const SpinSystemSpec& spec, double field_tesla, int level) {
  double m = spec.electron.spin - level;
  return spec.zero_field_splitting * m * m + spec.electron.gamma * field_tesla * m;
}

// Move to the frame of reference_frequency applied to the model's target
// transition (a = lower level, b = upper level). Every electron level rotates
// at its own bare energy except b, which rotates at E(a) + f_ref; this keeps
// all static entries at the detuning/hyperfine scale instead of GHz, and a
// resonant tone of amplitude Omega becomes the static element Omega/2, so a
// two-level reduction flops at exactly Omega. The counter-rotating halves of
// the cosine drives are dropped (they sit ~2 f_ref away, 9+ orders above any
// retained scale here).
inline RotatingModel to_rotating_frame(const LindbladModel& m, double reference_frequency) {
  RotatingModel out;
  out.dim = m.system.dim();
  out.reference_frequency = reference_frequency;

  const int a = m.target_levels.first;
  const int b = m.target_levels.second;
  double ea = electron_level_energy(m.system, m.field, a);
  double eb = electron_level_energy(m.system, m.field, b);
  if (eb <= ea)
    throw InvalidArgument("to_rotating_frame: target_levels must be (lower, upper) by bare energy");

  int de = m.system.multiplicity(0);
  std::vector<double> nu(static_cast<size_t>(de));
  for (int lv = 0; lv < de; ++lv) nu[static_cast<size_t>(lv)] = electron_level_energy(m.system, m.field, lv);
  nu[static_cast<size_t>(b)] = ea + reference_frequency;

  Matrix frame_diag = Matrix::Zero(out.dim, out.dim);
  std::vector<double> nu_per_state(static_cast<size_t>(out.dim));
  for (int lv = 0; lv < de; ++lv) {
    Matrix p = electron_level_projector(m.system, lv);
    frame_diag += nu[static_cast<size_t>(lv)] * p;
    for (Eigen::Index idx = 0; idx < p.rows(); ++idx)
      if (std::abs(p(idx, idx)) > 0.5) nu_per_state[static_cast<size_t>(idx)] = nu[static_cast<size_t>(lv)];
  }

  out.static_h = m.hamiltonian() - frame_diag;

  // Partial transition operators |a><b| and |b><a|, identities on nuclei.
  Matrix lower = Matrix::Zero(de, de);
  lower(a, b) = 1.0;
  Matrix ab = embed(m.system, lower, 0);   // |a><b|
  Matrix ba = ab.adjoint();

  for (const DriveTone& tone : m.tones) {
    double delta = tone.frequency - reference_frequency;
    Complex amp = 0.5 * tone.rabi * std::exp(Complex(0.0, tone.phase));
    Matrix co = amp * ab + std::conj(amp) * ba;                      // Hermitian
    Matrix si = Complex(0, 1) * amp * ab - Complex(0, 1) * std::conj(amp) * ba;  // Hermitian
    if (std::abs(delta) < 1e-6) {
      out.static_h += co;
    } else {
      out.offsets.push_back(delta);
      out.cos_ops.push_back(co);
      out.sin_ops.push_back(si);
    }
  }

  for (const Matrix& l : m.collapse_ops) {
    detail::check_frame_compatible(l, nu_per_state);
    out.collapse_ops.push_back(l);
  }
  return out;
}

}  // namespace nvdnp
