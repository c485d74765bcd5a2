#pragma once
#include <cmath>
#include <string>
#include <vector>

#include "nvdnp/constants.hpp"
#include "nvdnp/linalg.hpp"

namespace nvdnp {

struct SpinSpecies {
  std::string label;
  double spin = 0.5;   // total spin quantum number, multiple of 1/2
  double gamma = 0.0;  // gyromagnetic ratio magnitude, Hz/T
};

// Electron level indices for S=1 in descending-m order.
inline constexpr int kLevelPlus = 0;
inline constexpr int kLevelZero = 1;
inline constexpr int kLevelMinus = 2;

// Hyperfine tensor in the secular approximation for the electron: only the
// a_zz Sz Iz and a_zx Sz Ix pieces survive the large zero-field splitting.
struct HyperfineCoupling {
  double a_zz = 0.0;  // Hz
  double a_zx = 0.0;  // Hz
};

// One electron plus any number of nuclei. Spin index 0 is the electron,
// index k >= 1 is nuclei[k-1]; couplings[k-1] ties nucleus k-1 to the electron.
struct SpinSystemSpec {
  SpinSpecies electron{"e", 1.0, gamma_electron};
  std::vector<SpinSpecies> nuclei;
  std::vector<HyperfineCoupling> couplings;
  double zero_field_splitting = nv_zfs_room;  // D, Hz

  int spin_count() const { return 1 + static_cast<int>(nuclei.size()); }

  const SpinSpecies& species(int k) const {
    return k == 0 ? electron : nuclei.at(static_cast<size_t>(k - 1));
  }

  int multiplicity(int k) const {
    return static_cast<int>(std::lround(2.0 * species(k).spin + 1.0));
  }

  int dim() const {
    int d = 1;
    for (int k = 0; k < spin_count(); ++k) d *= multiplicity(k);
    return d;
  }
};

// Angular momentum matrices in the basis |s, m> ordered by descending m
// (index 0 is m = +s). Raising/lowering follow the usual ladder convention.
struct SpinOps {
  Matrix sx, sy, sz, sp, sm, id;
};

inline SpinOps spin_operators(double s) {
  if (s < 0 || std::abs(2.0 * s - std::lround(2.0 * s)) > 1e-12)
    throw InvalidArgument("spin_operators: spin must be a non-negative multiple of 1/2");
  int d = static_cast<int>(std::lround(2.0 * s + 1.0));
  SpinOps ops;
  ops.sz = Matrix::Zero(d, d);
  ops.sp = Matrix::Zero(d, d);
  for (int j = 0; j < d; ++j) {
    double m = s - j;
    ops.sz(j, j) = m;
    if (j > 0)  // |m> -> |m+1> lands one row up in descending-m order
      ops.sp(j - 1, j) = std::sqrt(s * (s + 1.0) - m * (m + 1.0));
  }
  ops.sm = ops.sp.adjoint();
  ops.sx = 0.5 * (ops.sp + ops.sm);
  ops.sy = Complex(0, -0.5) * (ops.sp - ops.sm);
  ops.id = Matrix::Identity(d, d);
  return ops;
}

// Lift a single-spin operator into the full tensor space. Spin 0 is the
// fastest-varying index, so identities for lower indices go on the right
// kron factor and higher indices on the left.
inline Matrix embed(const SpinSystemSpec& spec, const Matrix& op, int spin_index) {
  if (spin_index < 0 || spin_index >= spec.spin_count())
    throw InvalidArgument("embed: spin index out of range");
  if (op.rows() != spec.multiplicity(spin_index) || op.rows() != op.cols())
    throw InvalidArgument("embed: operator dimension does not match spin multiplicity");
  int lo = 1, hi = 1;
  for (int k = 0; k < spin_index; ++k) lo *= spec.multiplicity(k);
  for (int k = spin_index + 1; k < spec.spin_count(); ++k) hi *= spec.multiplicity(k);
  return kron(Matrix::Identity(hi, hi), kron(op, Matrix::Identity(lo, lo)));
}

// Projector onto one electron level (level 0 is m_s = +s), identity on nuclei.
inline Matrix electron_level_projector(const SpinSystemSpec& spec, int level) {
  int d = spec.multiplicity(0);
  if (level < 0 || level >= d)
    throw InvalidArgument("electron_level_projector: level out of range");
  Matrix p = Matrix::Zero(d, d);
  p(level, level) = 1.0;
  return embed(spec, p, 0);
}

// |a><b| + |b><a| on the electron, identity on nuclei: the operator a
// linearly polarized microwave field couples to within one transition.
inline Matrix electron_transition_op(const SpinSystemSpec& spec, int level_a, int level_b) {
  int d = spec.multiplicity(0);
  if (level_a < 0 || level_a >= d || level_b < 0 || level_b >= d || level_a == level_b)
    throw InvalidArgument("electron_transition_op: bad level pair");
  Matrix x = Matrix::Zero(d, d);
  x(level_a, level_b) = 1.0;
  x(level_b, level_a) = 1.0;
  return embed(spec, x, 0);
}

// 2*Iz of one nuclear spin, embedded: for spin-1/2 this is the conventional
// polarization observable with range [-1, 1].
inline Matrix nuclear_polarization_op(const SpinSystemSpec& spec, int spin_index) {
  if (spin_index < 1 || spin_index >= spec.spin_count())
    throw InvalidArgument("nuclear_polarization_op: index must name a nucleus");
  SpinOps ops = spin_operators(spec.species(spin_index).spin);
  return embed(spec, 2.0 * ops.sz, spin_index);
}

// The default device: NV- electron (S=1), its own 14N (I=1, secular-only
// coupling), and one nearby 13C whose pseudosecular coupling drives the
// polarization transfer. Couplings are overridable; these defaults describe
// a weakly coupled 13C a few bond lengths out.
inline SpinSystemSpec default_nv_system(double a_zz_c13 = 0.02e6, double a_zx_c13 = 0.10e6,
                                        double a_zz_n14 = n14_hyperfine_zz) {
  SpinSystemSpec spec;
  spec.electron = {"e", 1.0, gamma_electron};
  spec.nuclei = {{"14N", 1.0, gamma_n14}, {"13C", 0.5, gamma_c13}};
  spec.couplings = {{a_zz_n14, 0.0}, {a_zz_c13, a_zx_c13}};
  return spec;
}

}  // namespace nvdnp
