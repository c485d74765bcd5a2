#pragma once
#include <algorithm>
#include <vector>

#include "nvdnp/spin_system.hpp"

namespace nvdnp {

// Static Hamiltonian in Hz for a field B along the NV axis:
//   H = D Sz^2 + gamma_e B Sz - sum_n gamma_n B Iz_n
//       + sum_n (a_zz_n Sz Iz_n + a_zx_n Sz Ix_n).
// The pseudosecular a_zx term tilts the nuclear quantization axis in the
// m_s = +-1 manifolds; that tilt is what makes the nominally forbidden
// electron-nuclear flip transitions weakly allowed.
inline Matrix build_hamiltonian(const SpinSystemSpec& spec, double field_tesla) {
  if (spec.couplings.size() != spec.nuclei.size())
    throw InvalidArgument("build_hamiltonian: need one coupling per nucleus");
  SpinOps e = spin_operators(spec.electron.spin);
  Matrix sz = embed(spec, e.sz, 0);
  Matrix h = spec.zero_field_splitting * embed(spec, Matrix(e.sz * e.sz), 0) +
             spec.electron.gamma * field_tesla * sz;
  for (int n = 0; n < static_cast<int>(spec.nuclei.size()); ++n) {
    SpinOps ops = spin_operators(spec.nuclei[n].spin);
    Matrix iz = embed(spec, ops.sz, n + 1);
    Matrix ix = embed(spec, ops.sx, n + 1);
    const HyperfineCoupling& c = spec.couplings[n];
    h += -spec.nuclei[n].gamma * field_tesla * iz;
    h += c.a_zz * (sz * iz).eval() + c.a_zx * (sz * ix).eval();
  }
  return h;
}

// One dipole-allowed (or hyperfine-enabled) line of the spectrum.
struct TransitionLine {
  double frequency = 0.0;  // Hz, E_upper - E_lower > 0
  double amplitude = 0.0;  // |<upper| V |lower>|
  int lower = 0, upper = 0;  // eigenstate indices, ascending energy
};

// Diagonalize h and list every pair the drive operator connects, sorted by
// frequency. Pairs with amplitude below floor_rel * max-amplitude are noise
// from the diagonalization and get dropped.
inline std::vector<TransitionLine> transition_table(const Matrix& h, const Matrix& drive_op,
                                                    double floor_rel = 1e-8) {
  if (!is_hermitian(h)) throw InvalidArgument("transition_table: Hamiltonian not Hermitian");
  if (!is_hermitian(drive_op)) throw InvalidArgument("transition_table: drive operator not Hermitian");
  Eigen::SelfAdjointEigenSolver<Matrix> es(h);
  const auto& evals = es.eigenvalues();
  const Matrix& evecs = es.eigenvectors();
  Matrix v = evecs.adjoint() * drive_op * evecs;
  double amax = 0.0;
  for (Eigen::Index i = 0; i < v.rows(); ++i)
    for (Eigen::Index j = i + 1; j < v.cols(); ++j) amax = std::max(amax, std::abs(v(i, j)));
  std::vector<TransitionLine> lines;
  for (Eigen::Index i = 0; i < v.rows(); ++i)
    for (Eigen::Index j = i + 1; j < v.cols(); ++j) {
      double amp = std::abs(v(i, j));
      if (amp <= floor_rel * amax) continue;
      TransitionLine ln;
      ln.frequency = evals(j) - evals(i);
      ln.amplitude = amp;
      ln.lower = static_cast<int>(i);
      ln.upper = static_cast<int>(j);
      lines.push_back(ln);
    }
  std::sort(lines.begin(), lines.end(),
            [](const TransitionLine& a, const TransitionLine& b) { return a.frequency < b.frequency; });
  return lines;
}

}  // namespace nvdnp
