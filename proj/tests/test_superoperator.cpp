#include <gtest/gtest.h>

#include <random>

#include "nvdnp/superoperator.hpp"

using namespace nvdnp;

namespace {

Matrix random_matrix(int d, std::mt19937& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  Matrix m(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) m(i, j) = Complex(g(rng), g(rng));
  return m;
}

Matrix random_hermitian(int d, std::mt19937& rng) {
  Matrix m = random_matrix(d, rng);
  return hermitize(m);
}

// Direct right-hand side of the master equation, no vectorization involved.
// This is the oracle the superoperator is checked against.
Matrix direct_rhs(const Matrix& h, const std::vector<Matrix>& ls, const Matrix& rho) {
  Matrix out = Complex(0, -2.0 * std::numbers::pi) * (h * rho - rho * h);
  for (const Matrix& l : ls) {
    Matrix ldl = l.adjoint() * l;
    out += l * rho * l.adjoint() - 0.5 * (ldl * rho + rho * ldl);
  }
  return out;
}

}  // namespace

TEST(Vectorization, RoundTripAndProductIdentity) {
  std::mt19937 rng(11);
  Matrix a = random_matrix(4, rng), b = random_matrix(4, rng), x = random_matrix(4, rng);
  EXPECT_LT((unvec(vec(x), 4) - x).cwiseAbs().maxCoeff(), 1e-15);
  // vec(A X B) == kron(B^T, A) vec(X) for column-major stacking.
  Vector lhs = vec(Matrix(a * x * b));
  Vector rhs = kron(b.transpose(), a) * vec(x);
  EXPECT_LT((lhs - rhs).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Superoperator, MatchesDirectMasterEquation) {
  std::mt19937 rng(7);
  for (int trial = 0; trial < 3; ++trial) {
    int d = 3 + trial;
    Matrix h = random_hermitian(d, rng);
    std::vector<Matrix> ls = {random_matrix(d, rng), random_matrix(d, rng)};
    Matrix rho = random_hermitian(d, rng);
    Matrix lam = liouvillian(h, ls);
    Matrix got = unvec(lam * vec(rho), d);
    Matrix want = direct_rhs(h, ls, rho);
    double scale = want.cwiseAbs().maxCoeff();
    EXPECT_LT((got - want).cwiseAbs().maxCoeff(), 1e-12 * scale) << "d = " << d;
  }
}

TEST(Superoperator, AnnihilatesTraceAndPreservesHermiticity) {
  std::mt19937 rng(23);
  int d = 5;
  Matrix h = random_hermitian(d, rng);
  std::vector<Matrix> ls = {random_matrix(d, rng)};
  Matrix lam = liouvillian(h, ls);
  // tr(d rho / dt) = 0 for every rho: the trace functional is a left null vector.
  Vector tr_row = vec(Matrix(Matrix::Identity(d, d)));
  EXPECT_LT((tr_row.adjoint() * lam).cwiseAbs().maxCoeff(), 1e-10 * lam.cwiseAbs().maxCoeff());
  // The image of a Hermitian matrix stays Hermitian.
  Matrix rho = random_hermitian(d, rng);
  Matrix out = unvec(lam * vec(rho), d);
  EXPECT_LT(hermiticity_residual(out), 1e-10 * out.cwiseAbs().maxCoeff());
}

TEST(RotatingFrame, ResonantToneBecomesStaticHalfRabi) {
  SpinSystemSpec spec = default_nv_system();
  RateSet rates;
  LindbladModel m = standard_model(spec, 17.6e-3, 297.0, rates);
  double f = electron_level_energy(spec, m.field, kLevelMinus) -
             electron_level_energy(spec, m.field, kLevelZero);
  m.tones = {{f, 0.05e6, 0.0}};
  RotatingModel rot = to_rotating_frame(m, f);
  EXPECT_TRUE(rot.offsets.empty());
  // The static Hamiltonian carries Omega/2 between the target levels.
  int idx_a = kLevelZero, idx_b = kLevelMinus;  // nuclear indices 0
  EXPECT_NEAR(rot.static_h(idx_a, idx_b).real(), 0.025e6, 1e-6);
  // Everything in the frame lives at the MHz scale, not GHz.
  EXPECT_LT(rot.static_h.cwiseAbs().maxCoeff(), 10e6);
  EXPECT_EQ(rot.collapse_ops.size(), m.collapse_ops.size());
}

TEST(RotatingFrame, DetunedToneOscillatesAtOffset) {
  SpinSystemSpec spec = default_nv_system();
  RateSet rates;
  LindbladModel m = standard_model(spec, 17.6e-3, 297.0, rates);
  double f = electron_level_energy(spec, m.field, kLevelMinus) -
             electron_level_energy(spec, m.field, kLevelZero);
  m.tones = {{f, 0.05e6, 0.0}, {f + 2.16e6, 0.05e6, 0.0}};
  RotatingModel rot = to_rotating_frame(m, f);
  ASSERT_EQ(rot.offsets.size(), 1u);
  EXPECT_NEAR(rot.offsets[0], 2.16e6, 1e-6);
  EXPECT_LT(hermiticity_residual(rot.cos_ops[0]), 1e-12);
  EXPECT_LT(hermiticity_residual(rot.sin_ops[0]), 1e-12);
  // Quadrature structure: cos op carries Omega/2 on the real part, sin op on
  // the imaginary part, for phase 0.
  EXPECT_NEAR(rot.cos_ops[0](kLevelZero, kLevelMinus).real(), 0.025e6, 1e-6);
  EXPECT_NEAR(rot.sin_ops[0](kLevelZero, kLevelMinus).imag(), 0.025e6, 1e-6);
}

TEST(RotatingFrame, TargetLevelsMustBeOrderedByEnergy) {
  SpinSystemSpec spec = default_nv_system();
  RateSet rates;
  LindbladModel m = standard_model(spec, 17.6e-3, 297.0, rates);
  m.target_levels = {kLevelMinus, kLevelZero};  // upside down
  EXPECT_THROW(to_rotating_frame(m, 2.37e9), InvalidArgument);
}

TEST(RotatingFrame, SectorMixingCollapseOpIsRejected) {
  SpinSystemSpec spec = default_nv_system();
  RateSet rates;
  LindbladModel m = standard_model(spec, 17.6e-3, 297.0, rates);
  // An op with entries both inside a level (0 -> 0) and across levels
  // (0 -> -1) would go time dependent in the rotating frame.
  Matrix bad = Matrix::Zero(3, 3);
  bad(kLevelZero, kLevelZero) = 1.0;
  bad(kLevelZero, kLevelMinus) = 1.0;
  m.collapse_ops.push_back(embed(spec, bad, 0));
  EXPECT_THROW(to_rotating_frame(m, 2.37e9), UnsupportedConfiguration);
}

TEST(RotatingFrame, GeneratorAssemblyShapes) {
  SpinSystemSpec spec = default_nv_system();
  RateSet rates;
  LindbladModel m = standard_model(spec, 17.6e-3, 297.0, rates);
  double f = 2.37e9;
  m.tones = {{f, 0.05e6, 0.0}, {f + 1.0e6, 0.03e6, 1.0}};
  TimeDependentLiouvillian gen = assemble_liouvillian(to_rotating_frame(m, f));
  EXPECT_EQ(gen.dim, 18);
  EXPECT_EQ(gen.static_part.rows(), 324);
  EXPECT_FALSE(gen.is_static());
  // At t = 0 the oscillating part contributes its cos term only.
  Matrix l0 = gen.at(0.0);
  EXPECT_LT((l0 - (gen.static_part + gen.cos_parts[0])).cwiseAbs().maxCoeff(), 1e-6);
  // Max frequency at least covers the offset and the static scale.
  EXPECT_GE(gen.max_frequency(), 1.0e6);
}
