#include <gtest/gtest.h>

#include <unsupported/Eigen/MatrixFunctions>

#include "nvdnp/steady_state.hpp"

using namespace nvdnp;

namespace {

// Driven, damped two-level system. The steady excited population has the
// textbook closed form rho_ee = (W^2/4) / (W^2/2 + G^2/4) at zero detuning,
// with W the angular Rabi rate and G the decay rate.
TEST(SteadyState, DrivenTwoLevelMatchesClosedForm) {
  double rabi_hz = 0.7e6, decay = 1.1e6;
  Matrix h = Matrix::Zero(2, 2);
  h(0, 1) = 0.5 * rabi_hz;
  h(1, 0) = 0.5 * rabi_hz;
  Matrix drop = Matrix::Zero(2, 2);
  drop(1, 0) = std::sqrt(decay);  // |g><e|, excited state is index 0
  Matrix lam = liouvillian(h, {drop});
  Matrix rho = steady_state(lam);
  double w = 2.0 * std::numbers::pi * rabi_hz;
  double want = (w * w / 4.0) / (w * w / 2.0 + decay * decay / 4.0);
  EXPECT_NEAR(rho(0, 0).real(), want, 1e-10);
  EXPECT_TRUE(check_state(rho).ok(1e-9));
}

LindbladModel six_dim_model() {
  SpinSystemSpec spec;
  spec.electron = {"e", 1.0, gamma_electron};
  spec.nuclei = {{"13C", 0.5, gamma_c13}};
  spec.couplings = {{0.02e6, 0.10e6}};
  LindbladModel m;
  m.system = spec;
  m.field = 17.6e-3;
  m.temperature = 297.0;
  double f = electron_level_energy(spec, m.field, kLevelMinus) -
             electron_level_energy(spec, m.field, kLevelZero);
  double w0 = gamma_c13 * m.field;
  double w1 = std::hypot(gamma_c13 * m.field + 0.02e6, 0.10e6);
  m.tones = {{f - 0.5 * (w0 + w1), 0.05e6, 0.0}};  // on the lower satellite
  for (Matrix& op : optical_pump_ops(spec, 0.1e6)) m.collapse_ops.push_back(std::move(op));
  m.collapse_ops.push_back(electron_dephasing_op(spec, 0.1e6));
  for (Matrix& op : electron_depolarization_ops(spec, 1e3)) m.collapse_ops.push_back(std::move(op));
  for (Matrix& op : nuclear_relaxation_ops(spec, 1, 200.0, m.field, m.temperature))
    m.collapse_ops.push_back(std::move(op));
  return m;
}

}  // namespace

// The kernel solve against brute force: exp(L T) applied to two different
// initial states for T = many relaxation times must land on the same state
// the kernel solver returns directly.
TEST(SteadyState, AgreesWithMatrixExponentialLimit) {
  LindbladModel m = six_dim_model();
  TimeDependentLiouvillian gen = assemble_liouvillian(to_rotating_frame(m, m.tones[0].frequency));
  ASSERT_TRUE(gen.is_static());
  Matrix rho_ss = steady_state(gen);

  double t_long = 0.12;  // 24 nuclear T1 times
  Matrix prop = (gen.static_part * t_long).exp();
  Matrix rho1 = thermal_state(m.system, m.field, m.temperature);
  Matrix rho2 = Matrix::Zero(6, 6);
  rho2(0, 0) = 1.0;
  Matrix lim1 = unvec(Vector(prop * vec(rho1)), 6);
  Matrix lim2 = unvec(Vector(prop * vec(rho2)), 6);
  EXPECT_LT((lim1 - rho_ss).cwiseAbs().maxCoeff(), 1e-6);
  EXPECT_LT((lim2 - rho_ss).cwiseAbs().maxCoeff(), 1e-6);

  // The satellite drive polarizes the carbon far beyond thermal equilibrium.
  double pol = observable(rho_ss, m.readout_op());
  EXPECT_GT(std::abs(pol), 1e-3);
}

TEST(SteadyState, FromInitialStateMatchesUniqueKernel) {
  LindbladModel m = six_dim_model();
  TimeDependentLiouvillian gen = assemble_liouvillian(to_rotating_frame(m, m.tones[0].frequency));
  Matrix unique = steady_state(gen);
  Matrix a = steady_state_from(gen, thermal_state(m.system, m.field, m.temperature));
  Matrix b_init = Matrix::Zero(6, 6);
  b_init(5, 5) = 1.0;
  Matrix b = steady_state_from(gen, b_init);
  EXPECT_LT((a - unique).cwiseAbs().maxCoeff(), 1e-9);
  EXPECT_LT((b - unique).cwiseAbs().maxCoeff(), 1e-9);
}

// Optical pumping alone only touches the electron. The six nuclear level
// populations are conserved (nuclear coherences still precess in the Zeeman
// field, so they are rotated, not stationary), giving a six-dimensional
// stationary subspace: |0><0| on the electron times any nuclear-eigenbasis
// diagonal.
TEST(SteadyState, PumpOnlyDegeneracyIsReportedWithDimension) {
  SpinSystemSpec spec = default_nv_system();
  LindbladModel m;
  m.system = spec;
  m.field = 17.6e-3;
  for (Matrix& op : optical_pump_ops(spec, 0.1e6)) m.collapse_ops.push_back(std::move(op));
  Matrix lam = liouvillian(m.hamiltonian(), m.collapse_ops);
  try {
    steady_state(lam);
    FAIL() << "expected DegenerateSteadyState";
  } catch (const DegenerateSteadyState& e) {
    EXPECT_EQ(e.null_dimension, 6);
  }
}

// Secular-only couplings here: with a_zx = 0 nothing tilts the nuclear axes,
// so pumping the electron genuinely leaves the nuclei alone. (With a_zx on,
// population parked in m_s = +-1 precesses about the tilted hyperfine axis
// and sheds polarization before the pump moves it; that physics is covered
// by the spectrum tests.)
TEST(SteadyState, PumpOnlyFromInitialStateKeepsNuclearPopulations) {
  SpinSystemSpec spec = default_nv_system(0.02e6, 0.0);
  LindbladModel m;
  m.system = spec;
  m.field = 17.6e-3;
  for (Matrix& op : optical_pump_ops(spec, 0.1e6)) m.collapse_ops.push_back(std::move(op));
  Matrix lam = liouvillian(m.hamiltonian(), m.collapse_ops);
  // Strongly biased (diagonal) nuclear start so the conservation check has
  // numerical teeth; mixed electron.
  Matrix nuc = Matrix::Zero(6, 6);
  double pops[6] = {0.30, 0.20, 0.15, 0.05, 0.12, 0.18};  // (m_N, m_C) pairs
  for (int i = 0; i < 6; ++i) nuc(i, i) = pops[i];
  Matrix rho0 = kron(nuc, Matrix(Matrix::Identity(3, 3) / 3.0));
  Matrix ss = steady_state_from(lam, rho0);
  // Electron ends in m_s = 0 ...
  EXPECT_NEAR(observable(ss, electron_level_projector(spec, kLevelZero)), 1.0, 1e-8);
  // ... and nuclear populations are untouched.
  EXPECT_NEAR(observable(ss, nuclear_polarization_op(spec, 2)),
              observable(rho0, nuclear_polarization_op(spec, 2)), 1e-8);
  SpinOps n14 = spin_operators(1.0);
  EXPECT_NEAR(observable(ss, embed(spec, n14.sz, 1)), observable(rho0, embed(spec, n14.sz, 1)),
              1e-8);
}

// The full device model conserves the three 14N sector populations (the
// nitrogen has no bath by design), so the plain solver reports a
// three-dimensional stationary subspace.
TEST(SteadyState, SpectatorNitrogenGivesThreefoldDegeneracy) {
  SpinSystemSpec spec = default_nv_system();
  RateSet rates;
  LindbladModel m = standard_model(spec, 17.6e-3, 297.0, rates);
  double f = electron_level_energy(spec, m.field, kLevelMinus) -
             electron_level_energy(spec, m.field, kLevelZero);
  m.tones = {{f - 0.21e6, 0.05e6, 0.0}};
  TimeDependentLiouvillian gen = assemble_liouvillian(to_rotating_frame(m, m.tones[0].frequency));
  try {
    steady_state(gen);
    FAIL() << "expected DegenerateSteadyState";
  } catch (const DegenerateSteadyState& e) {
    EXPECT_EQ(e.null_dimension, 3);
  }
  // Resolved by the initial state, which fixes each sector at weight ~1/3.
  Matrix ss = steady_state_from(gen, thermal_state(spec, m.field, 297.0));
  EXPECT_TRUE(check_state(ss).ok(1e-8));
  SpinOps n14 = spin_operators(1.0);
  EXPECT_NEAR(observable(ss, embed(spec, Matrix(n14.sz * n14.sz), 1)), 2.0 / 3.0, 1e-6);
}

TEST(SteadyState, TimeDependentGeneratorIsRefused) {
  LindbladModel m = six_dim_model();
  m.tones.push_back({m.tones[0].frequency + 1e6, 0.03e6, 0.0});
  TimeDependentLiouvillian gen = assemble_liouvillian(to_rotating_frame(m, m.tones[0].frequency));
  EXPECT_THROW(steady_state(gen), UnsupportedConfiguration);
  EXPECT_THROW(steady_state_from(gen, thermal_state(m.system, m.field, 297.0)),
               UnsupportedConfiguration);
}

// ---- periodic steady state ------------------------------------------------

namespace {

// Toy S=1 electron with one resonant and one detuned tone: beats at 0.5 MHz.
LindbladModel beating_toy() {
  SpinSystemSpec spec;
  spec.electron = {"e", 1.0, gamma_electron};
  LindbladModel m;
  m.system = spec;
  m.field = 17.6e-3;
  double f = electron_level_energy(spec, m.field, kLevelMinus) -
             electron_level_energy(spec, m.field, kLevelZero);
  m.tones = {{f, 0.3e6, 0.0}, {f + 0.5e6, 0.25e6, 0.4}};
  for (Matrix& op : optical_pump_ops(spec, 0.3e6)) m.collapse_ops.push_back(std::move(op));
  m.collapse_ops.push_back(electron_dephasing_op(spec, 0.2e6));
  return m;
}

}  // namespace

TEST(PeriodicSteadyState, MatchesStroboscopicBruteForce) {
  LindbladModel m = beating_toy();
  TimeDependentLiouvillian gen = assemble_liouvillian(to_rotating_frame(m, m.tones[0].frequency));
  ASSERT_FALSE(gen.is_static());

  Matrix rho0 = Matrix::Zero(3, 3);
  rho0(kLevelZero, kLevelZero) = 1.0;
  PeriodicSteadyState pss = periodic_steady_state(gen, rho0);
  EXPECT_NEAR(pss.period, 2e-6, 1e-12);
  EXPECT_TRUE(check_state(pss.state).ok(1e-7));

  // Brute force: march period by period until the stroboscopic map stops
  // moving, then compare states at the period boundary.
  EvolveOptions opt;
  opt.step = 1.0 / (400.0 * gen.max_frequency());
  Matrix rho = rho0;
  double moved = 1.0;
  for (int k = 0; k < 60 && moved > 1e-11; ++k) {
    Matrix next = evolve(gen, rho, pss.period, opt).final_state;
    moved = (next - rho).cwiseAbs().maxCoeff();
    rho = next;
  }
  ASSERT_LE(moved, 1e-11);
  EXPECT_LT((rho - pss.state).cwiseAbs().maxCoeff(), 1e-6);
}

TEST(PeriodicSteadyState, CycleAverageMatchesBruteForceAverage) {
  LindbladModel m = beating_toy();
  TimeDependentLiouvillian gen = assemble_liouvillian(to_rotating_frame(m, m.tones[0].frequency));
  Matrix rho0 = Matrix::Zero(3, 3);
  rho0(kLevelZero, kLevelZero) = 1.0;
  PeriodicSteadyState pss = periodic_steady_state(gen, rho0);
  Matrix p0 = Matrix::Zero(3, 3);
  p0(kLevelZero, kLevelZero) = 1.0;
  double avg = periodic_average(gen, pss, embed(m.system, p0, 0));

  EvolveOptions opt;
  opt.step = 1.0 / (400.0 * gen.max_frequency());
  opt.max_snapshots = 4000;
  TimeSeries ts = evolve(gen, pss.state, pss.period, opt);
  double brute = 0.0;
  for (size_t i = 0; i + 1 < ts.states.size(); ++i) {
    double w = ts.times[i + 1] - ts.times[i];
    brute += 0.5 * w *
             (observable(ts.states[i], embed(m.system, p0, 0)) +
              observable(ts.states[i + 1], embed(m.system, p0, 0)));
  }
  brute /= pss.period;
  EXPECT_NEAR(avg, brute, 1e-5);
}

TEST(PeriodicSteadyState, IncommensurateOffsetsAreRefused) {
  LindbladModel m = beating_toy();
  m.tones[1].frequency = m.tones[0].frequency + 0.5e6 * std::numbers::sqrt2;
  m.tones.push_back({m.tones[0].frequency + 0.5e6, 0.1e6, 0.0});
  TimeDependentLiouvillian gen = assemble_liouvillian(to_rotating_frame(m, m.tones[0].frequency));
  EXPECT_THROW(periodic_steady_state(gen, Matrix(Matrix::Identity(3, 3) / 3.0)),
               UnsupportedConfiguration);
}

TEST(PeriodicSteadyState, StaticGeneratorIsRefused) {
  LindbladModel m = six_dim_model();
  TimeDependentLiouvillian gen = assemble_liouvillian(to_rotating_frame(m, m.tones[0].frequency));
  EXPECT_THROW(periodic_steady_state(gen, thermal_state(m.system, m.field, 297.0)),
               UnsupportedConfiguration);
}
