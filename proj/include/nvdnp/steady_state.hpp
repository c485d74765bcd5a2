#pragma once
#include <cmath>
#include <numeric>
#include <vector>

#include "nvdnp/evolve.hpp"

namespace nvdnp {

struct SteadyOptions {
  // Residual |L v| is judged relative to |L|: the generator sets the natural
  // rate scale, so this is dimensionless.
  double residual_tol = 1e-8;
  // Pivots below this fraction of the largest pivot count as zero when
  // separating the stationary subspace from slow-but-finite decay.
  double rank_threshold = 1e-10;
};

namespace detail {

struct KernelPair {
  Matrix right;  // columns span ker(A)
  Matrix left;   // columns span ker(A^+), the conserved functionals
};

inline KernelPair kernels(const Matrix& a, double rank_threshold) {
  Eigen::FullPivLU<Matrix> lu(a);
  lu.setThreshold(rank_threshold);
  KernelPair kp;
  Eigen::Index nullity = a.cols() - lu.rank();
  if (nullity == 0) throw DegenerateSteadyState(0);
  kp.right = lu.kernel();
  Eigen::FullPivLU<Matrix> lua(a.adjoint());
  lua.setThreshold(rank_threshold);
  if (a.cols() - lua.rank() != nullity)
    throw NumericError("stationary subspace is ill-conditioned: left/right kernel ranks differ");
  kp.left = lua.kernel();
  return kp;
}

inline Matrix finalize_state(const Vector& v, const Matrix& a, double residual_tol,
                             const char* who) {
  Eigen::Index d = static_cast<Eigen::Index>(std::lround(std::sqrt(static_cast<double>(v.size()))));
  Matrix rho = unvec(v, d);
  Complex tr = rho.trace();
  if (std::abs(tr) < 1e-12 * v.norm())
    throw NumericError(std::string(who) + ": stationary vector is traceless, not a state");
  rho /= tr;
  rho = hermitize(rho);
  double scale = a.cwiseAbs().maxCoeff();
  double resid = (a * vec(rho)).cwiseAbs().maxCoeff() / (scale > 0 ? scale : 1.0);
  if (resid > residual_tol)
    throw NumericError(std::string(who) + ": relative residual " + std::to_string(resid) +
                       " exceeds tolerance");
  return rho;
}

// Unique-kernel solve: exactly one stationary state or an error that reports
// how big the stationary subspace actually is.
inline Matrix kernel_state(const Matrix& a, double rank_threshold, double residual_tol,
                           const char* who) {
  KernelPair kp = kernels(a, rank_threshold);
  if (kp.right.cols() != 1) throw DegenerateSteadyState(static_cast<int>(kp.right.cols()));
  return finalize_state(kp.right.col(0), a, residual_tol, who);
}

// t -> infinity limit starting from rho0 when the kernel has dimension k > 1:
// project vec(rho0) onto ker(A) along the decaying directions, using the k
// conserved functionals ker(A^+). Valid when every nonzero eigenvalue decays
// (no undamped oscillating sectors); a singular overlap matrix flags that.
inline Matrix project_to_kernel(const Matrix& a, const Matrix& rho0, double rank_threshold,
                                double residual_tol, const char* who) {
  KernelPair kp = kernels(a, rank_threshold);
  Matrix overlap = kp.left.adjoint() * kp.right;
  Vector rhs = kp.left.adjoint() * vec(rho0);
  Eigen::FullPivLU<Matrix> g(overlap);
  if (g.rank() != overlap.cols())
    throw NumericError(std::string(who) +
                       ": conserved-charge overlap is singular (undamped sector?)");
  Vector coeff = g.solve(rhs);
  Vector v = kp.right * coeff;
  return finalize_state(v, a, residual_tol, who);
}

}  // namespace detail

// Stationary state of a static generator: the one-dimensional kernel of the
// Liouvillian, trace-normalized. If the relaxation structure conserves more
// than the trace (the kernel has dimension > 1) this raises
// DegenerateSteadyState carrying that dimension; use steady_state_from, which
// resolves the tie with an initial state.
inline Matrix steady_state(const Matrix& liouvillian_matrix, SteadyOptions opt = {}) {
  if (liouvillian_matrix.rows() != liouvillian_matrix.cols())
    throw InvalidArgument("steady_state: generator must be square");
  return detail::kernel_state(liouvillian_matrix, opt.rank_threshold, opt.residual_tol,
                              "steady_state");
}

inline Matrix steady_state(const TimeDependentLiouvillian& gen, SteadyOptions opt = {}) {
  if (!gen.is_static())
    throw UnsupportedConfiguration(
        "steady_state: generator is time dependent; use periodic_steady_state "
        "(or drop the oscillating terms explicitly if they are far detuned)");
  return detail::kernel_state(gen.static_part, opt.rank_threshold, opt.residual_tol,
                              "steady_state");
}

// Long-time limit of evolve(gen, rho0) without the stepping: rho0 fixes the
// values of whatever the dissipators conserve (here: the spectator 14N
// populations), and everything else relaxes. Agrees with steady_state when
// the kernel is one-dimensional, for any rho0.
inline Matrix steady_state_from(const Matrix& liouvillian_matrix, const Matrix& rho0,
                                SteadyOptions opt = {}) {
  return detail::project_to_kernel(liouvillian_matrix, rho0, opt.rank_threshold, opt.residual_tol,
                                   "steady_state_from");
}

inline Matrix steady_state_from(const TimeDependentLiouvillian& gen, const Matrix& rho0,
                                SteadyOptions opt = {}) {
  if (!gen.is_static())
    throw UnsupportedConfiguration("steady_state_from: generator is time dependent");
  return detail::project_to_kernel(gen.static_part, rho0, opt.rank_threshold, opt.residual_tol,
                                   "steady_state_from");
}

// ---- periodic (multi-tone) steady state -----------------------------------

struct PeriodicOptions {
  int steps_per_fast_cycle = 96;  // base RK4 resolution of the fastest scale
  bool richardson = true;         // combine h and h/2 runs, error ~ h^6
  double rank_threshold = 1e-10;
  double residual_tol = 1e-6;  // on |(M - I) v| relative to |M - I|
};

struct PeriodicSteadyState {
  Matrix state;  // at the period boundary (drive phase zero)
  double period = 0.0;
  int steps_per_period = 0;
  double propagator_error = 0.0;  // |M_h - M_{h/2}|_inf when richardson is on
};

namespace detail {

// Greatest common divisor of the offset frequencies, the fundamental beat.
// Real-valued Euclid always terminates on a near-divisor, so the meaningful
// commensurability test is the size of the result: a beat below 1e-4 of the
// slowest offset means the drive repeats only after >= 10^4 beat cycles,
// which we treat as "never" (true irrational spacings land in numerical
// noise far below this).
inline double common_base_frequency(const std::vector<double>& offsets) {
  auto gcd2 = [](double a, double b) {
    a = std::abs(a);
    b = std::abs(b);
    while (b > 1e-9 * std::max(a, 1.0)) {
      double r = std::fmod(a, b);
      if (r > b * (1.0 - 1e-9)) r = 0.0;  // fmod landed on b within noise
      a = b;
      b = r;
    }
    return a;
  };
  double g = 0.0, fmin = 0.0;
  for (double f : offsets) {
    g = (g == 0.0) ? std::abs(f) : gcd2(g, f);
    fmin = (fmin == 0.0) ? std::abs(f) : std::min(fmin, std::abs(f));
  }
  if (g <= 0) throw UnsupportedConfiguration("tone offsets vanish; generator is static");
  if (g < 1e-4 * fmin)
    throw UnsupportedConfiguration(
        "tone offsets are not commensurate (common beat below 1e-4 of the "
        "slowest offset); no usable drive period exists");
  for (double f : offsets) {
    double r = std::round(std::abs(f) / g);
    if (std::abs(std::abs(f) - r * g) > 1e-6 * std::abs(f))
      throw UnsupportedConfiguration("tone offsets are not commensurate; no drive period exists");
  }
  return g;
}

// One-period propagator of vec(rho), fixed-step RK4 on the matrix ODE.
inline Matrix monodromy(const TimeDependentLiouvillian& gen, double period, int n_steps) {
  Eigen::Index d2 = gen.static_part.rows();
  Matrix u = Matrix::Identity(d2, d2);
  Matrix k1(d2, d2), k2(d2, d2), k3(d2, d2), k4(d2, d2), tmp(d2, d2), lbuf;
  double h = period / n_steps;
  for (int i = 0; i < n_steps; ++i) {
    double t = i * h;
    gen.evaluate(t, lbuf);
    k1.noalias() = lbuf * u;
    tmp = u + (0.5 * h) * k1;
    gen.evaluate(t + 0.5 * h, lbuf);
    k2.noalias() = lbuf * tmp;
    tmp = u + (0.5 * h) * k2;
    k3.noalias() = lbuf * tmp;
    tmp = u + h * k3;
    gen.evaluate(t + h, lbuf);
    k4.noalias() = lbuf * tmp;
    u += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
  return u;
}

}  // namespace detail

// Fixed point of the one-period propagator: the state a periodically beating
// multi-tone drive settles into, sampled at the period boundary. Computed as
// the kernel of (M - I) instead of stepping through thousands of slow
// relaxation times. Conserved sectors are resolved by rho0 exactly as in
// steady_state_from.
inline PeriodicSteadyState periodic_steady_state(const TimeDependentLiouvillian& gen,
                                                 const Matrix& rho0, PeriodicOptions opt = {}) {
  if (gen.is_static())
    throw UnsupportedConfiguration("periodic_steady_state: generator is static; use steady_state");
  PeriodicSteadyState out;
  double base = detail::common_base_frequency(gen.offsets);
  out.period = 1.0 / base;
  double fmax = gen.max_frequency();
  int n = static_cast<int>(std::ceil(out.period * fmax * opt.steps_per_fast_cycle));
  n = std::max(n, 16);
  Matrix m = detail::monodromy(gen, out.period, n);
  if (opt.richardson) {
    Matrix m2 = detail::monodromy(gen, out.period, 2 * n);
    out.propagator_error = (m - m2).cwiseAbs().maxCoeff();
    m = (16.0 * m2 - m) / 15.0;
    out.steps_per_period = 2 * n;
  } else {
    out.steps_per_period = n;
  }
  Matrix shifted = m - Matrix::Identity(m.rows(), m.cols());
  out.state = detail::project_to_kernel(shifted, rho0, opt.rank_threshold, opt.residual_tol,
                                        "periodic_steady_state");
  return out;
}

// Cycle-averaged expectation value over one drive period starting from the
// periodic steady state. The relevant readouts (nuclear polarization) barely
// ripple within a period, but averaging is what an experiment reports.
inline double periodic_average(const TimeDependentLiouvillian& gen, const PeriodicSteadyState& ss,
                               const Matrix& op) {
  int n = ss.steps_per_period;
  double h = ss.period / n;
  Vector v = vec(ss.state);
  Vector k1, k2, k3, k4, tmp;
  Matrix lbuf;
  auto rhs = [&](double t, const Vector& x, Vector& dx) {
    gen.evaluate(t, lbuf);
    dx.noalias() = lbuf * x;
  };
  double acc = 0.5 * observable(ss.state, op);
  for (int i = 0; i < n; ++i) {
    detail::rk4_advance(rhs, i * h, h, v, k1, k2, k3, k4, tmp);
    double w = (i + 1 == n) ? 0.5 : 1.0;
    acc += w * observable(unvec(v, gen.dim), op);
  }
  return acc / n;
}

}  // namespace nvdnp
