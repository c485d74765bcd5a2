#pragma once
#include <cmath>
#include <vector>

#include "nvdnp/superoperator.hpp"

namespace nvdnp {

struct EvolveOptions {
  double step = 0.0;        // s; 0 selects 1 / (40 * f_max)
  int max_snapshots = 256;  // stored states are thinned to at most this many
};

struct TimeSeries {
  std::vector<double> times;
  std::vector<Matrix> states;
  Matrix final_state;
  double step = 0.0;
  long steps = 0;
};

namespace detail {

// Classic fixed-step RK4 for v' = L(t) v. Kept out of line so the steady
// state code can reuse it for the one-period propagator.
template <typename Rhs, typename Vec>
inline void rk4_advance(const Rhs& rhs, double t, double h, Vec& v, Vec& k1, Vec& k2, Vec& k3,
                        Vec& k4, Vec& tmp) {
  rhs(t, v, k1);
  tmp = v + (0.5 * h) * k1;
  rhs(t + 0.5 * h, tmp, k2);
  tmp = v + (0.5 * h) * k2;
  rhs(t + 0.5 * h, tmp, k3);
  tmp = v + h * k3;
  rhs(t + h, tmp, k4);
  v += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

}  // namespace detail

// Integrate the master equation from rho0 over the given duration. The step
// must resolve the fastest retained frequency: step <= 1 / (20 * f_max).
// Trace is conserved identically (the generator is traceless in the adjoint
// sense), so trace drift doubles as an integration sanity check.
inline TimeSeries evolve(const TimeDependentLiouvillian& gen, const Matrix& rho0, double duration,
                         EvolveOptions opt = {}) {
  if (duration < 0) throw InvalidArgument("evolve: duration must be >= 0");
  if (rho0.rows() != gen.dim || rho0.cols() != gen.dim)
    throw InvalidArgument("evolve: state dimension does not match the generator");
  double fmax = gen.max_frequency();
  double limit = (fmax > 0) ? 1.0 / (20.0 * fmax) : duration;
  double step = opt.step;
  if (step == 0.0) step = (fmax > 0) ? 1.0 / (40.0 * fmax) : duration;
  if (fmax > 0 && step > limit * (1.0 + 1e-12)) {
    throw InvalidArgument("evolve: step " + std::to_string(step) +
                          " s exceeds 1/(20 f_max) = " + std::to_string(limit) +
                          " s for f_max = " + std::to_string(fmax) + " Hz");
  }
  if (step <= 0) throw InvalidArgument("evolve: step must be > 0");

  long n = (duration > 0) ? static_cast<long>(std::ceil(duration / step - 1e-9)) : 0;
  if (n > 0) step = duration / static_cast<double>(n);

  TimeSeries out;
  out.step = step;
  out.steps = n;
  long stride = std::max<long>(1, (opt.max_snapshots > 0) ? n / opt.max_snapshots : n);

  Vector v = vec(rho0);
  Vector k1, k2, k3, k4, tmp;
  Matrix lbuf;
  auto rhs = [&](double t, const Vector& x, Vector& dx) {
    if (gen.is_static()) {
      dx.noalias() = gen.static_part * x;
    } else {
      gen.evaluate(t, lbuf);
      dx.noalias() = lbuf * x;
    }
  };
  out.times.push_back(0.0);
  out.states.push_back(rho0);
  for (long i = 0; i < n; ++i) {
    double t = static_cast<double>(i) * step;
    detail::rk4_advance(rhs, t, step, v, k1, k2, k3, k4, tmp);
    if ((i + 1) % stride == 0 || i + 1 == n) {
      out.times.push_back(static_cast<double>(i + 1) * step);
      out.states.push_back(unvec(v, gen.dim));
    }
  }
  out.final_state = out.states.back();
  return out;
}

}  // namespace nvdnp
