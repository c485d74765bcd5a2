#pragma once

// Two-dip Lorentzian fit for pulled-apart ODMR resonance pairs. The two
// fitted centers are what the zero-field-splitting thermometer consumes.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "nvdnp/errors.hpp"

namespace nvdnp {

// baseline - sum of two Lorentzian dips, u = (f - c) / w per dip.
inline double doublet_value(double baseline, double a1, double c1, double w1,
                            double a2, double c2, double w2, double f) {
  double u1 = (f - c1) / w1;
  double u2 = (f - c2) / w2;
  return baseline - a1 / (1.0 + u1 * u1) - a2 / (1.0 + u2 * u2);
}

struct DoubletFit {
  double f_minus = 0;  // lower fitted center, Hz
  double f_plus = 0;   // upper fitted center, Hz
  double width_minus = 0;
  double width_plus = 0;
  double depth_minus = 0;
  double depth_plus = 0;
  double baseline = 0;
  double residual_norm = 0;  // euclidean norm over all points
  double center_stderr_minus = 0;
  double center_stderr_plus = 0;
  int iterations = 0;
};

namespace detail {

// Seed from the two deepest local minima. They must be clearly separated,
// otherwise the data does not carry a doublet and we refuse to guess.
struct DoubletSeed {
  double baseline, a1, c1, w1, a2, c2, w2;
};

inline DoubletSeed doublet_seed(const std::vector<double>& f, const std::vector<double>& y) {
  size_t n = f.size();
  double baseline = *std::max_element(y.begin(), y.end());
  std::vector<size_t> dips;
  for (size_t i = 1; i + 1 < n; ++i)
    if (y[i] <= y[i - 1] && y[i] <= y[i + 1] && y[i] < baseline) dips.push_back(i);
  std::sort(dips.begin(), dips.end(),
            [&](size_t a, size_t b) { return y[a] < y[b]; });
  double span = f.back() - f.front();
  size_t first = n, second = n;
  if (!dips.empty()) first = dips[0];
  for (size_t k = 1; k < dips.size(); ++k)
    if (std::abs(f[dips[k]] - f[first]) > 0.05 * span) {
      second = dips[k];
      break;
    }
  if (first == n || second == n)
    throw NumericError("doublet fit: found fewer than two separated dips");

  auto width_guess = [&](size_t idip) {
    double half = 0.5 * (baseline + y[idip]);
    size_t lo = idip, hi = idip;
    while (lo > 0 && y[lo] < half) --lo;
    while (hi + 1 < n && y[hi] < half) ++hi;
    double w = 0.5 * (f[hi] - f[lo]);
    return w > 0 ? w : 0.01 * span;
  };

  DoubletSeed s;
  s.baseline = baseline;
  s.a1 = baseline - y[first];
  s.c1 = f[first];
  s.w1 = width_guess(first);
  s.a2 = baseline - y[second];
  s.c2 = f[second];
  s.w2 = width_guess(second);
  if (s.c1 > s.c2) {
    std::swap(s.a1, s.a2);
    std::swap(s.c1, s.c2);
    std::swap(s.w1, s.w2);
  }
  return s;
}

}  // namespace detail

// Damped least squares with an analytic Jacobian. The fit runs on a shifted
// and rescaled frequency axis; raw centers near 3e9 Hz against depths near
// 1e-2 would otherwise push the normal equations past double precision.
inline DoubletFit odmr_doublet_fit(const std::vector<double>& frequencies,
                                   const std::vector<double>& values,
                                   int max_iterations = 200) {
  size_t n = frequencies.size();
  if (n < 8) throw InvalidArgument("doublet fit needs at least 8 samples");
  if (values.size() != n)
    throw InvalidArgument("doublet fit: frequency and value counts differ");

  double f_ref = frequencies.front();
  double f_scale = frequencies.back() - frequencies.front();
  if (!(f_scale > 0))
    throw InvalidArgument("doublet fit: frequency axis must be increasing");
  std::vector<double> x(n);
  for (size_t i = 0; i < n; ++i) x[i] = (frequencies[i] - f_ref) / f_scale;

  detail::DoubletSeed seed = detail::doublet_seed(x, values);

  // p = (baseline, a1, c1, w1, a2, c2, w2) in axis units.
  Eigen::Matrix<double, 7, 1> p;
  p << seed.baseline, seed.a1, seed.c1, seed.w1, seed.a2, seed.c2, seed.w2;

  auto residual = [&](const Eigen::Matrix<double, 7, 1>& q, Eigen::VectorXd& r) {
    for (size_t i = 0; i < n; ++i)
      r(static_cast<Eigen::Index>(i)) =
          values[i] - doublet_value(q(0), q(1), q(2), q(3), q(4), q(5), q(6), x[i]);
  };
  auto jacobian = [&](const Eigen::Matrix<double, 7, 1>& q, Eigen::MatrixXd& J) {
    for (size_t i = 0; i < n; ++i) {
      auto row = J.row(static_cast<Eigen::Index>(i));
      row(0) = -1.0;  // residual = data - model, model gains baseline
      for (int d = 0; d < 2; ++d) {
        double a = q(1 + 3 * d), c = q(2 + 3 * d), w = q(3 + 3 * d);
        double u = (x[i] - c) / w;
        double L = 1.0 / (1.0 + u * u);
        row(1 + 3 * d) = L;                        // deeper dip lowers the model
        row(2 + 3 * d) = a * 2.0 * u * L * L / w;  // center shift
        row(3 + 3 * d) = a * 2.0 * u * u * L * L / w;  // width change
      }
    }
  };

  Eigen::VectorXd r(static_cast<Eigen::Index>(n));
  Eigen::MatrixXd J(static_cast<Eigen::Index>(n), 7);
  residual(p, r);
  double cost = r.squaredNorm();
  double lambda = 1e-3;
  int used = 0;
  bool converged = false;

  for (int it = 0; it < max_iterations; ++it) {
    used = it + 1;
    jacobian(p, J);
    Eigen::Matrix<double, 7, 7> jtj = J.transpose() * J;
    Eigen::Matrix<double, 7, 1> g = J.transpose() * r;
    Eigen::Matrix<double, 7, 7> damped = jtj;
    for (int d = 0; d < 7; ++d) damped(d, d) += lambda * std::max(jtj(d, d), 1e-30);
    Eigen::Matrix<double, 7, 1> step = damped.ldlt().solve(-g);
    Eigen::Matrix<double, 7, 1> trial = p + step;
    trial(3) = std::abs(trial(3));
    trial(6) = std::abs(trial(6));
    Eigen::VectorXd rt(static_cast<Eigen::Index>(n));
    residual(trial, rt);
    double trial_cost = rt.squaredNorm();
    if (trial_cost < cost) {
      double rel_step = step.norm() / (1.0 + p.norm());
      double rel_drop = (cost - trial_cost) / (1.0 + cost);
      p = trial;
      r = rt;
      cost = trial_cost;
      lambda /= 3.0;
      if (rel_step < 1e-12 || rel_drop < 1e-14) {
        converged = true;
        break;
      }
    } else {
      lambda *= 5.0;
      if (lambda > 1e14) break;
    }
  }

  if (!converged) {
    jacobian(p, J);
    double grad = (J.transpose() * r).norm();
    if (grad > 1e-8 * (1.0 + cost))
      throw NumericError("doublet fit: no convergence after " + std::to_string(used) +
                         " iterations (cost " + std::to_string(cost) + ", gradient " +
                         std::to_string(grad) + ")");
  }

  // Parameter covariance from the linearized problem, then back to Hz.
  jacobian(p, J);
  Eigen::Matrix<double, 7, 7> jtj = J.transpose() * J;
  double dof_scale = cost / static_cast<double>(n > 7 ? n - 7 : 1);
  Eigen::FullPivLU<Eigen::Matrix<double, 7, 7>> lu(jtj);
  Eigen::Matrix<double, 7, 7> cov = Eigen::Matrix<double, 7, 7>::Zero();
  if (lu.isInvertible()) cov = lu.inverse() * dof_scale;

  bool first_lower = p(2) <= p(5);
  int lo = first_lower ? 0 : 1, hi = first_lower ? 1 : 0;
  DoubletFit out;
  out.baseline = p(0);
  out.f_minus = f_ref + p(2 + 3 * lo) * f_scale;
  out.f_plus = f_ref + p(2 + 3 * hi) * f_scale;
  out.width_minus = std::abs(p(3 + 3 * lo)) * f_scale;
  out.width_plus = std::abs(p(3 + 3 * hi)) * f_scale;
  out.depth_minus = p(1 + 3 * lo);
  out.depth_plus = p(1 + 3 * hi);
  out.residual_norm = std::sqrt(cost);
  out.center_stderr_minus = std::sqrt(std::max(cov(2 + 3 * lo, 2 + 3 * lo), 0.0)) * f_scale;
  out.center_stderr_plus = std::sqrt(std::max(cov(2 + 3 * hi, 2 + 3 * hi), 0.0)) * f_scale;
  out.iterations = used;
  return out;
}

}  // namespace nvdnp
