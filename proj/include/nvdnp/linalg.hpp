#pragma once
#include <complex>

#include <Eigen/Dense>

#include "nvdnp/errors.hpp"

namespace nvdnp {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

inline Matrix kron(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

// Column-major stacking, so vec(A X B) == kron(B^T, A) vec(X).
inline Vector vec(const Matrix& m) {
  return Eigen::Map<const Vector>(m.data(), m.size());
}

inline Matrix unvec(const Vector& v, Eigen::Index dim) {
  if (v.size() != dim * dim) throw InvalidArgument("unvec: size mismatch");
  return Eigen::Map<const Matrix>(v.data(), dim, dim);
}

inline Matrix hermitize(const Matrix& m) { return 0.5 * (m + m.adjoint()); }

inline double hermiticity_residual(const Matrix& m) {
  return (m - m.adjoint()).cwiseAbs().maxCoeff();
}

inline bool is_hermitian(const Matrix& m, double tol = 1e-9) {
  double scale = m.cwiseAbs().maxCoeff();
  return hermiticity_residual(m) <= tol * (scale > 0 ? scale : 1.0);
}

}  // namespace nvdnp
