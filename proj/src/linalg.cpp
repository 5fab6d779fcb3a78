#include "rmqfi/linalg.hpp"

#include <lapacke.h>

#include <stdexcept>

namespace rmqfi {

bool is_hermitian(const Mat& m, double tolerance) {
  if (m.rows() != m.cols()) return false;
  return (m - m.adjoint()).cwiseAbs().maxCoeff() <= tolerance;
}

Mat kron(const Mat& a, const Mat& b) {
  if (a.rows() != a.cols() || b.rows() != b.cols())
    throw std::invalid_argument("kron: inputs must be square");
  const Eigen::Index da = a.rows(), db = b.rows();
  Mat out(da * db, da * db);
  for (Eigen::Index i = 0; i < da; ++i)
    for (Eigen::Index j = 0; j < da; ++j)
      out.block(i * db, j * db, db, db) = a(i, j) * b;
  return out;
}

SpectralDecomposition eig_hermitian(const Mat& m) {
  if (m.rows() != m.cols())
    throw std::invalid_argument("eig_hermitian: matrix must be square");
  if (!is_hermitian(m, tol::eig_input))
    throw std::invalid_argument("eig_hermitian: matrix is not hermitian");

  const lapack_int n = static_cast<lapack_int>(m.rows());
  Mat v = m; // overwritten with eigenvectors (ascending eigenvalue order)
  RVec w(n);
  lapack_int info = LAPACKE_zheevd(
      LAPACK_COL_MAJOR, 'V', 'L', n,
      reinterpret_cast<lapack_complex_double*>(v.data()), n, w.data());
  if (info != 0)
    throw std::runtime_error("eig_hermitian: zheevd failed to converge");

  SpectralDecomposition out;
  out.eigenvalues = w.reverse();
  out.eigenvectors = v.rowwise().reverse();
  return out;
}

Mat expi_hermitian(const Mat& h, double t) {
  SpectralDecomposition es = eig_hermitian(h);
  Vec phases(h.rows());
  for (Eigen::Index k = 0; k < h.rows(); ++k)
    phases(k) = std::exp(cxd(0.0, -t * es.eigenvalues(k)));
  return es.eigenvectors * phases.asDiagonal() * es.eigenvectors.adjoint();
}

Mat sqrt_psd(const Mat& m) {
  SpectralDecomposition es = eig_hermitian(m);
  RVec roots(m.rows());
  for (Eigen::Index k = 0; k < m.rows(); ++k)
    roots(k) = es.eigenvalues(k) > 0.0 ? std::sqrt(es.eigenvalues(k)) : 0.0;
  return es.eigenvectors * roots.asDiagonal() * es.eigenvectors.adjoint();
}

void fwht_inplace(Vec& v) {
  const Eigen::Index n = v.size();
  if (n == 0 || (n & (n - 1)) != 0)
    throw std::invalid_argument("fwht_inplace: length must be a power of two");
  const double inv_sqrt2 = 0.7071067811865475244;
  for (Eigen::Index len = 1; len < n; len <<= 1) {
    for (Eigen::Index block = 0; block < n; block += 2 * len) {
      for (Eigen::Index i = block; i < block + len; ++i) {
        const cxd a = v(i), b = v(i + len);
        v(i) = (a + b) * inv_sqrt2;
        v(i + len) = (a - b) * inv_sqrt2;
      }
    }
  }
}

} // namespace rmqfi
