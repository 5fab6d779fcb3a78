#include "rmqfi/states.hpp"

#include <stdexcept>
#include <string>

namespace rmqfi {

int num_qubits(Eigen::Index dim) {
  if (dim < 2 || (dim & (dim - 1)) != 0)
    throw std::invalid_argument("dimension " + std::to_string(dim) +
                                " is not a power of two");
  int n = 0;
  while ((Eigen::Index{1} << n) < dim) ++n;
  return n;
}

void check_density(const Mat& rho) {
  if (rho.rows() != rho.cols())
    throw std::invalid_argument("density matrix must be square");
  num_qubits(rho.rows());
  if (!is_hermitian(rho, tol::hermiticity))
    throw std::invalid_argument("density matrix is not hermitian");
  if (std::abs(rho.trace().real() - 1.0) > tol::unit_trace ||
      std::abs(rho.trace().imag()) > tol::unit_trace)
    throw std::invalid_argument("density matrix trace differs from 1");
  SpectralDecomposition es = eig_hermitian(rho);
  if (es.eigenvalues.minCoeff() < tol::psd_floor)
    throw std::invalid_argument("density matrix has a negative eigenvalue");
}

void check_pure(const Vec& psi) {
  if (std::abs(psi.squaredNorm() - 1.0) > tol::state_norm)
    throw std::invalid_argument("pure state is not normalized");
}

Vec basis_state(Eigen::Index dim, Eigen::Index idx) {
  if (idx < 0 || idx >= dim) throw std::invalid_argument("basis index out of range");
  Vec v = Vec::Zero(dim);
  v(idx) = 1.0;
  return v;
}

Mat projector(const Vec& psi) { return psi * psi.adjoint(); }

double purity(const Mat& rho) {
  // tr(rho^2) = frobenius norm squared for hermitian rho
  return rho.squaredNorm();
}

double overlap(const Mat& rho1, const Mat& rho2) {
  if (rho1.rows() != rho2.rows() || rho1.cols() != rho2.cols())
    throw std::invalid_argument("overlap: dimension mismatch");
  // tr(rho1 rho2) = sum_ij conj(rho1_ij) rho2_ij for hermitian rho1
  return rho1.cwiseProduct(rho2.conjugate()).sum().real();
}

Mat ginibre(Rng& rng, Eigen::Index rows, Eigen::Index cols) {
  Mat g(rows, cols);
  const double inv_sqrt2 = 0.7071067811865475244;
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i)
      g(i, j) = cxd(rng.normal(), rng.normal()) * inv_sqrt2;
  return g;
}

Vec random_pure(Rng& rng, Eigen::Index dim) {
  Vec v = ginibre(rng, dim, 1).col(0);
  return v / v.norm();
}

Mat random_density(Rng& rng, Eigen::Index dim, Eigen::Index rank) {
  if (rank <= 0 || rank > dim) rank = dim;
  Mat g = ginibre(rng, dim, rank);
  Mat rho = g * g.adjoint();
  rho /= rho.trace().real();
  // symmetrize away the last bits of floating-point asymmetry
  return ((rho + rho.adjoint()) / 2.0).eval();
}

Mat random_hermitian(Rng& rng, Eigen::Index dim) {
  Mat g = ginibre(rng, dim, dim);
  return ((g + g.adjoint()) / 2.0).eval();
}

Mat random_unitary_global(Rng& rng, Eigen::Index dim) {
  Mat g = ginibre(rng, dim, dim);
  Eigen::HouseholderQR<Mat> qr(g);
  Mat q = qr.householderQ();
  Mat r = qr.matrixQR().triangularView<Eigen::Upper>();
  // fix the phase ambiguity so the distribution is exactly haar
  for (Eigen::Index k = 0; k < dim; ++k) {
    cxd d = r(k, k);
    q.col(k) *= d / std::abs(d);
  }
  return q;
}

} // namespace rmqfi
