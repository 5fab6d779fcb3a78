#pragma once

#include <Eigen/Dense>
#include <complex>

#include "rmqfi/constants.hpp"

namespace rmqfi {

using cxd = std::complex<double>;
using Mat = Eigen::MatrixXcd;
using Vec = Eigen::VectorXcd;
using RVec = Eigen::VectorXd;
using RMat = Eigen::MatrixXd;

// eigenvalues sorted descending, eigenvectors as matching columns
struct SpectralDecomposition {
  RVec eigenvalues;
  Mat eigenvectors;
};

bool is_hermitian(const Mat& m, double tolerance = tol::hermiticity);

// kronecker product, standard layout: the first factor owns the most
// significant part of the row/column index
Mat kron(const Mat& a, const Mat& b);

// dense hermitian eigendecomposition (LAPACK zheevd behind the scenes);
// throws if the input is non-hermitian beyond tol::eig_input or if the
// backend fails to converge
SpectralDecomposition eig_hermitian(const Mat& m);

// exp(-i t H) for hermitian H, by spectral decomposition
Mat expi_hermitian(const Mat& h, double t);

// principal square root of a positive semidefinite matrix; eigenvalues below
// zero (numerical noise on psd inputs) are clipped to zero
Mat sqrt_psd(const Mat& m);

// in-place normalized fast walsh-hadamard transform: v <- H^(x)N v
// (the n-qubit hadamard rotation between the z and x product bases)
void fwht_inplace(Vec& v);

} // namespace rmqfi
