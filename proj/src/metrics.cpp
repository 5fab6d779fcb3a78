#include "rmqfi/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "rmqfi/states.hpp"

namespace rmqfi {

QfiResult exact_qfi(const Mat& rho, const Mat& drho, double pair_cutoff) {
  if (rho.rows() != drho.rows() || rho.cols() != drho.cols())
    throw std::invalid_argument("exact_qfi: dimension mismatch");
  if (!is_hermitian(drho, tol::eig_input))
    throw std::invalid_argument("exact_qfi: state derivative is not hermitian");

  SpectralDecomposition es = eig_hermitian(rho);
  Mat a = es.eigenvectors.adjoint() * drho * es.eigenvectors;
  const Eigen::Index dim = rho.rows();
  double f = 0.0;
  for (Eigen::Index i = 0; i < dim; ++i)
    for (Eigen::Index j = 0; j < dim; ++j) {
      const double psum = es.eigenvalues(i) + es.eigenvalues(j);
      if (psum > pair_cutoff) f += 2.0 * std::norm(a(i, j)) / psum;
    }
  return {f, QfiKind::exact, "state derivative supplied directly"};
}

QfiResult exact_qfi_unitary(const Mat& rho, const Mat& generator,
                            double pair_cutoff) {
  if (rho.rows() != generator.rows())
    throw std::invalid_argument("exact_qfi_unitary: dimension mismatch");
  if (!is_hermitian(generator, tol::eig_input))
    throw std::invalid_argument("exact_qfi_unitary: generator is not hermitian");
  Mat commutator = generator * rho - rho * generator;
  Mat drho = cxd(0.0, -1.0) * commutator;
  QfiResult out = exact_qfi(rho, drho, pair_cutoff);
  out.generator_note = "unitary family, drho = -i [G, rho]";
  return out;
}

Mat numeric_family_derivative(const StateFamily& family, double theta0,
                              double step) {
  auto central = [&](double h) {
    return Mat(((family(theta0 + h) - family(theta0 - h)) / (2.0 * h)).eval());
  };
  Mat coarse = central(step);
  Mat fine = central(step / 2.0);
  // one richardson step cancels the O(h^2) error
  Mat d = (4.0 * fine - coarse) / 3.0;
  // symmetrize away roundoff so downstream hermiticity checks stay happy
  return ((d + d.adjoint()) / 2.0).eval();
}

double superfidelity(const Mat& rho1, const Mat& rho2) {
  const double cross = overlap(rho1, rho2);
  const double gap1 = std::max(0.0, 1.0 - purity(rho1));
  const double gap2 = std::max(0.0, 1.0 - purity(rho2));
  const double g = cross + std::sqrt(gap1 * gap2);
  return std::clamp(g, 0.0, 1.0);
}

double modified_bures_distance(const Mat& rho1, const Mat& rho2) {
  return 8.0 * (1.0 - std::sqrt(superfidelity(rho1, rho2)));
}

QfiResult sub_qfi_exact(const StateFamily& family, double theta0,
                        double dtheta) {
  if (dtheta <= 0.0)
    throw std::invalid_argument("sub_qfi_exact: dtheta must be positive");
  const double d = modified_bures_distance(family(theta0), family(theta0 + dtheta));
  return {d / (dtheta * dtheta), QfiKind::sub,
          "finite difference at dtheta = " + std::to_string(dtheta)};
}

double uhlmann_fidelity(const Mat& rho1, const Mat& rho2) {
  if (rho1.rows() != rho2.rows())
    throw std::invalid_argument("uhlmann_fidelity: dimension mismatch");
  Mat r = sqrt_psd(rho1);
  Mat inner = r * rho2 * r;
  // psd by construction; symmetrize roundoff before the second root
  inner = (inner + inner.adjoint()) / 2.0;
  const double t = sqrt_psd(inner).trace().real();
  return std::clamp(t * t, 0.0, 1.0);
}

} // namespace rmqfi
