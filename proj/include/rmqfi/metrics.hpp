#pragma once

#include <functional>
#include <string>

#include "rmqfi/linalg.hpp"

// exact (oracle) metrology quantities computed from full density matrices
namespace rmqfi {

// a parametrized state family theta -> rho(theta)
using StateFamily = std::function<Mat(double)>;

enum class QfiKind { exact, sub };

struct QfiResult {
  double value = 0.0;
  QfiKind kind = QfiKind::exact;
  std::string generator_note;
};

// spectral-sum quantum fisher information
//   F = sum_{l,l'} 2 |<l| drho |l'>|^2 / (p_l + p_l')
// over eigenpairs with p_l + p_l' above the cutoff
QfiResult exact_qfi(const Mat& rho, const Mat& drho,
                    double pair_cutoff = tol::qfi_pair_cutoff);

// specialization to unitary families rho(theta) = e^{-i theta G} rho e^{i theta G},
// where drho = -i [G, rho]
QfiResult exact_qfi_unitary(const Mat& rho, const Mat& generator,
                            double pair_cutoff = tol::qfi_pair_cutoff);

// central finite difference of a black-box family at theta0, one richardson
// extrapolation step (validated against the commutator path in tests)
Mat numeric_family_derivative(const StateFamily& family, double theta0,
                              double step = 1e-5);

// g = Tr(rho1 rho2) + sqrt((1 - Tr rho1^2)(1 - Tr rho2^2)), clamped to [0, 1]
double superfidelity(const Mat& rho1, const Mat& rho2);

// D = 8 (1 - sqrt(g)); in [0, 8], zero iff the superfidelity is one, and its
// quadratic coefficient in dtheta recovers the fisher information for pure
// states (the plain 8(1-g) normalization would double it)
double modified_bures_distance(const Mat& rho1, const Mat& rho2);

// finite-difference lower bound on the QFI:
//   F_sub = D(rho(theta0), rho(theta0 + dtheta)) / dtheta^2
QfiResult sub_qfi_exact(const StateFamily& family, double theta0, double dtheta);

// (Tr sqrt(sqrt(rho1) rho2 sqrt(rho1)))^2
double uhlmann_fidelity(const Mat& rho1, const Mat& rho2);

} // namespace rmqfi
