#include "rmqfi/operators.hpp"

#include <stdexcept>

namespace rmqfi {

Mat pauli(Axis axis) {
  Mat m(2, 2);
  switch (axis) {
    case Axis::x:
      m << 0, 1, 1, 0;
      break;
    case Axis::y:
      m << 0, cxd(0, -1), cxd(0, 1), 0;
      break;
    case Axis::z:
      m << 1, 0, 0, -1;
      break;
  }
  return m;
}

Mat site_operator(const Mat& op, int site, int n_qubits) {
  if (n_qubits < 1) throw std::invalid_argument("site_operator: need at least one qubit");
  if (site < 0 || site >= n_qubits)
    throw std::invalid_argument("site_operator: site out of range");
  if (op.rows() != 2 || op.cols() != 2)
    throw std::invalid_argument("site_operator: op must be 2x2");
  Mat out = (site == 0) ? op : Mat(Mat::Identity(2, 2));
  for (int j = 1; j < n_qubits; ++j)
    out = kron(out, j == site ? op : Mat(Mat::Identity(2, 2)));
  return out;
}

Mat collective_spin(Axis axis, int n_qubits) {
  if (n_qubits < 1) throw std::invalid_argument("collective_spin: need at least one qubit");
  const Eigen::Index dim = Eigen::Index{1} << n_qubits;
  Mat sigma = pauli(axis);
  Mat j = Mat::Zero(dim, dim);
  for (int site = 0; site < n_qubits; ++site)
    j += site_operator(sigma, site, n_qubits);
  return j / 2.0;
}

} // namespace rmqfi
