#pragma once

#include "rmqfi/linalg.hpp"

namespace rmqfi {

enum class Axis { x, y, z };

// 2x2 pauli matrix for the given axis
Mat pauli(Axis axis);

// single-site operator embedded into the N-qubit space at the given site
// (site 0 acts on the most significant index bit)
Mat site_operator(const Mat& op, int site, int n_qubits);

// collective spin J_axis = sum_j sigma_axis^(j) / 2
Mat collective_spin(Axis axis, int n_qubits);

} // namespace rmqfi
