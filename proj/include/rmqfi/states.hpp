#pragma once

#include "rmqfi/linalg.hpp"
#include "rmqfi/rng.hpp"

// dense multi-qubit state helpers.
//
// convention used everywhere in this library: qubit 0 is the most significant
// bit of the computational-basis index, i.e. bit of qubit j in basis index s
// is (s >> (N-1-j)) & 1, matching the kron() factor order.
namespace rmqfi {

// number of qubits for a 2^N dimension; throws if dim is not a power of two
int num_qubits(Eigen::Index dim);

// throws std::invalid_argument when the density-matrix invariants are
// violated: hermiticity, unit trace, positive semidefiniteness, 2^N dimension
void check_density(const Mat& rho);

// throws when |psi| deviates from 1 beyond tol::state_norm
void check_pure(const Vec& psi);

// |idx><idx| basis projector building blocks
Vec basis_state(Eigen::Index dim, Eigen::Index idx);

// rank-1 density matrix |psi><psi|
Mat projector(const Vec& psi);

double purity(const Mat& rho);

// Tr(rho1 rho2), real for hermitian inputs; throws on dimension mismatch
double overlap(const Mat& rho1, const Mat& rho2);

// --- random test-state generators (deterministic given the rng stream) ---

// complex gaussian matrix, entries (normal + i normal)/sqrt(2)
Mat ginibre(Rng& rng, Eigen::Index rows, Eigen::Index cols);

// haar-random pure state of the given dimension
Vec random_pure(Rng& rng, Eigen::Index dim);

// random full-rank (or rank-limited) density matrix, Ginibre construction
Mat random_density(Rng& rng, Eigen::Index dim, Eigen::Index rank = 0);

// random hermitian matrix with gaussian entries
Mat random_hermitian(Rng& rng, Eigen::Index dim);

// haar-random unitary of arbitrary dimension via QR with phase correction
Mat random_unitary_global(Rng& rng, Eigen::Index dim);

} // namespace rmqfi
