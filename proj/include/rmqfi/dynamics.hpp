#pragma once

#include "rmqfi/linalg.hpp"

// state preparation and evolution: the ramsey single-qubit family, collective
// phase encoding, GHZ constructors, pure dephasing (closed form + RK4 oracle)
// and the long-range ising coupling hamiltonian
namespace rmqfi {

struct RamseyParams {
  double phi = 0.0;    // initial rotation angle, rad
  double delta = 0.0;  // detuning, rad per unit time
  double t = 0.0;      // free evolution time
  double t2star = 1.0; // gaussian dephasing time, same unit as t
};

struct DephasingParams {
  double gamma = 0.0; // dephasing rate, 1/time
  double t = 0.0;     // channel duration
};

struct IsingParams {
  int n_qubits = 2;
  double g = 1.0;         // nearest-neighbour coupling strength, 1/time
  double alpha_exp = 1.5; // power-law range exponent, must be in (0, 3)
  double omega = 1.0;     // transverse field, 1/time
};

// 2x2 state with diagonal (cos^2(phi/2), sin^2(phi/2)) and upper off-diagonal
// (sin(phi)/2) * exp(i delta t - (t/t2star)^2)
Mat ramsey_state(const RamseyParams& p);

// rho -> exp(-i theta Jz) rho exp(i theta Jz); entry (s,s') picks up the phase
// exp(-i theta (m_s - m_s')) with m_s = N/2 - popcount(s)
Mat encode_phase(const Mat& rho, double theta, int n_qubits);

// same encoding applied to a pure state vector
Vec encode_phase(const Vec& psi, double theta, int n_qubits);

// GHZ state (|0..0> + |1..1>)/sqrt(2) prepared by the standard circuit:
// hadamard on qubit 0 followed by a chain of CNOTs; valid for 1 <= N <= 12
Vec ghz_prepare(int n_qubits);

// alternative constructor: the one-axis-twisting product
// exp(i pi Jx/2) exp(i pi Jz^2/2) exp(i pi Jx/2) applied to |0..0>.
// for even qubit counts this yields a ghz-class state: equal 1/sqrt(2)
// amplitudes on |0..0> and |1..1>, but with a relative phase, i.e. the
// circuit state rotated by a collective z phase; for odd N the product
// lands on a different state altogether
Vec ghz_prepare_twisting(int n_qubits);

// exact pure-dephasing channel: entry (s,s') damped by exp(-2 gamma t h(s,s'))
// with h the hamming distance; diagonal untouched
Mat dephase(const Mat& rho, const DephasingParams& p);

// RK4 integration of d(rho)/dt = gamma sum_j (Z_j rho Z_j - rho), used as an
// independent oracle for dephase; requires gamma*t/steps <= 0.01
Mat lindblad_evolve(const Mat& rho, const DephasingParams& p, int steps);

// H_s = sum_{k<l} g |k-l|^(-alpha) X_k X_l + omega sum_k X_k (dense form)
Mat ising_hamiltonian(const IsingParams& p);

// the same hamiltonian's diagonal in the x product basis, index-aligned with
// fwht_inplace: H_s = H^(x)N diag(values) H^(x)N
RVec ising_x_eigenvalues(const IsingParams& p);

} // namespace rmqfi
