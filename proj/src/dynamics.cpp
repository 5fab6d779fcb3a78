#include "rmqfi/dynamics.hpp"

#include <bit>
#include <cmath>
#include <stdexcept>

#include "rmqfi/operators.hpp"
#include "rmqfi/states.hpp"

namespace rmqfi {

namespace {

int popcount(Eigen::Index s) { return std::popcount(static_cast<std::uint64_t>(s)); }

// Jz eigenvalue of basis index s
double jz_weight(Eigen::Index s, int n_qubits) {
  return 0.5 * n_qubits - popcount(s);
}

void check_ising(const IsingParams& p) {
  if (p.n_qubits < 2) throw std::invalid_argument("ising: need at least two qubits");
  if (!(p.alpha_exp > 0.0 && p.alpha_exp < 3.0))
    throw std::invalid_argument("ising: range exponent must lie in (0, 3)");
}

} // namespace

Mat ramsey_state(const RamseyParams& p) {
  if (p.t < 0.0) throw std::invalid_argument("ramsey_state: negative time");
  if (p.t2star <= 0.0) throw std::invalid_argument("ramsey_state: t2star must be positive");
  const double c = std::cos(p.phi / 2.0), s = std::sin(p.phi / 2.0);
  const double envelope = std::exp(-(p.t / p.t2star) * (p.t / p.t2star));
  const cxd coherence =
      0.5 * std::sin(p.phi) * envelope * std::exp(cxd(0.0, p.delta * p.t));
  Mat rho(2, 2);
  rho << c * c, coherence, std::conj(coherence), s * s;
  return rho;
}

Mat encode_phase(const Mat& rho, double theta, int n_qubits) {
  const Eigen::Index dim = Eigen::Index{1} << n_qubits;
  if (rho.rows() != dim || rho.cols() != dim)
    throw std::invalid_argument("encode_phase: dimension does not match qubit count");
  Vec phase(dim);
  for (Eigen::Index s = 0; s < dim; ++s)
    phase(s) = std::exp(cxd(0.0, -theta * jz_weight(s, n_qubits)));
  // diag(phase) rho diag(phase)^dag
  return phase.asDiagonal() * rho * phase.conjugate().asDiagonal();
}

Vec encode_phase(const Vec& psi, double theta, int n_qubits) {
  const Eigen::Index dim = Eigen::Index{1} << n_qubits;
  if (psi.size() != dim)
    throw std::invalid_argument("encode_phase: dimension does not match qubit count");
  Vec out(dim);
  for (Eigen::Index s = 0; s < dim; ++s)
    out(s) = psi(s) * std::exp(cxd(0.0, -theta * jz_weight(s, n_qubits)));
  return out;
}

Vec ghz_prepare(int n_qubits) {
  if (n_qubits < 1 || n_qubits > 12)
    throw std::invalid_argument("ghz_prepare: qubit count out of range [1, 12]");
  const Eigen::Index dim = Eigen::Index{1} << n_qubits;
  Vec v = basis_state(dim, 0);

  // hadamard on qubit 0 (most significant index bit)
  const Eigen::Index half = dim / 2;
  const double inv_sqrt2 = 0.7071067811865475244;
  for (Eigen::Index s = 0; s < half; ++s) {
    const cxd a = v(s), b = v(s + half);
    v(s) = (a + b) * inv_sqrt2;
    v(s + half) = (a - b) * inv_sqrt2;
  }

  // cnot chain: qubit j controls qubit j+1
  for (int j = 0; j + 1 < n_qubits; ++j) {
    const Eigen::Index cbit = Eigen::Index{1} << (n_qubits - 1 - j);
    const Eigen::Index tbit = Eigen::Index{1} << (n_qubits - 1 - (j + 1));
    for (Eigen::Index s = 0; s < dim; ++s)
      if ((s & cbit) && !(s & tbit)) std::swap(v(s), v(s | tbit));
  }
  return v;
}

Vec ghz_prepare_twisting(int n_qubits) {
  if (n_qubits < 1 || n_qubits > 12)
    throw std::invalid_argument("ghz_prepare_twisting: qubit count out of range [1, 12]");
  const Eigen::Index dim = Eigen::Index{1} << n_qubits;

  // all three factors are diagonal in either the x or the z product basis:
  // exp(i pi Jx/2) = H^(x)N diag(exp(i pi m_r / 2)) H^(x)N, exp(i pi Jz^2/2) diagonal
  Vec jx_phase(dim), jz2_phase(dim);
  for (Eigen::Index s = 0; s < dim; ++s) {
    const double m = jz_weight(s, n_qubits);
    jx_phase(s) = std::exp(cxd(0.0, pi / 2.0 * m));
    jz2_phase(s) = std::exp(cxd(0.0, pi / 2.0 * m * m));
  }

  Vec v = basis_state(dim, 0);
  auto apply_jx_rotation = [&](Vec& w) {
    fwht_inplace(w);
    w = w.cwiseProduct(jx_phase);
    fwht_inplace(w);
  };
  apply_jx_rotation(v);
  v = v.cwiseProduct(jz2_phase);
  apply_jx_rotation(v);
  return v;
}

Mat dephase(const Mat& rho, const DephasingParams& p) {
  if (p.gamma < 0.0 || p.t < 0.0)
    throw std::invalid_argument("dephase: negative rate or time");
  const Eigen::Index dim = rho.rows();
  Mat out(dim, dim);
  for (Eigen::Index sp = 0; sp < dim; ++sp)
    for (Eigen::Index s = 0; s < dim; ++s)
      out(s, sp) = rho(s, sp) * std::exp(-2.0 * p.gamma * p.t * popcount(s ^ sp));
  return out;
}

Mat lindblad_evolve(const Mat& rho, const DephasingParams& p, int steps) {
  if (steps < 1) throw std::invalid_argument("lindblad_evolve: steps must be positive");
  if (p.gamma * p.t / steps > 0.01)
    throw std::invalid_argument("lindblad_evolve: step size too coarse (need gamma*t/steps <= 0.01)");
  const Eigen::Index dim = rho.rows();
  const int n = num_qubits(dim);

  // per-site z signs: z_j(s) = +1/-1 for bit value 0/1
  std::vector<RVec> zsign(n, RVec(dim));
  for (int j = 0; j < n; ++j) {
    const Eigen::Index bit = Eigen::Index{1} << (n - 1 - j);
    for (Eigen::Index s = 0; s < dim; ++s) zsign[j](s) = (s & bit) ? -1.0 : 1.0;
  }

  // dissipator via the jump operators: sum_j Z_j rho Z_j - N rho
  auto dissipator = [&](const Mat& r) {
    Mat d = -static_cast<double>(n) * r;
    for (int j = 0; j < n; ++j)
      d += zsign[j].cast<cxd>().asDiagonal() * r * zsign[j].cast<cxd>().asDiagonal();
    return Mat(p.gamma * d);
  };

  const double h = p.t / steps;
  Mat state = rho;
  for (int step = 0; step < steps; ++step) {
    Mat k1 = dissipator(state);
    Mat k2 = dissipator(state + 0.5 * h * k1);
    Mat k3 = dissipator(state + 0.5 * h * k2);
    Mat k4 = dissipator(state + h * k3);
    state += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
  return state;
}

Mat ising_hamiltonian(const IsingParams& p) {
  check_ising(p);
  const Eigen::Index dim = Eigen::Index{1} << p.n_qubits;
  Mat h = Mat::Zero(dim, dim);
  Mat x = pauli(Axis::x);
  for (int k = 0; k < p.n_qubits; ++k) {
    Mat xk = site_operator(x, k, p.n_qubits);
    h += p.omega * xk;
    for (int l = k + 1; l < p.n_qubits; ++l)
      h += p.g * std::pow(static_cast<double>(l - k), -p.alpha_exp) *
           (xk * site_operator(x, l, p.n_qubits));
  }
  return h;
}

RVec ising_x_eigenvalues(const IsingParams& p) {
  check_ising(p);
  const Eigen::Index dim = Eigen::Index{1} << p.n_qubits;
  RVec e(dim);
  for (Eigen::Index r = 0; r < dim; ++r) {
    double acc = 0.0;
    for (int k = 0; k < p.n_qubits; ++k) {
      const double sk = (r >> (p.n_qubits - 1 - k)) & 1 ? -1.0 : 1.0;
      acc += p.omega * sk;
      for (int l = k + 1; l < p.n_qubits; ++l) {
        const double sl = (r >> (p.n_qubits - 1 - l)) & 1 ? -1.0 : 1.0;
        acc += p.g * std::pow(static_cast<double>(l - k), -p.alpha_exp) * sk * sl;
      }
    }
    e(r) = acc;
  }
  return e;
}

} // namespace rmqfi
