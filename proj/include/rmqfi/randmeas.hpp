#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "rmqfi/dynamics.hpp"
#include "rmqfi/linalg.hpp"
#include "rmqfi/rng.hpp"

// random-unitary ensembles, simulated randomized measurements, and the
// statistical estimators of purity / overlap / superfidelity / fidelity
namespace rmqfi {

enum class EnsembleKind {
  haar_single_qubit_euler, // one qubit, Rx(a) Ry(b) Rx(c) parametrization
  haar_local_product,      // independent haar U(2) on every qubit
  hamiltonian_evolution,   // product of K disordered ising evolution segments
};

std::string ensemble_kind_name(EnsembleKind kind);
EnsembleKind ensemble_kind_from_name(const std::string& name);

struct EnsembleSpec {
  EnsembleKind kind = EnsembleKind::haar_local_product;
  int n_qubits = 1;
  // hamiltonian_evolution parameters (ignored by the local kinds)
  int segments = 20;         // number of evolution segments K
  double segment_time = 1.0; // duration T of each segment
  double delta_std = 1.0;    // std dev of the per-site z disorder
  IsingParams ising{};       // static coupling part (n_qubits is overridden)
};

// ensemble tag plus the exact parameters drawn for one member, so any sampled
// unitary can be reproduced from its record alone
struct Provenance {
  std::string kind;
  std::vector<double> params;
};

struct UnitaryMatrix {
  Mat u;
  Provenance provenance;
};

// one drawn ensemble member in parameter form; the dense matrix and the
// matrix-free action on vectors are both derived from the same parameters
struct SampledUnitary {
  EnsembleSpec spec;
  std::vector<double> params; // 3 angles per qubit, or K*N disorder values
  RVec ising_x_diag;          // cached x-basis diagonal (hamiltonian kind)

  Mat matrix() const;
  Vec apply(const Vec& v) const;
  Provenance provenance() const;
};

SampledUnitary draw_unitary(const EnsembleSpec& spec, Rng& rng);

// dense form with provenance; unitary to tol::unitarity
UnitaryMatrix sample_unitary(const EnsembleSpec& spec, Rng& rng);

// chebyshev-expanded action exp(-i t H) v for H = diag(z) + Hadamard^(x)N
// diag(x_eigenvalues) Hadamard^(x)N (exact, no operator splitting)
Vec propagate_z_plus_x_diagonal(const RVec& z_diag, const RVec& x_diag, double t,
                                const Vec& v);

// bessel functions J_0..J_kmax at fixed argument via the downward (miller)
// recurrence; exposed for testing against the standard library
std::vector<double> bessel_j_sequence(int kmax, double x);

// born probabilities diag(U rho U^dag); with shots given, multinomial
// empirical frequencies drawn from them
RVec measure(const Mat& rho, const UnitaryMatrix& u);
RVec measure(const Mat& rho, const UnitaryMatrix& u, int shots, Rng& rng);

// mixture given by spectral weights and the matching state-vector columns;
// lets the measurement path evolve r vectors instead of a dim^2 matrix
struct LowRankState {
  RVec weights;
  Mat vectors; // one column per weight
};

RVec measure_low_rank(const LowRankState& state, const SampledUnitary& u);
RVec measure_low_rank_shots(const LowRankState& state, const SampledUnitary& u,
                            int shots, Rng& rng);

// the pair-correlation kernel sum_{s,s'} (-2)^(-h(s,s')) pa(s) pb(s') * 2^N
// whose ensemble mean over local haar (or any global 2-design) is Tr(rho_a rho_b)
double hamming_kernel(const RVec& probs_a, const RVec& probs_b);

struct MeasurementRecord {
  std::int64_t unitary_index = 0;
  RVec probs_a;
  std::optional<RVec> probs_b;
  std::optional<int> shots;
};

struct RecordBatch {
  EnsembleSpec spec;
  std::vector<MeasurementRecord> records;
};

// simulate n randomized measurements of one or two states under a shared
// unitary per record; record k is reproducible from rng.sub(k) alone
RecordBatch collect_records(const Mat& rho_a, const Mat* rho_b,
                            const EnsembleSpec& spec, int n, const Rng& rng,
                            std::optional<int> shots = std::nullopt);

struct Estimate {
  double value = 0.0;
  double std_error = 0.0;
  std::int64_t n_unitaries = 0;
  std::string method;
};

// mean hamming-kernel overlap Tr(rho_a rho_b); local-haar ensembles only
Estimate estimate_overlap(const RecordBatch& batch);

// overlap of a state with itself; which selects the 'a' or 'b' slot
Estimate estimate_purity(const RecordBatch& batch, char which = 'a');

// g_hat = overlap_hat + sqrt(max(0,1-purity_a_hat) max(0,1-purity_b_hat));
// std_error by bootstrap over unitaries
Estimate estimate_superfidelity(const RecordBatch& batch,
                                int bootstrap_resamples = 500,
                                std::uint64_t bootstrap_seed = 0x5eed);

// single-qubit two-state fidelity 6 <p_a p_b> - 1 from outcome-0 probabilities
Estimate estimate_fidelity_single_qubit(const RecordBatch& batch);

// line-delimited record files: one self-contained json object per line,
// fields in fixed order (unitary_index, ensemble, n_qubits, [hamiltonian
// params], shots, probs_a, probs_b)
void write_records(const std::string& path, const RecordBatch& batch);
RecordBatch read_records(const std::string& path);

} // namespace rmqfi
