#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "rmqfi/metrics.hpp"
#include "rmqfi/randmeas.hpp"

// estimation pipeline: phase-offset sweeps of the measured distance, the
// polynomial fit extracting the quadratic coefficient, the entanglement
// witness, and the measurement-budget search
namespace rmqfi {

struct SweepResult {
  RVec dtheta_grid;
  RVec dg_values; // estimated distance per grid point
  RVec dg_errors; // bootstrap standard errors
  std::int64_t n_unitaries = 0;
  // per-unitary kernel statistics backing joint bootstraps downstream:
  // column 0 is overlap(a,a); columns 1+2j / 2+2j are overlap(b_j,b_j) and
  // overlap(a,b_j) for grid point j. empty for exact (oracle) sweeps.
  RMat per_unitary;
};

// 8 linearly spaced offsets on [0.05, 0.4] rad
RVec default_dtheta_grid();

struct SweepOptions {
  std::optional<int> shots;    // exact probabilities when absent
  int bootstrap_resamples = 500;
};

// measure D(theta0, theta0+dtheta) over the grid, reusing the same unitaries
// across grid points; distances assembled from the kernel means as
// g_hat = mean(x_ab) + ((1-mean(x_aa)) + (1-mean(x_bb)))/2, D = 8(1-sqrt(g_hat))
SweepResult sweep_dg(const StateFamily& family, double theta0, const RVec& grid,
                     const EnsembleSpec& ensemble, int n_unitaries,
                     const Rng& rng, const SweepOptions& opts = {});

// the same sweep evaluated through the exact density-matrix distance
SweepResult sweep_dg_exact(const StateFamily& family, double theta0,
                           const RVec& grid);

struct FitOptions {
  int degree = 4; // highest power of dtheta in the model (powers 2..degree)
  int bootstrap_resamples = 500;
  std::uint64_t bootstrap_seed = 0x0f17;
};

struct FitResult {
  double sub_qfi = 0.0;    // fitted coefficient of dtheta^2
  RVec coefficients;       // one entry per power 2..degree
  double sub_qfi_error = 0.0;
  double residual_norm = 0.0;
};

// weighted least squares of c2 t^2 + ... + c_degree t^degree (no constant or
// linear term); weights 1/sigma^2, unweighted fallback when errors degenerate.
// sub_qfi_error is the larger of the covariance error (inflated by reduced
// chi^2 when > 1) and the joint bootstrap over unitaries when available
FitResult fit_quadratic(const SweepResult& sweep, const FitOptions& opts = {});

struct WitnessResult {
  double qfi_density = 0.0; // F / N
  int m_witnessed = 0;      // largest m with F/N > m, clamped to [0, N-1]
  int n_qubits = 0;
};

WitnessResult witness(double qfi_value, int n_qubits);

// remaining ghz coherence exp(-2 gamma t N) after collective pure dephasing
double ghz_coherence(int n_qubits, double gamma, double t);

// rank-2 state: (|0..0><0..0| + |1..1><1..1|)/2 plus coherence/2 off-diagonal
// rotated by the collective phase theta
Mat dephased_ghz_density(int n_qubits, double theta, double coherence);

// theta-parametrized family of the above, for sweeps and oracles
StateFamily dephased_ghz_family(int n_qubits, double coherence);

struct PointEstimate {
  double sub_qfi = 0.0;
  double error = 0.0; // bootstrap standard error
  std::int64_t n_unitaries = 0;
};

// single-offset estimate 8(1 - sqrt(g_hat))/dtheta^2 for the dephased-ghz
// family; matrix-free (propagates only U|0..0> and U|1..1> per unitary)
PointEstimate estimate_ghz_sub_qfi_point(int n_qubits, double coherence,
                                         double theta0, double dtheta,
                                         const EnsembleSpec& ensemble,
                                         int n_unitaries, const Rng& rng,
                                         int bootstrap_resamples = 500);

struct ScalingScenario {
  EnsembleSpec ensemble;        // hamiltonian_evolution; n_qubits is overridden
  double gamma = 0.0;           // dephasing rate on the ghz probe, 1/T
  double dephasing_time = 0.0;  // channel duration, units of T
  double dtheta = 0.1;
  double theta0 = 0.0;
};

struct ScalingSearch {
  int repetitions = 20;
  int n_floor = 16;
  int n_ceiling = 16384;
};

struct RequiredN {
  int n_qubits = 0;
  std::int64_t n_required = 0;
  bool converged = true;
  double mean_rel_error = 0.0;   // at n_required
  double mean_estimate = 0.0;    // mean over repetitions at n_required
  double estimate_spread = 0.0;  // standard deviation over repetitions
  double oracle = 0.0;           // exact finite-offset target
};

// smallest unitary count n whose mean relative error against the exact
// finite-offset oracle drops below epsilon, averaged over independent
// repetitions; doubling from n_floor, then bisection. prefixes of each
// repetition's unitary stream are reused across probed n values.
// hitting n_ceiling is reported via converged=false, not an exception
std::vector<RequiredN> required_measurements(const ScalingScenario& scenario,
                                             double epsilon,
                                             const std::vector<int>& n_list,
                                             const Rng& rng,
                                             const ScalingSearch& search = {});

struct ExponentFit {
  double a = 0.0;
  double b = 0.0;
  double a_err = 0.0;
  double b_err = 0.0;
};

// ordinary least squares of log2(n_required) = a + b N over converged rows
ExponentFit fit_scaling_exponent(const std::vector<RequiredN>& rows);

} // namespace rmqfi
