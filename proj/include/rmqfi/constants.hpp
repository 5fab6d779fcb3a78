#pragma once

// central numeric tolerances -- every module pulls its thresholds from here so
// the contracts stay consistent (double precision headroom at dim <= 4096)
namespace rmqfi::tol {

inline constexpr double hermiticity = 1e-12;    // max |m(i,j) - conj(m(j,i))|
inline constexpr double unit_trace = 1e-10;     // |tr(rho) - 1|
inline constexpr double psd_floor = -1e-10;     // smallest admissible eigenvalue
inline constexpr double state_norm = 1e-12;     // pure-state norm deviation
inline constexpr double unitarity = 1e-10;      // max |(U^dag U - I)(i,j)|
inline constexpr double eig_input = 1e-9;       // hermiticity required by the solver
inline constexpr double eig_reconstruct = 1e-9; // ||V diag(w) V^dag - m||_max
inline constexpr double qfi_pair_cutoff = 1e-12; // drop eigenpairs with p+p' below

} // namespace rmqfi::tol

namespace rmqfi {

inline constexpr double pi = 3.14159265358979323846;

} // namespace rmqfi
