#pragma once

#include <cmath>
#include <cstdint>

// deterministic rng with counter-based sub-streams.
//
// the core generator is splitmix64; uniform and normal variates are produced
// with fixed bit-level recipes (no std::*_distribution, whose output is
// implementation-defined and would break byte-identical reproducibility).
// sub(k) derives the k-th child stream from the master seed alone, so records
// generated for unitary index k are identical no matter how work is scheduled.
namespace rmqfi {

inline std::uint64_t splitmix64_step(std::uint64_t& state) {
  state += 0x9e3779b97f4a7c15ULL;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : seed_(seed), state_(seed) {}

  std::uint64_t seed() const { return seed_; }

  std::uint64_t next_u64() { return splitmix64_step(state_); }

  // uniform on [0, 1) with 53-bit resolution
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // standard normal via box-muller (pair cached)
  double normal() {
    if (have_cached_) {
      have_cached_ = false;
      return cached_;
    }
    // 1 - u keeps the log argument in (0, 1]
    const double r = std::sqrt(-2.0 * std::log(1.0 - uniform()));
    const double a = 2.0 * 3.14159265358979323846 * uniform();
    cached_ = r * std::sin(a);
    have_cached_ = true;
    return r * std::cos(a);
  }

  // independent child stream identified by a counter; depends only on the
  // master seed and the counter, never on how much of this stream was consumed
  Rng sub(std::uint64_t counter) const {
    std::uint64_t s = seed_ ^ (0x6a09e667f3bcc909ULL + counter * 0x9e3779b97f4a7c15ULL);
    // one mixing round decorrelates neighbouring counters
    std::uint64_t mixed = splitmix64_step(s);
    return Rng(mixed);
  }

 private:
  std::uint64_t seed_;
  std::uint64_t state_;
  double cached_ = 0.0;
  bool have_cached_ = false;
};

} // namespace rmqfi
