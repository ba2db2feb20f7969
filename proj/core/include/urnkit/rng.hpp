#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <span>

namespace urnkit {

// SplitMix64 finalizer (Steele, Lea, Flood 2014). Used to turn
// (master_seed XOR stream_index) into well-separated stream seeds.
constexpr std::uint64_t avalanche_mix64(std::uint64_t z) noexcept {
  z ^= z >> 30;
  z *= 0xbf58476d1ce4e5b9ULL;
  z ^= z >> 27;
  z *= 0x94d049bb133111ebULL;
  z ^= z >> 31;
  return z;
}

// Deterministic generator. All variates are derived from mt19937_64 raw
// output through fixed bit arithmetic, never through std distributions,
// so a seed reproduces the identical stream on any platform.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  std::uint64_t next_u64() { return gen_(); }

  // Uniform on [0, 1) with 53 random bits.
  double uniform01() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  // Exponential with the given rate (mean 1/rate).
  double exponential(double rate) { return -std::log1p(-uniform01()) / rate; }

  // Inverse-CDF pick over the probability vector p (index order is the
  // tie-breaking order). Any deficit from rounding goes to the last index.
  int pick(std::span<const double> p) {
    const double u = uniform01();
    double cum = 0.0;
    for (std::size_t k = 0; k + 1 < p.size(); ++k) {
      cum += p[k];
      if (u < cum) return static_cast<int>(k);
    }
    return static_cast<int>(p.size()) - 1;
  }

 private:
  std::mt19937_64 gen_;
};

}  // namespace urnkit
