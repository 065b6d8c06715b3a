#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

namespace dergame {

// splitmix64 finalizer; used to derive independent substream seeds.
inline std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Seed for agent k's private stream within one repetition. Runs use
// run_seed = base_seed + repetition; streams are decorrelated by double
// mixing so parallel and sequential execution see identical draws.
inline std::uint64_t substream_seed(std::uint64_t run_seed, std::uint64_t k) {
  return mix64(mix64(run_seed) ^ mix64(k + 1));
}

// mt19937_64 with hand-rolled uniform/normal transforms. The standard
// distributions are not bit-stable across library implementations; these
// transforms consume a fixed number of engine words per call, so results
// are reproducible from the seed alone.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  // Uniform on [0, 1), 53-bit resolution, one engine word.
  double uniform01() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

  // Box-Muller, always exactly two engine words per call.
  double normal(double mean, double stddev) {
    double u1 = uniform01();
    double u2 = uniform01();
    if (u1 <= 0.0) u1 = 0x1.0p-53;  // log(0) guard
    const double r = std::sqrt(-2.0 * std::log(u1));
    return mean + stddev * r * std::cos(2.0 * std::numbers::pi * u2);
  }

 private:
  std::mt19937_64 eng_;
};

}  // namespace dergame
