#pragma once

#include <cstdint>
#include <random>

namespace airysim {

/// Seedable counting-statistics generator with a fixed, documented
/// algorithm so that artifacts are reproducible: uniforms are the top 53
/// bits of mt19937_64, Poisson variates use Knuth's product method for
/// small means and Hormann's PTRS transformed rejection otherwise.
class CountingRng {
 public:
  explicit CountingRng(uint64_t seed) : engine_(seed) {}

  /// Uniform in [0, 1).
  double uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  /// Poisson variate with the given mean (mean >= 0).
  long poisson(double mean);

  static const char* algorithm() { return "poisson(knuth+ptrs)/mt19937_64/v1"; }

 private:
  std::mt19937_64 engine_;
};

}  // namespace airysim
