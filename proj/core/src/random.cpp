#include "airysim/random.hpp"

#include <cmath>
#include <stdexcept>

namespace airysim {

namespace {

constexpr double kKnuthCutoff = 10.0;

}  // namespace

long CountingRng::poisson(double mean) {
  if (mean < 0.0 || !std::isfinite(mean))
    throw std::invalid_argument("poisson: mean must be finite and >= 0");
  if (mean == 0.0) return 0;

  if (mean <= kKnuthCutoff) {
    const double limit = std::exp(-mean);
    long k = 0;
    double prod = uniform();
    while (prod > limit) {
      ++k;
      prod *= uniform();
    }
    return k;
  }

  // PTRS (Hormann 1993): transformed rejection with squeeze.
  const double b = 0.931 + 2.53 * std::sqrt(mean);
  const double a = -0.059 + 0.02483 * b;
  const double inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
  const double v_r = 0.9277 - 3.6224 / (b - 2.0);
  const double log_mean = std::log(mean);
  for (;;) {
    const double u = uniform() - 0.5;
    const double v = uniform();
    const double us = 0.5 - std::abs(u);
    const double kf = std::floor((2.0 * a / us + b) * u + mean + 0.43);
    if (us >= 0.07 && v <= v_r) return static_cast<long>(kf);
    if (kf < 0.0 || (us < 0.013 && v > us)) continue;
    const double lhs = std::log(v * inv_alpha / (a / (us * us) + b));
    const double rhs = -mean + kf * log_mean - std::lgamma(kf + 1.0);
    if (lhs <= rhs) return static_cast<long>(kf);
  }
}

}  // namespace airysim
