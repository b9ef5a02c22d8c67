#pragma once

// Shared oracles and generators for the test suites. Everything here is
// independent of the implementation paths it checks: analytic closed
// forms, special functions, and brute-force quadrature only.

#include <cmath>
#include <random>
#include <vector>

#include <boost/math/special_functions/airy.hpp>

#include "airysim/grid.hpp"

namespace testsup {

inline airysim::ComplexField gaussian_field(const airysim::TransverseGrid& g,
                                            double waist, double center = 0.0,
                                            double chirp = 0.0,
                                            double tilt = 0.0) {
  Eigen::VectorXcd values(g.n);
  for (int j = 0; j < g.n; ++j) {
    const double x = g.x(j) - center;
    values[j] = std::exp(-x * x / (waist * waist)) *
                std::polar(1.0, chirp * x * x + tilt * x);
  }
  return airysim::make_field(g, std::move(values));
}

/// Smooth random field: a few Gaussian bumps with bounded tilts/chirps so
/// that both the field and its spectrum stay well inside the grid.
inline airysim::ComplexField random_smooth_field(
    const airysim::TransverseGrid& g, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  Eigen::VectorXcd values = Eigen::VectorXcd::Zero(g.n);
  const double span = g.span();
  const int bumps = 2 + static_cast<int>(uni(rng) * 4);
  for (int b = 0; b < bumps; ++b) {
    const double w = (8.0 + 24.0 * uni(rng)) * g.dx;
    const double c = g.center + span * (uni(rng) - 0.5) / 4.0;
    const double tilt = (uni(rng) - 0.5) * 0.2 / g.dx;
    const double chirp = (uni(rng) - 0.5) * 0.05 / (w * g.dx * 8.0);
    const double amp = 0.2 + uni(rng);
    const double phase = 6.283185307179586 * uni(rng);
    for (int j = 0; j < g.n; ++j) {
      const double x = g.x(j) - c;
      values[j] += amp * std::exp(-x * x / (w * w)) *
                   std::polar(1.0, phase + tilt * x + chirp * x * x);
    }
  }
  return airysim::make_field(g, std::move(values));
}

inline double airy_ai(double s) { return boost::math::airy_ai(s); }

inline std::vector<double> linspace(double lo, double hi, int n) {
  std::vector<double> out(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i)
    out[static_cast<size_t>(i)] = lo + (hi - lo) * i / (n - 1.0);
  return out;
}

/// Two-sided Kolmogorov-Smirnov p-value against the standard normal CDF.
inline double ks_pvalue_standard_normal(std::vector<double> samples) {
  std::sort(samples.begin(), samples.end());
  const double n = static_cast<double>(samples.size());
  double d = 0.0;
  for (size_t i = 0; i < samples.size(); ++i) {
    const double cdf = 0.5 * std::erfc(-samples[i] / std::sqrt(2.0));
    const double lo = static_cast<double>(i) / n;
    const double hi = static_cast<double>(i + 1) / n;
    d = std::max({d, std::abs(cdf - lo), std::abs(cdf - hi)});
  }
  const double t = (std::sqrt(n) + 0.12 + 0.11 / std::sqrt(n)) * d;
  double p = 0.0;
  for (int k = 1; k <= 100; ++k)
    p += 2.0 * ((k % 2 == 1) ? 1.0 : -1.0) * std::exp(-2.0 * k * k * t * t);
  return std::min(std::max(p, 0.0), 1.0);
}

}  // namespace testsup
