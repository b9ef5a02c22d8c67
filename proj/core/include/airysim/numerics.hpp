#pragma once

#include <span>

#include "airysim/grid.hpp"

namespace airysim {

/// Pearson correlation coefficient of two equal-length samples.
double pearson_correlation(std::span<const double> a,
                           std::span<const double> b);

/// Rotates b by the global phase that best aligns it with a (maximizes
/// Re<a,b>); returns the rotated copy.
Eigen::VectorXcd align_global_phase(const Eigen::VectorXcd& a,
                                    const Eigen::VectorXcd& b);

/// argmax of |f|^2 refined by a three-point parabolic interpolation;
/// returns the peak coordinate on the field's current axis.
double peak_position(const ComplexField& field);
double peak_position(std::span<const double> values,
                     std::span<const double> coords);

struct QuadraticFit {
  double c0 = 0.0, c1 = 0.0, c2 = 0.0;  // y = c0 + c1 x + c2 x^2
  double r_squared = 0.0;
};

/// Ordinary least squares fit of a parabola.
QuadraticFit fit_quadratic(std::span<const double> x,
                           std::span<const double> y);

}  // namespace airysim
