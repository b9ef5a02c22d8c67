#include "airysim/numerics.hpp"

#include <cmath>
#include <stdexcept>

#include <Eigen/Dense>

namespace airysim {

double pearson_correlation(std::span<const double> a,
                           std::span<const double> b) {
  if (a.size() != b.size() || a.size() < 2)
    throw std::invalid_argument("pearson_correlation: size mismatch");
  const auto n = static_cast<double>(a.size());
  double ma = 0.0, mb = 0.0;
  for (size_t i = 0; i < a.size(); ++i) {
    ma += a[i];
    mb += b[i];
  }
  ma /= n;
  mb /= n;
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (size_t i = 0; i < a.size(); ++i) {
    const double da = a[i] - ma, db = b[i] - mb;
    sab += da * db;
    saa += da * da;
    sbb += db * db;
  }
  if (saa == 0.0 || sbb == 0.0)
    throw std::invalid_argument("pearson_correlation: constant input");
  return sab / std::sqrt(saa * sbb);
}

Eigen::VectorXcd align_global_phase(const Eigen::VectorXcd& a,
                                    const Eigen::VectorXcd& b) {
  if (a.size() != b.size())
    throw std::invalid_argument("align_global_phase: size mismatch");
  const Complex inner = (a.conjugate().array() * b.array()).sum();
  if (std::abs(inner) == 0.0) return b;
  return b * std::polar(1.0, -std::arg(inner));
}

namespace {

double refine_peak(std::span<const double> values,
                   std::span<const double> coords) {
  if (values.size() != coords.size() || values.size() < 3)
    throw std::invalid_argument("peak_position: need >= 3 samples");
  size_t jmax = 0;
  for (size_t j = 1; j < values.size(); ++j)
    if (values[j] > values[jmax]) jmax = j;
  if (jmax == 0 || jmax == values.size() - 1) return coords[jmax];
  const double ym = values[jmax - 1], y0 = values[jmax], yp = values[jmax + 1];
  const double denom = ym - 2.0 * y0 + yp;
  if (denom == 0.0) return coords[jmax];
  const double delta = 0.5 * (ym - yp) / denom;
  const double pitch = 0.5 * (coords[jmax + 1] - coords[jmax - 1]);
  return coords[jmax] + delta * pitch;
}

}  // namespace

double peak_position(std::span<const double> values,
                     std::span<const double> coords) {
  return refine_peak(values, coords);
}

double peak_position(const ComplexField& field) {
  std::vector<double> intensity(static_cast<size_t>(field.grid.n));
  std::vector<double> coords(static_cast<size_t>(field.grid.n));
  for (int j = 0; j < field.grid.n; ++j) {
    intensity[static_cast<size_t>(j)] = std::norm(field.values[j]);
    coords[static_cast<size_t>(j)] = field.coord(j);
  }
  return refine_peak(intensity, coords);
}

QuadraticFit fit_quadratic(std::span<const double> x,
                           std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 3)
    throw std::invalid_argument("fit_quadratic: need >= 3 samples");
  const auto n = static_cast<Eigen::Index>(x.size());
  Eigen::MatrixXd design(n, 3);
  Eigen::VectorXd rhs(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double xi = x[static_cast<size_t>(i)];
    design(i, 0) = 1.0;
    design(i, 1) = xi;
    design(i, 2) = xi * xi;
    rhs(i) = y[static_cast<size_t>(i)];
  }
  Eigen::Vector3d c = design.colPivHouseholderQr().solve(rhs);
  const Eigen::VectorXd residual = rhs - design * c;
  const double mean = rhs.mean();
  const double total = (rhs.array() - mean).square().sum();
  QuadraticFit fit{c[0], c[1], c[2], 1.0};
  if (total > 0.0) fit.r_squared = 1.0 - residual.squaredNorm() / total;
  return fit;
}

}  // namespace airysim
