#include "airysim/grid.hpp"

#include <bit>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "fft_engine.hpp"

namespace airysim {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
const double kSqrtTwoPi = std::sqrt(kTwoPi);

void check_grid(const TransverseGrid& g) {
  if (g.n < 8 || !std::has_single_bit(static_cast<unsigned>(g.n)))
    throw std::invalid_argument("grid: n must be a power of two >= 8");
  if (!(g.dx > 0.0) || !std::isfinite(g.dx))
    throw std::invalid_argument("grid: dx must be positive and finite");
  if (!std::isfinite(g.center))
    throw std::invalid_argument("grid: center must be finite");
}

}  // namespace

double TransverseGrid::dq() const { return kTwoPi / (n * dx); }

std::vector<double> TransverseGrid::positions() const {
  std::vector<double> xs(static_cast<size_t>(n));
  for (int j = 0; j < n; ++j) xs[static_cast<size_t>(j)] = x(j);
  return xs;
}

std::vector<double> TransverseGrid::wavenumbers() const {
  std::vector<double> qs(static_cast<size_t>(n));
  for (int j = 0; j < n; ++j) qs[static_cast<size_t>(j)] = q(j);
  return qs;
}

int TransverseGrid::nearest_index(double v, Domain domain) const {
  const double origin = domain == Domain::position ? center : 0.0;
  const double pitch = domain == Domain::position ? dx : dq();
  int j = n / 2 + static_cast<int>(std::lround((v - origin) / pitch));
  if (j < 0) j = 0;
  if (j > n - 1) j = n - 1;
  return j;
}

TransverseGrid make_grid(int n, double dx, double center) {
  TransverseGrid g{n, dx, center};
  check_grid(g);
  return g;
}

ComplexField make_field(const TransverseGrid& grid, Eigen::VectorXcd values,
                        Domain domain) {
  check_grid(grid);
  if (values.size() != grid.n)
    throw std::invalid_argument("field: values.length must equal grid.n");
  if (!values.allFinite())
    throw std::invalid_argument("field: NaN/Inf amplitudes are forbidden");
  return ComplexField{grid, domain, std::move(values)};
}

ComplexField uniform_field(const TransverseGrid& grid, Complex value,
                           Domain domain) {
  return make_field(grid, Eigen::VectorXcd::Constant(grid.n, value), domain);
}

double norm_squared(const ComplexField& field) {
  return field.values.squaredNorm() * field.measure();
}

double norm_l2(const ComplexField& field) {
  return std::sqrt(norm_squared(field));
}

namespace {

std::pair<double, double> moments(const ComplexField& field) {
  double w = 0.0, m1 = 0.0;
  for (int j = 0; j < field.grid.n; ++j) {
    const double p = std::norm(field.values[j]);
    w += p;
    m1 += p * field.coord(j);
  }
  if (w <= 0.0)
    throw std::invalid_argument("moments: field has zero norm");
  const double mean = m1 / w;
  double m2 = 0.0;
  for (int j = 0; j < field.grid.n; ++j) {
    const double d = field.coord(j) - mean;
    m2 += std::norm(field.values[j]) * d * d;
  }
  return {mean, m2 / w};
}

}  // namespace

double centroid(const ComplexField& field) { return moments(field).first; }

double variance(const ComplexField& field) { return moments(field).second; }

// Centered unitary DFT. With x_j = c + (j - n/2) dx and q_m = (m - n/2) dq,
//   F_m = dx/sqrt(2 pi) * e^{-i q_m c} (-1)^m sum_j (-1)^j f_j e^{-2 pi i mj/n}
// (the residual constant phase e^{-i pi n/2} is exactly 1 since 4 | n).
ComplexField fft_unitary(const ComplexField& field) {
  if (field.domain != Domain::position)
    throw std::invalid_argument("fft_unitary: field already in wavenumber domain");
  const TransverseGrid& g = field.grid;
  Eigen::VectorXcd buf = field.values;
  for (int j = 1; j < g.n; j += 2) buf[j] = -buf[j];
  detail::dft_inplace(buf.data(), g.n, -1);
  const double scale = g.dx / kSqrtTwoPi;
  if (g.center == 0.0) {
    for (int m = 0; m < g.n; ++m) buf[m] *= (m % 2 == 0) ? scale : -scale;
  } else {
    for (int m = 0; m < g.n; ++m) {
      const double sign = (m % 2 == 0) ? 1.0 : -1.0;
      buf[m] *= std::polar(sign * scale, -g.q(m) * g.center);
    }
  }
  return ComplexField{g, Domain::wavenumber, std::move(buf)};
}

ComplexField ifft_unitary(const ComplexField& field) {
  if (field.domain != Domain::wavenumber)
    throw std::invalid_argument("ifft_unitary: field already in position domain");
  const TransverseGrid& g = field.grid;
  Eigen::VectorXcd buf = field.values;
  if (g.center == 0.0) {
    for (int m = 1; m < g.n; m += 2) buf[m] = -buf[m];
  } else {
    for (int m = 0; m < g.n; ++m) {
      const double sign = (m % 2 == 0) ? 1.0 : -1.0;
      buf[m] *= std::polar(sign, g.q(m) * g.center);
    }
  }
  detail::dft_inplace(buf.data(), g.n, +1);
  const double scale = g.dq() / kSqrtTwoPi;
  for (int j = 0; j < g.n; ++j) buf[j] *= (j % 2 == 0) ? scale : -scale;
  return ComplexField{g, Domain::position, std::move(buf)};
}

ComplexField to_domain(const ComplexField& field, Domain domain) {
  if (field.domain == domain) return field;
  return domain == Domain::wavenumber ? fft_unitary(field)
                                      : ifft_unitary(field);
}

}  // namespace airysim
